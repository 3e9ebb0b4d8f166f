#include "kreisslab/numkernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "kreisslab/errors.hpp"

namespace kreisslab {

void require_square(const Matrix& M, const char* what) {
    if (M.rows() != M.cols() || M.rows() == 0) {
        std::ostringstream os;
        os << what << ": expected a non-empty square matrix, got " << M.rows() << "x" << M.cols();
        throw DimensionError(os.str());
    }
}

void require_finite(const Matrix& M, const char* what) {
    if (!M.allFinite()) throw NumericalError(std::string(what) + ": non-finite entries");
}

Matrix expm(const Matrix& M, double t) {
    require_square(M, "expm");
    if (!std::isfinite(t)) throw NumericalError("expm: non-finite time");
    static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                   1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                   670442572800.0,      33522128640.0,       1323241920.0,
                                   40840800.0,          960960.0,            16380.0,
                                   182.0,               1.0};
    const Eigen::Index n = M.rows();
    Matrix A = M * t;
    const double norm1 = A.cwiseAbs().colwise().sum().maxCoeff();
    int s = 0;
    if (norm1 > 0.5) {
        s = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
        A /= std::ldexp(1.0, s);
    }
    const Matrix I = Matrix::Identity(n, n);
    const Matrix A2 = A * A;
    const Matrix A4 = A2 * A2;
    const Matrix A6 = A4 * A2;
    const Matrix U = A * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 +
                          b[3] * A2 + b[1] * I);
    const Matrix V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 +
                     b[2] * A2 + b[0] * I;
    Matrix R = (V - U).partialPivLu().solve(V + U);
    for (int k = 0; k < s; ++k) R = R * R;
    return R;
}

Vector balance_scaling(const Matrix& M) {
    require_square(M, "balance_scaling");
    const Eigen::Index n = M.rows();
    Matrix B = M;
    Vector d = Vector::Ones(n);
    constexpr double radix = 2.0;
    constexpr double radix2 = radix * radix;
    bool converged = false;
    for (int sweep = 0; sweep < 200 && !converged; ++sweep) {
        converged = true;
        for (Eigen::Index i = 0; i < n; ++i) {
            double c = 0.0;
            double r = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(B(j, i));
                r += std::abs(B(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            const double s = c + r;
            double f = 1.0;
            double g = r / radix;
            while (c < g) {
                f *= radix;
                c *= radix2;
            }
            g = r * radix;
            while (c >= g) {
                f /= radix;
                c /= radix2;
            }
            if ((c + r) / f < 0.95 * s) {
                converged = false;
                d(i) *= f;
                B.row(i) /= f;
                B.col(i) *= f;
            }
        }
    }
    return d;
}

Spectrum eig(const Matrix& M, bool with_vectors) {
    require_square(M, "eig");
    require_finite(M, "eig");
    const Eigen::Index n = M.rows();
    const Vector d = balance_scaling(M);
    const Matrix Mb = d.cwiseInverse().asDiagonal() * M * d.asDiagonal();
    Eigen::EigenSolver<Matrix> es;
    es.setMaxIterations(static_cast<Eigen::Index>(30 * std::max<Eigen::Index>(n, 1)));
    es.compute(Mb, with_vectors);
    if (es.info() != Eigen::Success) {
        std::ostringstream os;
        os << "eig: QR iteration did not converge within " << 30 * n << " sweeps (n=" << n
           << ", ||M||_F=" << M.norm() << ")";
        throw NumericalError(os.str());
    }
    Spectrum out;
    out.eigenvalues = es.eigenvalues();
    if (with_vectors) {
        CMatrix V = d.cast<cplx>().asDiagonal() * es.eigenvectors();
        for (Eigen::Index j = 0; j < V.cols(); ++j) {
            const double nv = V.col(j).norm();
            if (nv > 0) V.col(j) /= nv;
        }
        out.eigenvectors = std::move(V);
    }
    return out;
}

CVector eigenvalues(const Matrix& M) { return eig(M, false).eigenvalues; }

namespace {

template <typename Mat>
SvdTripleT<Mat> svd_impl(const Mat& M, double cluster_tol) {
    if (!M.allFinite()) throw NumericalError("svd: non-finite entries");
    SvdTripleT<Mat> out;
    if (M.size() == 0) {
        out.sigma_max = 0.0;
        out.singular_values = Vector();
        return out;
    }
    Eigen::JacobiSVD<Mat> js(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.singular_values = js.singularValues();
    out.U = js.matrixU();
    out.V = js.matrixV();
    out.sigma_max = out.singular_values.size() ? out.singular_values(0) : 0.0;
    Eigen::Index k = 1;
    while (k < out.singular_values.size() &&
           out.singular_values(k) >= out.sigma_max * (1.0 - cluster_tol))
        ++k;
    out.Q = out.U.leftCols(k);
    out.P = out.V.leftCols(k);
    return out;
}

} // namespace

SvdTriple svd(const Matrix& M, double cluster_tol) { return svd_impl(M, cluster_tol); }
CSvdTriple svd(const CMatrix& M, double cluster_tol) { return svd_impl(M, cluster_tol); }

double sigma_max(const Matrix& M) {
    if (M.size() == 0) return 0.0;
    if (M.rows() == 1 || M.cols() == 1) return M.norm();
    return Eigen::JacobiSVD<Matrix>(M).singularValues()(0);
}

double sigma_max(const CMatrix& M) {
    if (M.size() == 0) return 0.0;
    if (M.rows() == 1 || M.cols() == 1) return M.norm();
    return Eigen::JacobiSVD<CMatrix>(M).singularValues()(0);
}

Vector singular_values(const CMatrix& M) {
    if (M.size() == 0) return Vector();
    return Eigen::JacobiSVD<CMatrix>(M).singularValues();
}

double spectral_abscissa(const Matrix& M) {
    const CVector ev = eigenvalues(M);
    double a = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < ev.size(); ++i) a = std::max(a, ev(i).real());
    return a;
}

double lambda_max_sym(const Matrix& S) {
    require_square(S, "lambda_max_sym");
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (S + S.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(S.rows() - 1);
}

double lambda_min_sym(const Matrix& S) {
    require_square(S, "lambda_min_sym");
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (S + S.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

double numerical_abscissa(const Matrix& M) {
    require_square(M, "numerical_abscissa");
    return 0.5 * lambda_max_sym(M + M.transpose());
}

bool is_hurwitz(const Matrix& M, double margin) { return spectral_abscissa(M) < -margin; }

Matrix sqrtm_psd(const Matrix& S) {
    require_square(S, "sqrtm_psd");
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (S + S.transpose()));
    const Vector l = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * l.asDiagonal() * es.eigenvectors().transpose();
}

Matrix inv_sqrtm_pd(const Matrix& S) {
    require_square(S, "inv_sqrtm_pd");
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (S + S.transpose()));
    if (es.eigenvalues()(0) <= 0.0) throw PreconditionError("inv_sqrtm_pd: matrix not positive definite");
    const Vector l = es.eigenvalues().cwiseSqrt().cwiseInverse();
    return es.eigenvectors() * l.asDiagonal() * es.eigenvectors().transpose();
}

Matrix solve_lyapunov(const Matrix& A, const Matrix& W) {
    require_square(A, "solve_lyapunov");
    if (W.rows() != A.rows() || W.cols() != A.cols())
        throw DimensionError("solve_lyapunov: W must match A");
    require_finite(A, "solve_lyapunov");
    const double alpha = spectral_abscissa(A);
    if (!(alpha < 0.0)) throw StabilityError("solve_lyapunov: A is not Hurwitz", alpha);

    const Eigen::Index n = A.rows();
    Eigen::ComplexSchur<CMatrix> schur(A.cast<cplx>());
    if (schur.info() != Eigen::Success) throw NumericalError("solve_lyapunov: Schur decomposition failed");
    const CMatrix& T = schur.matrixT();
    const CMatrix& U = schur.matrixU();
    const CMatrix Wt = U.adjoint() * W.cast<cplx>() * U;

    // T X + X T^H = -Wt, column sweep from the last column.
    CMatrix X = CMatrix::Zero(n, n);
    for (Eigen::Index j = n - 1; j >= 0; --j) {
        CVector rhs = -Wt.col(j);
        for (Eigen::Index k = j + 1; k < n; ++k) rhs -= std::conj(T(j, k)) * X.col(k);
        CMatrix L = T;
        L.diagonal().array() += std::conj(T(j, j));
        X.col(j) = L.triangularView<Eigen::Upper>().solve(rhs);
    }
    Matrix Q = (U * X * U.adjoint()).real();
    if ((W - W.transpose()).norm() <= 1e-14 * (1.0 + W.norm())) Q = (0.5 * (Q + Q.transpose())).eval();
    return Q;
}

Matrix null_space(const Matrix& M, double rel_tol) {
    const Eigen::Index cols = M.cols();
    if (M.rows() == 0) return Matrix::Identity(cols, cols);
    Eigen::JacobiSVD<Matrix> js(M, Eigen::ComputeFullV);
    const Vector& s = js.singularValues();
    const double smax = s.size() ? s(0) : 0.0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * std::max(smax, 1e-300)) ++rank;
    return js.matrixV().rightCols(cols - rank);
}

int numerical_rank(const Matrix& M, double rel_tol) {
    if (M.size() == 0) return 0;
    Eigen::JacobiSVD<Matrix> js(M);
    const Vector& s = js.singularValues();
    if (s(0) == 0.0) return 0;
    int r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * s(0)) ++r;
    return r;
}

} // namespace kreisslab
