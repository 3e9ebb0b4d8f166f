#include "kreisslab/state_space.hpp"

#include <cmath>
#include <sstream>

#include "kreisslab/errors.hpp"

namespace kreisslab {

StateSpace::StateSpace(Matrix a, Matrix b, Matrix c, Matrix d)
    : A(std::move(a)), B(std::move(b)), C(std::move(c)), D(std::move(d)) {
    if (D.size() == 0) D = Matrix::Zero(C.rows(), B.cols());
    validate();
}

void StateSpace::validate() const {
    std::ostringstream os;
    if (A.rows() != A.cols()) os << "A is " << A.rows() << "x" << A.cols() << " (not square); ";
    if (B.rows() != A.rows()) os << "B has " << B.rows() << " rows, expected " << A.rows() << "; ";
    if (C.cols() != A.rows()) os << "C has " << C.cols() << " cols, expected " << A.rows() << "; ";
    if (D.rows() != C.rows() || D.cols() != B.cols())
        os << "D is " << D.rows() << "x" << D.cols() << ", expected " << C.rows() << "x" << B.cols() << "; ";
    if (!os.str().empty()) throw DimensionError("StateSpace: " + os.str());
    if (!A.allFinite() || !B.allFinite() || !C.allFinite() || !D.allFinite())
        throw NumericalError("StateSpace: non-finite entries");
}

CMatrix StateSpace::eval(cplx s) const {
    const Eigen::Index nn = n();
    if (nn == 0) return D.cast<cplx>();
    CMatrix M = -A.cast<cplx>();
    M.diagonal().array() += s;
    return C.cast<cplx>() * M.partialPivLu().solve(B.cast<cplx>()) + D.cast<cplx>();
}

CMatrix StateSpace::eval_shifted(double x, double omega) const { return eval(cplx(x, omega)); }

StateSpace tf2ss(const std::vector<double>& num_in, const std::vector<double>& den_in) {
    auto strip = [](std::vector<double> v) {
        std::size_t k = 0;
        while (k + 1 < v.size() && v[k] == 0.0) ++k;
        return std::vector<double>(v.begin() + static_cast<long>(k), v.end());
    };
    std::vector<double> den = strip(den_in);
    std::vector<double> num = strip(num_in);
    if (den.empty() || den[0] == 0.0) throw PreconditionError("tf2ss: zero denominator");
    if (num.empty()) num = {0.0};
    const std::size_t nd = den.size() - 1;
    if (num.size() - 1 > nd) throw PreconditionError("tf2ss: improper transfer function");
    const double lead = den[0];
    for (double& v : den) v /= lead;
    for (double& v : num) v /= lead;
    std::vector<double> np(nd + 1, 0.0);
    std::copy(num.begin(), num.end(), np.begin() + static_cast<long>(nd + 1 - num.size()));

    Matrix D(1, 1);
    D(0, 0) = np[0];
    if (nd == 0) return StateSpace(Matrix(0, 0), Matrix(0, 1), Matrix(1, 0), D);
    const auto n = static_cast<Eigen::Index>(nd);
    Matrix A = Matrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) A(0, j) = -den[static_cast<std::size_t>(j) + 1];
    for (Eigen::Index i = 1; i < n; ++i) A(i, i - 1) = 1.0;
    Matrix B = Matrix::Zero(n, 1);
    B(0, 0) = 1.0;
    Matrix C(1, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto k = static_cast<std::size_t>(j) + 1;
        C(0, j) = np[k] - np[0] * den[k];
    }
    return StateSpace(A, B, C, D);
}

StateSpace series(const StateSpace& g1, const StateSpace& g2) {
    if (g2.inputs() != g1.outputs()) throw DimensionError("series: inner dimensions do not match");
    const Eigen::Index n1 = g1.n();
    const Eigen::Index n2 = g2.n();
    Matrix A = Matrix::Zero(n1 + n2, n1 + n2);
    A.topLeftCorner(n1, n1) = g1.A;
    A.bottomLeftCorner(n2, n1) = g2.B * g1.C;
    A.bottomRightCorner(n2, n2) = g2.A;
    Matrix B(n1 + n2, g1.inputs());
    B.topRows(n1) = g1.B;
    B.bottomRows(n2) = g2.B * g1.D;
    Matrix C(g2.outputs(), n1 + n2);
    C.leftCols(n1) = g2.D * g1.C;
    C.rightCols(n2) = g2.C;
    return StateSpace(A, B, C, g2.D * g1.D);
}

StateSpace similarity(const StateSpace& sys, const Matrix& T) {
    const auto lu = T.partialPivLu();
    const Matrix Ti = lu.inverse();
    return StateSpace(T * sys.A * Ti, T * sys.B, sys.C * Ti, sys.D);
}

StateSpace balance_realization(const StateSpace& sys) {
    const Eigen::Index n = sys.n();
    if (n == 0) return sys;
    const Eigen::Index p = sys.inputs();
    const Eigen::Index m = sys.outputs();
    Matrix S = sys.A;
    Vector d = Vector::Ones(n);
    Vector bn(n), cn(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        bn(i) = p ? sys.B.row(i).cwiseAbs().sum() : 0.0;
        cn(i) = m ? sys.C.col(i).cwiseAbs().sum() : 0.0;
    }
    bool converged = false;
    for (int sweep = 0; sweep < 200 && !converged; ++sweep) {
        converged = true;
        for (Eigen::Index i = 0; i < n; ++i) {
            double c = cn(i);
            double r = bn(i);
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(S(j, i));
                r += std::abs(S(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            const double s = c + r;
            double f = 1.0;
            double g = r / 2.0;
            while (c < g) {
                f *= 2.0;
                c *= 4.0;
            }
            g = r * 2.0;
            while (c >= g) {
                f /= 2.0;
                c /= 4.0;
            }
            if ((c + r) / f < 0.95 * s) {
                converged = false;
                d(i) *= f;
                S.row(i) /= f;
                S.col(i) *= f;
                bn(i) /= f;
                cn(i) *= f;
            }
        }
    }
    const Vector di = d.cwiseInverse();
    return StateSpace(di.asDiagonal() * sys.A * d.asDiagonal(), di.asDiagonal() * sys.B,
                      sys.C * d.asDiagonal(), sys.D);
}

} // namespace kreisslab
