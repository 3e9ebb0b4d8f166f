#include "kreisslab/subdiff.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kreisslab/errors.hpp"

namespace kreisslab {

double sigma_directional(const CMatrix& G, const CMatrix& D, double cluster_tol) {
    if (G.rows() != D.rows() || G.cols() != D.cols()) throw DimensionError("sigma_directional: shape mismatch");
    const CSvdTriple s = svd(G, cluster_tol);
    if (s.Q.cols() == 0) return D.norm() == 0.0 ? 0.0 : sigma_max(D);
    const CMatrix M = s.Q.adjoint() * D * s.P;
    const CMatrix H = 0.5 * (M + M.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(H, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(es.eigenvalues().size() - 1);
}

double sigma_directional(const Matrix& G, const Matrix& D, double cluster_tol) {
    return sigma_directional(CMatrix(G.cast<cplx>()), CMatrix(D.cast<cplx>()), cluster_tol);
}

FrequencyDirection system_direction(const StateSpace& sys, const StateSpace& d) {
    if (d.A.rows() != sys.A.rows() || d.B.cols() != sys.B.cols() || d.C.rows() != sys.C.rows())
        throw DimensionError("system_direction: perturbation shape mismatch");
    return [sys, d](double w) {
        CMatrix M = -sys.A.cast<cplx>();
        M.diagonal().array() += cplx(0.0, w);
        const auto lu = M.partialPivLu();
        const CMatrix RB = lu.solve(sys.B.cast<cplx>());
        const CMatrix Mt = M.transpose();
        const CMatrix CR = Mt.partialPivLu().solve(sys.C.transpose().cast<cplx>()).transpose();
        return CMatrix(CR * d.A.cast<cplx>() * RB + d.C.cast<cplx>() * RB + CR * d.B.cast<cplx>() +
                       d.D.cast<cplx>());
    };
}

SubgradientSet hinf_subdifferential(const StateSpace& sys, const std::vector<double>& peaks) {
    if (peaks.empty()) throw PreconditionError("hinf_subdifferential: empty peak set");
    SubgradientSet out;
    for (double w : peaks) {
        const CSvdTriple s = svd(sys.eval(cplx(0.0, w)));
        out.frequencies.push_back(w);
        out.Q.push_back(s.Q);
        out.P.push_back(s.P);
        const Eigen::Index k = s.Q.cols();
        out.Y.push_back(CMatrix::Identity(k, k) / static_cast<double>(k * static_cast<Eigen::Index>(peaks.size())));
    }
    return out;
}

double hinf_directional(const StateSpace& sys, const std::vector<double>& peaks, const FrequencyDirection& D) {
    if (peaks.empty()) throw PreconditionError("hinf_directional: empty peak set");
    double best = -std::numeric_limits<double>::infinity();
    for (double w : peaks) best = std::max(best, sigma_directional(sys.eval(cplx(0.0, w)), D(w)));
    return best;
}

Matrix sigma_gradient_theta(const Matrix& A, const Matrix& Bo, const Matrix& Co, cplx s, const Matrix& Bt,
                            const Matrix& Ct, const Matrix* E) {
    CMatrix M = -A.cast<cplx>();
    M.diagonal().array() += s;
    const auto lu = M.partialPivLu();
    const CMatrix RB = lu.solve(Bo.cast<cplx>());
    const CMatrix G = Co.cast<cplx>() * RB;
    const CSvdTriple sv = svd(G);
    const Eigen::Index k = sv.Q.cols();
    Matrix grad = Matrix::Zero(Bt.cols(), Ct.rows());
    // R^H Co^T q via the adjoint system.
    const CMatrix Madj = M.adjoint();
    const auto luh = Madj.partialPivLu();
    for (Eigen::Index i = 0; i < k; ++i) {
        const CVector q = sv.Q.col(i);
        const CVector p = sv.P.col(i);
        const CVector l = Bt.transpose().cast<cplx>() * luh.solve(Co.transpose().cast<cplx>() * q);
        CVector r = Ct.cast<cplx>() * (RB * p);
        if (E) r += E->cast<cplx>() * p;
        grad += (l.conjugate() * r.transpose()).real();
    }
    return grad / static_cast<double>(std::max<Eigen::Index>(k, 1));
}

namespace {

void family_stability(const ClosedLoop& cl) {
    const double a = spectral_abscissa(cl.A_cl);
    if (!(a < 0.0)) {
        const double witness = a > 0.0 ? 2.0 / (1.0 + a) : 2.0;
        std::ostringstream os;
        os << "kreiss_subgradient: family member unstable at eta = " << witness << " (alpha(A_cl) = " << a << ")";
        throw StabilityError(os.str(), witness);
    }
}

} // namespace

KreissSubgradient kreiss_subgradient(const ClosedLoop& cl, const ControllerRealization& K, const NormReport& rep) {
    family_stability(cl);
    KreissSubgradient out;
    out.value = rep.value;
    const Matrix Jt = cl.J.transpose();
    for (const ActivePoint& ap : rep.active) {
        if (ap.eta <= 0.0) {
            out.active.push_back(ap);
            out.gradients.push_back(Vector::Zero(K.free_count()));
            continue;
        }
        const double x = eta_to_x(ap.eta);
        Matrix Ax = cl.A_cl;
        Ax.diagonal().array() -= x;
        const StateSpace sh(Ax, cl.J, Jt);
        std::vector<double> ws = hinf_peak_frequencies(sh, ap.value / x);
        if (ws.empty() && std::isfinite(ap.omega)) ws.push_back(ap.omega);
        for (double w : ws) {
            const Matrix g = x * sigma_gradient_theta(cl.A_cl, cl.J, Jt, cplx(x, w), cl.Bt, cl.Ct);
            out.active.push_back({ap.eta, w, ap.value});
            out.gradients.push_back(K.mask_gradient(g));
        }
    }
    return out;
}

KreissSubgradient kreiss_subgradient(const ClosedLoop& cl, const ControllerRealization& K, const KreissOptions& opts) {
    family_stability(cl);
    const NormReport rep = kreiss_norm(cl.performance(), opts);
    return kreiss_subgradient(cl, K, rep);
}

Vector min_norm_element(const std::vector<Vector>& g, const Matrix& Hin, std::vector<double>* weights) {
    if (g.empty()) throw PreconditionError("min_norm_element: empty set");
    const std::size_t k = g.size();
    const Eigen::Index d = g[0].size();
    const Matrix H = Hin.size() ? Hin : Matrix::Identity(d, d);
    Matrix Gm(d, static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < k; ++i) Gm.col(static_cast<Eigen::Index>(i)) = g[i];
    const Matrix Q = Gm.transpose() * H * Gm;
    // Projected gradient on the simplex, step 1/L.
    Vector w = Vector::Constant(static_cast<Eigen::Index>(k), 1.0 / static_cast<double>(k));
    const double L = std::max(Q.diagonal().maxCoeff() * static_cast<double>(k), 1e-300);
    auto project = [](Vector v) {
        Vector u = v;
        std::sort(u.data(), u.data() + u.size(), std::greater<double>());
        double css = 0.0;
        double tau = 0.0;
        for (Eigen::Index i = 0; i < u.size(); ++i) {
            css += u(i);
            const double t = (css - 1.0) / static_cast<double>(i + 1);
            if (u(i) - t > 0.0) tau = t;
        }
        return Vector((v.array() - tau).cwiseMax(0.0));
    };
    if (k > 1) {
        Vector y = w;
        double tk = 1.0;
        for (int it = 0; it < 2000; ++it) {
            const Vector wn = project(y - Q * y / L);
            const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
            y = wn + ((tk - 1.0) / tn) * (wn - w);
            if ((wn - w).norm() < 1e-14) {
                w = wn;
                break;
            }
            w = wn;
            tk = tn;
        }
    }
    if (weights) weights->assign(w.data(), w.data() + w.size());
    return Gm * w;
}

} // namespace kreisslab
