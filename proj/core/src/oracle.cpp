#include "kreisslab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "golden.hpp"
#include "kreisslab/errors.hpp"
#include "kreisslab/parallel.hpp"
#include "kreisslab/sysnorms.hpp"

namespace kreisslab {

namespace {

std::vector<double> logspace(double a, double b, std::size_t n) {
    std::vector<double> v(n);
    const double la = std::log10(a);
    const double lb = std::log10(b);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = std::pow(10.0, la + (lb - la) * static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(n - 1, 1)));
    return v;
}

double spectral_radius(const Matrix& A) {
    const CVector ev = eigenvalues(A);
    double r = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) r = std::max(r, std::abs(ev(i)));
    return r;
}

// Horizon after which the Lyapunov envelope has decayed by `factor`.
double envelope_horizon(const Matrix& A, double factor) {
    const Eigen::Index n = A.rows();
    const Matrix P = solve_lyapunov(A.transpose(), Matrix::Identity(n, n));
    return 2.0 * lambda_max_sym(P) * std::log(factor);
}

// max over omega of sigma_max(G(x + j omega)) by dense grid plus golden polish.
double dense_sup_omega(const StateSpace& s, double x, const std::vector<double>& wgrid, double* wbest) {
    auto f = [&](double w) { return sigma_max(s.eval(cplx(x, w))); };
    double best = f(0.0);
    double bw = 0.0;
    std::size_t bi = 0;
    std::vector<double> vals(wgrid.size());
    for (std::size_t i = 0; i < wgrid.size(); ++i) {
        vals[i] = f(wgrid[i]);
        if (vals[i] > best) {
            best = vals[i];
            bw = wgrid[i];
            bi = i;
        }
    }
    if (bw > 0.0) {
        const double a = bi > 0 ? wgrid[bi - 1] : 0.0;
        const double b = bi + 1 < wgrid.size() ? wgrid[bi + 1] : wgrid[bi];
        const auto [w, v] = detail::golden_max(f, a, b, 1e-13 * (1.0 + b));
        if (v > best) {
            best = v;
            bw = w;
        }
    } else if (!wgrid.empty()) {
        const auto [w, v] = detail::golden_max(f, 0.0, wgrid[0], 1e-15);
        if (v > best) {
            best = v;
            bw = w;
        }
    }
    if (wbest) *wbest = bw;
    return best;
}

} // namespace

OracleResult oracle_hinf(const StateSpace& sys, std::size_t points) {
    require_hurwitz(sys.A, "oracle_hinf");
    const StateSpace s = balance_realization(sys);
    const double rho = std::max(spectral_radius(s.A), 1e-12);
    const std::vector<double> w = logspace(1e-5 * rho, 1e5 * rho, points);
    OracleResult r;
    double wb = 0.0;
    r.value = std::max(dense_sup_omega(s, 0.0, w, &wb), sigma_max(s.D));
    r.lower = r.value;
    r.argmax = wb;
    const NormReport h = hinf_norm(sys, 1e-10);
    r.upper = std::max(r.value, h.value * (1.0 + 2e-10));
    r.grid_points = points + 1;
    std::ostringstream os;
    os << "omega: 0 plus " << points << " log-spaced points in [" << 1e-5 * rho << ", " << 1e5 * rho
       << "], golden polish; upper from Hamiltonian level test";
    r.grid = os.str();
    return r;
}

OracleResult oracle_m0(const StateSpace& sys, std::size_t points) {
    require_hurwitz(sys.A, "oracle_m0");
    require_strictly_proper(sys, "oracle_m0");
    if (points < 2) throw PreconditionError("oracle_m0: need at least 2 grid points");
    const StateSpace s = balance_realization(sys);
    OracleResult r;
    const double f0 = sigma_max(Matrix(s.C * s.B));
    if (s.n() == 0) {
        r.value = r.lower = r.upper = f0;
        return r;
    }
    const Eigen::Index n = s.n();
    const Matrix P = solve_lyapunov(s.A.transpose(), Matrix::Identity(n, n));
    const Matrix Ph = sqrtm_psd(P);
    const double cpi = sigma_max(Matrix(s.C * inv_sqrtm_pd(P)));
    const double T = std::max(envelope_horizon(s.A, 1e9), 1e-6);
    const double h = T / static_cast<double>(points - 1);
    const Matrix E = expm(s.A, h);
    const double anorm = sigma_max(s.A);
    const double cnorm = sigma_max(s.C);
    const double grow = std::expm1(anorm * h);
    Matrix X = s.B;
    double best = -1.0;
    double tbest = 0.0;
    double upper = 0.0;
    for (std::size_t k = 0; k < points; ++k) {
        const double t = static_cast<double>(k) * h;
        const double v = sigma_max(Matrix(s.C * X));
        if (v > best) {
            best = v;
            tbest = t;
        }
        upper = std::max(upper, v + cnorm * grow * sigma_max(X));
        if (k + 1 < points) X = E * X;
    }
    upper = std::max(upper, cpi * sigma_max(Matrix(Ph * X)));
    auto f = [&](double t) { return sigma_max(Matrix(s.C * expm(s.A, t) * s.B)); };
    const auto [tp, vp] = detail::golden_max(f, std::max(0.0, tbest - h), tbest + h, 1e-14 * (1.0 + tbest));
    if (vp > best) {
        best = vp;
        tbest = tp;
    }
    r.value = r.lower = best;
    r.upper = std::max(upper, best);
    r.argmax = tbest;
    r.grid_points = points;
    std::ostringstream os;
    os << "t: " << points << " uniform points on [0, " << T << "], h = " << h
       << "; upper adds ||C||(e^{||A||h}-1)||e^{At}B|| and the Lyapunov tail";
    r.grid = os.str();
    return r;
}

OracleResult oracle_kreiss(const StateSpace& sys, const KreissOracleOptions& opts) {
    require_hurwitz(sys.A, "oracle_kreiss");
    require_strictly_proper(sys, "oracle_kreiss");
    StateSpace s = balance_realization(sys);
    const double rho = std::max(spectral_radius(s.A), 1e-300);
    s.A /= rho;
    const double anorm = sigma_max(s.A);
    const double cb = sigma_max(Matrix(s.C * s.B));
    const double x_lo = 1e-4;
    const double x_hi = std::max(1e4, 1e6 * anorm);

    const std::vector<double> xs = logspace(x_lo, x_hi, opts.x_points);
    const std::vector<double> wbase = logspace(1e-4, 1e4, opts.omega_points);
    auto sup_at = [&](double x, double* wb) {
        std::vector<double> wg(wbase.size());
        const double sc = std::max(1.0, x);
        for (std::size_t i = 0; i < wg.size(); ++i) wg[i] = wbase[i] * sc;
        return x * dense_sup_omega(s, x, wg, wb);
    };
    std::vector<double> fx(xs.size()), wx(xs.size());
    parallel_for(xs.size(), [&](std::size_t i) { fx[i] = sup_at(xs[i], &wx[i]); });
    std::size_t bi = 0;
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (fx[i] > fx[bi]) bi = i;
    double best = fx[bi];
    double bx = xs[bi];
    double bw = wx[bi];
    {
        const double a = bi > 0 ? xs[bi - 1] : xs[0];
        const double b = bi + 1 < xs.size() ? xs[bi + 1] : xs[bi];
        auto g = [&](double x) { return sup_at(x, nullptr); };
        const auto [xp, vp] = detail::golden_max(g, a, b, 1e-10 * b);
        if (vp > best) {
            best = vp;
            bx = xp;
            sup_at(xp, &bw);
        }
    }
    double lower = std::max(best, cb);

    // Upper bound: h(x) = ||G(. + x)||_inf is nonincreasing in x.
    const std::size_t nu = static_cast<std::size_t>(std::ceil(std::log(x_hi / x_lo) / std::log(opts.upper_ratio))) + 1;
    const std::vector<double> us = logspace(x_lo, x_hi, nu);
    std::vector<double> hu(nu);
    parallel_for(nu, [&](std::size_t j) {
        StateSpace sj = s;
        sj.A.diagonal().array() -= us[j];
        hu[j] = hinf_norm(sj, 1e-9).value * (1.0 + 2e-9);
    });
    double upper = x_lo * hu[0];
    for (std::size_t j = 0; j + 1 < nu; ++j) upper = std::max(upper, us[j + 1] * hu[j]);
    upper = std::max(upper, cb + sigma_max(s.C) * anorm * sigma_max(s.B) / (x_hi - anorm));

    OracleResult r;
    r.value = lower;
    r.lower = lower;
    r.upper = std::max(upper, lower);
    r.argmax = x_to_eta(bx * rho);
    r.argmax2 = bw * rho;
    r.grid_points = xs.size() * (wbase.size() + 1) + nu;
    std::ostringstream os;
    os << "x (Re s, normalized by spectral radius " << rho << "): " << xs.size() << " log points in [" << x_lo
       << ", " << x_hi << "]; omega: " << wbase.size() << " log points per x with golden polish; upper: "
       << nu << " nodes at ratio " << opts.upper_ratio << " with monotone H-inf bound and tail bound";
    r.grid = os.str();
    return r;
}

OracleResult oracle_eta_grid(const StateSpace& sys, std::size_t points) {
    require_hurwitz(sys.A, "oracle_eta_grid");
    require_strictly_proper(sys, "oracle_eta_grid");
    if (points < 2) throw PreconditionError("oracle_eta_grid: need at least 2 points");
    std::vector<double> eta(points), val(points), om(points);
    for (std::size_t i = 0; i < points; ++i)
        eta[i] = std::min(1.0 - std::cos(std::numbers::pi * static_cast<double>(i) / static_cast<double>(points - 1)),
                          2.0 - 1e-9);
    parallel_for(points, [&](std::size_t i) { val[i] = kreiss_family_value(sys, eta[i], 1e-10, &om[i]); });
    std::size_t bi = 0;
    for (std::size_t i = 1; i < points; ++i)
        if (val[i] > val[bi]) bi = i;
    OracleResult r;
    r.value = r.lower = val[bi];
    r.upper = std::numeric_limits<double>::infinity();
    r.argmax = eta[bi];
    r.argmax2 = om[bi];
    r.grid_points = points;
    r.grid = "eta: " + std::to_string(points) + " Chebyshev-clustered points on [0, 2)";
    return r;
}

OracleResult oracle_peak_gain(const StateSpace& sys, std::size_t points) {
    require_hurwitz(sys.A, "oracle_peak_gain");
    const StateSpace s = balance_realization(sys);
    const Eigen::Index m = s.outputs();
    Matrix integ = Matrix::Zero(m, s.inputs());
    OracleResult r;
    if (s.n() > 0) {
        const double T = std::max(envelope_horizon(s.A, 1e12), 1e-6);
        const double h = T / static_cast<double>(points - 1);
        const Matrix E = expm(s.A, h);
        Matrix X = s.B;
        Matrix prev = (s.C * X).cwiseAbs();
        for (std::size_t k = 1; k < points; ++k) {
            X = E * X;
            const Matrix cur = (s.C * X).cwiseAbs();
            integ += 0.5 * h * (prev + cur);
            prev = cur;
        }
        std::ostringstream os;
        os << "t: " << points << " uniform points on [0, " << T << "], trapezoid on |g_ij|";
        r.grid = os.str();
    }
    const Vector rows = integ.rowwise().sum() + s.D.cwiseAbs().rowwise().sum();
    Eigen::Index bi = 0;
    r.value = m > 0 ? rows.maxCoeff(&bi) : 0.0;
    r.lower = r.value;
    r.upper = r.value;
    r.argmax = static_cast<double>(bi);
    r.grid_points = points;
    return r;
}

OracleResult oracle_l2_to_peak(const StateSpace& sys, std::size_t points) {
    require_hurwitz(sys.A, "oracle_l2_to_peak");
    require_strictly_proper(sys, "oracle_l2_to_peak");
    OracleResult r;
    if (sys.n() == 0) return r;
    const double T = std::max(envelope_horizon(sys.A, 1e12), 1e-6);
    const double h = T / static_cast<double>(points - 1);
    const Matrix E = expm(sys.A, h);
    Matrix X = sys.B;
    Matrix Q = 0.5 * h * X * X.transpose();
    for (std::size_t k = 1; k < points; ++k) {
        X = E * X;
        Q += (k + 1 == points ? 0.5 : 1.0) * h * X * X.transpose();
    }
    r.value = r.lower = r.upper = lambda_max_sym(sys.C * Q * sys.C.transpose());
    r.grid_points = points;
    std::ostringstream os;
    os << "t: " << points << " uniform points on [0, " << T << "], trapezoid controllability Gramian";
    r.grid = os.str();
    return r;
}

} // namespace kreisslab
