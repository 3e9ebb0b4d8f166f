#include "kreisslab/sysnorms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "golden.hpp"
#include "kreisslab/errors.hpp"
#include "kreisslab/oracle.hpp"
#include "kreisslab/parallel.hpp"

namespace kreisslab {

const char* to_string(MaximizerKind k) {
    switch (k) {
    case MaximizerKind::Time: return "t";
    case MaximizerKind::Frequency: return "omega";
    case MaximizerKind::Eta: return "eta";
    case MaximizerKind::Channel: return "channel";
    case MaximizerKind::None: break;
    }
    return "none";
}

void require_hurwitz(const Matrix& A, const char* what) {
    if (A.rows() == 0) return;
    const double a = spectral_abscissa(A);
    if (!(a < 0.0)) {
        std::ostringstream os;
        os << what << ": A is not Hurwitz (spectral abscissa " << a << ")";
        throw StabilityError(os.str(), a);
    }
}

void require_strictly_proper(const StateSpace& sys, const char* what) {
    if (!sys.strictly_proper())
        throw PreconditionError(std::string(what) + ": requires D = 0 (strictly proper G)");
}

double sigma_at(const StateSpace& sys, double omega, double shift) {
    return sigma_max(sys.eval(cplx(shift, omega)));
}

namespace {

struct HinfCore {
    double value = 0.0;
    double omega = 0.0;
    std::size_t evals = 0;
};

// Hamiltonian whose imaginary eigenvalues j w are the frequencies where
// gamma is a singular value of G(j w), for the family member A - x I.
Matrix hamiltonian(const StateSpace& s, double x, double gamma) {
    const Eigen::Index n = s.n();
    const Eigen::Index p = s.inputs();
    const Eigen::Index m = s.outputs();
    Matrix Ax = s.A;
    Ax.diagonal().array() -= x;
    Matrix H(2 * n, 2 * n);
    if (s.strictly_proper()) {
        H.topLeftCorner(n, n) = Ax;
        H.topRightCorner(n, n) = s.B * s.B.transpose() / gamma;
        H.bottomLeftCorner(n, n) = -s.C.transpose() * s.C / gamma;
        H.bottomRightCorner(n, n) = -Ax.transpose();
        return H;
    }
    const Matrix R = gamma * gamma * Matrix::Identity(p, p) - s.D.transpose() * s.D;
    const auto Rl = R.ldlt();
    const Matrix RiDt = Rl.solve(s.D.transpose());
    const Matrix Ab = Ax + s.B * RiDt * s.C;
    H.topLeftCorner(n, n) = Ab;
    H.topRightCorner(n, n) = gamma * s.B * Rl.solve(s.B.transpose());
    H.bottomLeftCorner(n, n) =
        -s.C.transpose() * (Matrix::Identity(m, m) + s.D * RiDt) * s.C / gamma;
    H.bottomRightCorner(n, n) = -Ab.transpose();
    return H;
}

// Frequencies w >= 0 where gamma is (verified) a singular value of G_x(j w).
std::vector<double> level_crossings(const StateSpace& s, double x, double gamma) {
    const Matrix H = hamiltonian(s, x, gamma);
    const CVector ev = eigenvalues(H);
    const double thr = 1e-6 * (1.0 + H.cwiseAbs().colwise().sum().maxCoeff());
    std::vector<double> out;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (std::abs(ev(i).real()) > thr) continue;
        const double w = std::abs(ev(i).imag());
        const Vector sv = singular_values(s.eval(cplx(x, w)));
        double gap = std::numeric_limits<double>::infinity();
        for (Eigen::Index k = 0; k < sv.size(); ++k) gap = std::min(gap, std::abs(sv(k) - gamma));
        if (gap <= 1e-4 * gamma) out.push_back(w);
    }
    std::sort(out.begin(), out.end());
    std::vector<double> uniq;
    for (double w : out)
        if (uniq.empty() || w - uniq.back() > 1e-12 * (1.0 + w)) uniq.push_back(w);
    return uniq;
}

HinfCore hinf_core(const StateSpace& s, double x, double tol, const CVector& poles) {
    HinfCore r;
    auto eval = [&](double w) {
        ++r.evals;
        return sigma_max(s.eval(cplx(x, w)));
    };
    const double sd = sigma_max(s.D);
    r.value = sd;
    r.omega = std::numeric_limits<double>::infinity();
    if (s.n() == 0) return r;

    auto consider = [&](double w) {
        const double v = eval(w);
        if (v > r.value || (v == r.value && w < r.omega)) {
            r.value = v;
            r.omega = w;
        }
    };
    consider(0.0);
    double rho = 0.0;
    for (Eigen::Index i = 0; i < poles.size(); ++i) {
        const cplx l = poles(i) - x;
        rho = std::max(rho, std::abs(l));
        consider(std::abs(poles(i).imag()));
        consider(std::abs(l));
    }
    if (rho > 0.0)
        for (int k = 0; k < 12; ++k) consider(rho * std::pow(10.0, -3.0 + 5.0 * k / 11.0));
    if (r.value <= 0.0) {
        r.omega = 0.0;
        return r;
    }

    for (int iter = 0; iter < 100; ++iter) {
        const double gamma = (1.0 + 2.0 * tol) * r.value;
        const std::vector<double> ws = level_crossings(s, x, gamma);
        if (ws.empty()) break;
        const double before = r.value;
        std::vector<double> pts = ws;
        if (ws.front() > 0.0) pts.insert(pts.begin(), 0.0);
        for (std::size_t k = 0; k + 1 < pts.size(); ++k) consider(0.5 * (pts[k] + pts[k + 1]));
        for (double w : ws) consider(w);
        if (r.value < gamma * (1.0 - 1e-12) && r.value <= before * (1.0 + tol)) break;
    }
    if (!std::isfinite(r.omega)) r.omega = std::numeric_limits<double>::infinity();
    return r;
}

StateSpace prepared(const StateSpace& sys) {
    sys.validate();
    return balance_realization(sys);
}

} // namespace

NormReport hinf_norm(const StateSpace& sys, double tol) {
    if (!(tol > 0.0)) throw PreconditionError("hinf_norm: tol must be positive");
    require_hurwitz(sys.A, "hinf_norm");
    const StateSpace s = prepared(sys);
    const CVector poles = s.n() ? eigenvalues(s.A) : CVector();
    const HinfCore c = hinf_core(s, 0.0, tol, poles);
    NormReport rep;
    rep.value = c.value;
    rep.kind = MaximizerKind::Frequency;
    rep.maximizer = c.omega;
    rep.evaluations = c.evals;
    return rep;
}

std::vector<double> hinf_peak_frequencies(const StateSpace& sys, double hinf_value, double rel_tol) {
    const StateSpace s = prepared(sys);
    std::vector<double> peaks;
    if (s.n() == 0 || hinf_value <= 0.0) return peaks;
    const double level = (1.0 - rel_tol) * hinf_value;
    auto f = [&](double w) { return sigma_max(s.eval(cplx(0.0, w))); };
    std::vector<double> ws = level_crossings(s, 0.0, level);
    std::vector<double> pts;
    if (f(0.0) >= level) pts.push_back(0.0);
    for (double w : ws) pts.push_back(w);
    std::sort(pts.begin(), pts.end());
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        const double a = pts[k];
        const double b = pts[k + 1];
        if (f(0.5 * (a + b)) < level && !(a == 0.0 && f(0.0) >= level && b - a < 1e-9)) continue;
        const auto [w, v] = detail::golden_max(f, a, b, 1e-12 * (1.0 + b));
        if (v >= level) peaks.push_back(w);
    }
    if (pts.size() == 1 && pts[0] == 0.0) peaks.push_back(0.0);
    if (peaks.empty()) {
        const HinfCore c = hinf_core(s, 0.0, 1e-10, eigenvalues(s.A));
        if (std::isfinite(c.omega)) peaks.push_back(c.omega);
    }
    std::sort(peaks.begin(), peaks.end());
    std::vector<double> uniq;
    for (double w : peaks)
        if (uniq.empty() || std::abs(w - uniq.back()) > 1e-7 * (1.0 + w)) uniq.push_back(w);
    return uniq;
}

namespace {

struct KreissContext {
    StateSpace s;  // balanced, time-normalized
    CVector poles; // of s.A
    double scale = 1.0;
    double cb = 0.0;
    double tol = 1e-10;
};

KreissContext make_kreiss_context(const StateSpace& sys, double tol) {
    KreissContext k;
    StateSpace b = prepared(sys);
    const CVector ev = eigenvalues(b.A);
    double rho = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) rho = std::max(rho, std::abs(ev(i)));
    k.scale = rho > 0.0 ? rho : 1.0;
    b.A /= k.scale;
    k.s = std::move(b);
    k.poles = ev / k.scale;
    k.cb = sigma_max(Matrix(sys.C * sys.B));
    k.tol = tol;
    return k;
}

// Family value in normalized coordinates; eta_n = 2/(1 + x_n).
double family_value(const KreissContext& k, double eta_n, double* omega_n, std::size_t* evals) {
    if (eta_n <= 0.0) {
        if (omega_n) *omega_n = 0.0;
        return k.cb;
    }
    const double x = eta_to_x(eta_n);
    const HinfCore c = hinf_core(k.s, x, k.tol, k.poles);
    if (evals) *evals += c.evals;
    if (omega_n) *omega_n = c.omega;
    return x * c.value;
}

double to_original_eta(const KreissContext& k, double eta_n) {
    if (eta_n <= 0.0) return 0.0;
    return x_to_eta(k.scale * eta_to_x(eta_n));
}

} // namespace

double kreiss_family_value(const StateSpace& sys, double eta, double tol, double* omega) {
    require_hurwitz(sys.A, "kreiss_family_value");
    require_strictly_proper(sys, "kreiss_family_value");
    if (eta <= 0.0) {
        if (omega) *omega = 0.0;
        return sigma_max(Matrix(sys.C * sys.B));
    }
    const StateSpace s = prepared(sys);
    const double x = eta_to_x(eta);
    const HinfCore c = hinf_core(s, x, tol, eigenvalues(s.A));
    if (omega) *omega = c.omega;
    return x * c.value;
}

NormReport kreiss_norm(const StateSpace& sys, const KreissOptions& opts) {
    require_hurwitz(sys.A, "kreiss_norm");
    require_strictly_proper(sys, "kreiss_norm");
    if (opts.grid_points < 3) throw PreconditionError("kreiss_norm: grid_points must be >= 3");
    const KreissContext k = make_kreiss_context(sys, opts.hinf_tol);

    const auto N = static_cast<std::size_t>(opts.grid_points);
    std::vector<double> eta(N), val(N), om(N);
    std::vector<std::size_t> ev(N, 0);
    for (std::size_t i = 0; i < N; ++i) {
        const double e = 1.0 - std::cos(std::numbers::pi * static_cast<double>(i) / static_cast<double>(N - 1));
        eta[i] = std::min(e, opts.eta_cap);
    }
    parallel_for(N, [&](std::size_t i) { val[i] = family_value(k, eta[i], &om[i], &ev[i]); });

    NormReport rep;
    rep.kind = MaximizerKind::Eta;
    for (std::size_t e : ev) rep.evaluations += e;

    // Local maxima of the grid (endpoints included), best first.
    std::vector<std::size_t> peaks;
    for (std::size_t i = 0; i < N; ++i) {
        const bool left = i == 0 || val[i] >= val[i - 1];
        const bool right = i + 1 == N || val[i] >= val[i + 1];
        if (left && right) peaks.push_back(i);
    }
    std::stable_sort(peaks.begin(), peaks.end(), [&](std::size_t a, std::size_t b) { return val[a] > val[b]; });
    if (peaks.size() > static_cast<std::size_t>(opts.max_refine)) peaks.resize(static_cast<std::size_t>(opts.max_refine));

    struct Cand {
        double eta_n, value, omega_n;
    };
    std::vector<Cand> cands(peaks.size());
    std::vector<std::size_t> cev(peaks.size(), 0);
    parallel_for(peaks.size(), [&](std::size_t j) {
        const std::size_t i = peaks[j];
        const double a = eta[i == 0 ? 0 : i - 1];
        const double b = eta[i + 1 == N ? N - 1 : i + 1];
        auto f = [&](double e) { return family_value(k, e, nullptr, &cev[j]); };
        auto [e, v] = detail::golden_max(f, a, b, opts.eta_tol, 200, &cev[j]);
        if (val[i] > v || (val[i] == v && eta[i] < e)) {
            e = eta[i];
            v = val[i];
        }
        double w = 0.0;
        v = std::max(v, family_value(k, e, &w, &cev[j]));
        cands[j] = {e, v, w};
    });
    for (std::size_t e : cev) rep.evaluations += e;

    double best = -1.0;
    std::size_t bi = 0;
    for (std::size_t j = 0; j < cands.size(); ++j) {
        if (cands[j].value > best || (cands[j].value == best && cands[j].eta_n < cands[bi].eta_n)) {
            best = cands[j].value;
            bi = j;
        }
    }
    rep.value = best;
    rep.maximizer = to_original_eta(k, cands[bi].eta_n);
    rep.inner_frequency = std::isfinite(cands[bi].omega_n) ? cands[bi].omega_n * k.scale : cands[bi].omega_n;
    for (const Cand& c : cands) {
        if (c.value < (1.0 - opts.active_tol) * best) continue;
        rep.active.push_back({to_original_eta(k, c.eta_n),
                              std::isfinite(c.omega_n) ? c.omega_n * k.scale : c.omega_n, c.value});
    }
    std::sort(rep.active.begin(), rep.active.end(),
              [](const ActivePoint& a, const ActivePoint& b) { return a.eta < b.eta; });

    if (rep.value < k.cb - 1e-8 * (1.0 + k.cb)) {
        std::ostringstream os;
        os << "kreiss_norm: value " << rep.value << " below the lower bound sigma_max(CB) = " << k.cb;
        throw ConsistencyError(os.str());
    }
    if (opts.certify) {
        const OracleResult o = oracle_kreiss(sys);
        rep.certification = Certification{std::min(o.lower, rep.value), std::max(o.upper, rep.value)};
        if (rep.value > o.upper * (1.0 + 1e-6)) {
            std::ostringstream os;
            os << "kreiss_norm: value " << rep.value << " above certified upper bound " << o.upper;
            throw ConsistencyError(os.str());
        }
    }
    return rep;
}

NormReport kreiss_matrix(const Matrix& A, const KreissOptions& opts) {
    require_square(A, "kreiss_matrix");
    const Eigen::Index n = A.rows();
    return kreiss_norm(StateSpace(A, Matrix::Identity(n, n), Matrix::Identity(n, n)), opts);
}

double cb_lower_bound(const StateSpace& sys) {
    sys.validate();
    return sigma_max(Matrix(sys.C * sys.B));
}

AttainmentCheck attainment_check(const StateSpace& sys, double tol) {
    sys.validate();
    AttainmentCheck out;
    const Matrix CB = sys.C * sys.B;
    out.sigma_cb = sigma_max(CB);
    if (!(out.sigma_cb > 0.0)) throw PreconditionError("attainment_check: sigma_max(CB) = 0");
    const Matrix M = CB * CB.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (M + M.transpose()));
    const Eigen::Index m = M.rows();
    const double lmax = es.eigenvalues()(m - 1);
    Eigen::Index k = 1;
    while (k < m && es.eigenvalues()(m - 1 - k) >= lmax * (1.0 - kSvdClusterTol)) ++k;
    const Matrix Q = es.eigenvectors().rightCols(k);
    const Matrix BB = sys.B * sys.B.transpose();
    const Matrix Ysym = Q.transpose() * sys.C * (sys.A * BB + BB * sys.A.transpose()) * sys.C.transpose() * Q;
    out.Y_sym_max = lambda_max_sym(Ysym);
    out.slope = out.Y_sym_max / (2.0 * out.sigma_cb);
    out.necessary_ok = out.Y_sym_max <= tol;
    return out;
}

namespace {

// Lyapunov envelope: P solves A^T P + P A + I = 0, so ||P^{1/2} e^{At} v|| is
// nonincreasing and ||C e^{As} B|| <= ||C P^{-1/2}|| ||P^{1/2} e^{At} B|| for s >= t.
struct Envelope {
    Matrix P;
    Matrix Ph;
    double cpi = 0.0;
    double lmin = 0.0;
    double lmax = 0.0;
};

Envelope make_envelope(const StateSpace& s) {
    Envelope e;
    const Eigen::Index n = s.n();
    e.P = solve_lyapunov(s.A.transpose(), Matrix::Identity(n, n));
    e.Ph = sqrtm_psd(e.P);
    e.cpi = sigma_max(Matrix(s.C * inv_sqrtm_pd(e.P)));
    e.lmin = lambda_min_sym(e.P);
    e.lmax = lambda_max_sym(e.P);
    return e;
}

// Time stepping with h = 0.1 / max |lambda| over modes not yet decayed by e^{-30}.
struct Stepper {
    std::vector<double> mag;
    std::vector<double> re;
    double step_for(double t) const {
        double m = 0.0;
        for (std::size_t i = 0; i < mag.size(); ++i)
            if (re[i] * t > -30.0) m = std::max(m, mag[i]);
        if (m == 0.0)
            for (double v : mag) m = std::max(m, v);
        return 0.1 / m;
    }
};

Stepper make_stepper(const Matrix& A) {
    Stepper st;
    const CVector ev = eigenvalues(A);
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        st.mag.push_back(std::max(std::abs(ev(i)), 1e-300));
        st.re.push_back(ev(i).real());
    }
    return st;
}

} // namespace

NormReport transient_peak_m0(const StateSpace& sys, const M0Options& opts) {
    require_hurwitz(sys.A, "transient_peak_m0");
    require_strictly_proper(sys, "transient_peak_m0");
    const StateSpace s = prepared(sys);
    NormReport rep;
    rep.kind = MaximizerKind::Time;
    auto f_at = [&](double t) {
        ++rep.evaluations;
        return sigma_max(Matrix(s.C * expm(s.A, t) * s.B));
    };
    const double f0 = sigma_max(Matrix(s.C * s.B));
    if (s.n() == 0) {
        rep.value = f0;
        return rep;
    }
    const Envelope env = make_envelope(s);
    const Stepper st = make_stepper(s.A);

    struct Local {
        double a, t, b, v;
    };
    std::vector<Local> locals;
    double best = f0;
    double t = 0.0;
    double h = st.step_for(0.0);
    Matrix E = expm(s.A, h);
    Matrix X = s.B;
    double prev_t = 0.0;
    double prev_f = -1.0;
    double cur_f = f0;
    double cur_t = 0.0;
    std::size_t steps = 0;
    const double scale = std::max(env.cpi * sigma_max(Matrix(env.Ph * s.B)), 1e-300);
    for (;;) {
        const double tail = env.cpi * sigma_max(Matrix(env.Ph * X));
        if (tail <= best || tail <= 1e-15 * scale) {
            if (cur_f >= prev_f) locals.push_back({prev_t, cur_t, cur_t + h, cur_f});
            break;
        }
        if (++steps > opts.max_steps) throw NumericalError("transient_peak_m0: step cap reached");
        const double hn = st.step_for(t);
        if (hn > 1.5 * h) {
            h = hn;
            E = expm(s.A, h);
        }
        X = E * X;
        t += h;
        const double fn = sigma_max(Matrix(s.C * X));
        ++rep.evaluations;
        if (cur_f >= prev_f && cur_f >= fn) locals.push_back({prev_t, cur_t, t, cur_f});
        prev_t = cur_t;
        prev_f = cur_f;
        cur_t = t;
        cur_f = fn;
        best = std::max(best, fn);
        if (locals.size() > 4 * static_cast<std::size_t>(opts.max_refine)) {
            std::stable_sort(locals.begin(), locals.end(), [](const Local& a, const Local& b) { return a.v > b.v; });
            locals.resize(static_cast<std::size_t>(opts.max_refine));
        }
    }
    std::stable_sort(locals.begin(), locals.end(), [](const Local& a, const Local& b) { return a.v > b.v; });
    if (locals.size() > static_cast<std::size_t>(opts.max_refine)) locals.resize(static_cast<std::size_t>(opts.max_refine));

    double bt = 0.0;
    double bv = f0;
    for (const Local& l : locals) {
        const double a = std::max(0.0, l.a);
        auto [tt, v] = detail::golden_max(f_at, a, l.b, opts.t_tol * (1.0 + l.b));
        if (l.v > v) {
            v = l.v;
            tt = l.t;
        }
        if (v > bv || (v == bv && tt < bt)) {
            bv = v;
            bt = tt;
        }
    }
    rep.value = bv;
    rep.maximizer = bt;
    if (opts.certify) {
        const OracleResult o = oracle_m0(sys);
        rep.certification = Certification{std::min(o.lower, rep.value), std::max(o.upper, rep.value)};
    }
    return rep;
}

NormReport entrywise_kreiss(const StateSpace& sys, const KreissOptions& opts) {
    require_hurwitz(sys.A, "entrywise_kreiss");
    require_strictly_proper(sys, "entrywise_kreiss");
    const Eigen::Index m = sys.outputs();
    const Eigen::Index p = sys.inputs();
    const std::size_t total = static_cast<std::size_t>(m * p);
    std::vector<NormReport> reps(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
        const Eigen::Index i = static_cast<Eigen::Index>(idx) / p;
        const Eigen::Index k = static_cast<Eigen::Index>(idx) % p;
        reps[idx] = kreiss_norm(StateSpace(sys.A, sys.B.col(k), sys.C.row(i)), opts);
    }
    NormReport best;
    best.value = -1.0;
    for (std::size_t idx = 0; idx < total; ++idx) {
        if (reps[idx].value > best.value) {
            best = reps[idx];
            best.channel_row = static_cast<int>(static_cast<Eigen::Index>(idx) / p);
            best.channel_col = static_cast<int>(static_cast<Eigen::Index>(idx) % p);
        }
    }
    std::size_t evals = 0;
    for (const auto& r : reps) evals += r.evaluations;
    best.evaluations = evals;
    best.kind = MaximizerKind::Channel;
    return best;
}

NormReport sign_pattern_kreiss(const StateSpace& sys, const KreissOptions& opts) {
    require_hurwitz(sys.A, "sign_pattern_kreiss");
    const Eigen::Index p = sys.inputs();
    if (p > 16) {
        std::ostringstream os;
        os << "sign_pattern_kreiss: p = " << p << " exceeds the enumeration bound 16";
        throw EnumerationError(os.str());
    }
    // r and -r give the same value: fix r_0 = +1.
    const std::size_t count = p > 0 ? (std::size_t{1} << (p - 1)) : 1;
    NormReport best;
    best.value = -1.0;
    std::size_t evals = 0;
    for (std::size_t mask = 0; mask < count; ++mask) {
        Vector r = Vector::Ones(p);
        for (Eigen::Index j = 1; j < p; ++j)
            if (mask & (std::size_t{1} << (j - 1))) r(j) = -1.0;
        const NormReport rep = kreiss_norm(StateSpace(sys.A, sys.B * r, sys.C), opts);
        evals += rep.evaluations;
        if (rep.value > best.value) {
            best = rep;
            best.sign_vector.assign(static_cast<std::size_t>(p), 1);
            for (Eigen::Index j = 0; j < p; ++j) best.sign_vector[static_cast<std::size_t>(j)] = r(j) > 0 ? 1 : -1;
        }
    }
    best.evaluations = evals;
    return best;
}

namespace {

constexpr int kGaussPoints = 8;
constexpr double kGaussNodes[kGaussPoints] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                              -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                              0.7966664774136267,  0.9602898564975363};
constexpr double kGaussWeights[kGaussPoints] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                                0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                                0.2223810344533745, 0.1012285362903763};

// Integral of |g| on [0, h] for g(tau) = c^T e^{A tau} x, split at sign changes.
double abs_integral_split(const Matrix& A, const Vector& c, const Vector& x, double h) {
    auto g = [&](double tau) { return c.dot(expm(A, tau) * x); };
    constexpr int pieces = 16;
    std::vector<double> knots{0.0};
    double ga = g(0.0);
    for (int k = 1; k <= pieces; ++k) {
        const double tb = h * k / pieces;
        const double gb = g(tb);
        if ((ga < 0.0 && gb > 0.0) || (ga > 0.0 && gb < 0.0)) {
            double lo = h * (k - 1) / pieces;
            double hi = tb;
            double glo = ga;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double gm = g(mid);
                if ((gm < 0.0) == (glo < 0.0)) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            knots.push_back(0.5 * (lo + hi));
        }
        ga = gb;
    }
    knots.push_back(h);
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        const double a = knots[k];
        const double b = knots[k + 1];
        const double half = 0.5 * (b - a);
        for (int q = 0; q < kGaussPoints; ++q)
            sum += half * kGaussWeights[q] * std::abs(g(a + half * (1.0 + kGaussNodes[q])));
    }
    return sum;
}

} // namespace

NormReport peak_gain(const StateSpace& sys, double tol) {
    require_hurwitz(sys.A, "peak_gain");
    const StateSpace s = prepared(sys);
    const Eigen::Index m = s.outputs();
    const Eigen::Index p = s.inputs();
    Matrix integ = Matrix::Zero(m, p);
    NormReport rep;
    rep.kind = MaximizerKind::Channel;
    Vector dsum = s.D.cwiseAbs().rowwise().sum();
    if (s.n() > 0 && m > 0 && p > 0) {
        const Envelope env = make_envelope(s);
        const Stepper st = make_stepper(s.A);
        Vector cn(m);
        for (Eigen::Index i = 0; i < m; ++i) cn(i) = s.C.row(i).norm();
        double h = 0.0;
        Matrix Eh;
        std::vector<Matrix> En(kGaussPoints);
        Matrix X = s.B;
        double t = 0.0;
        std::size_t steps = 0;
        for (;;) {
            double tailmax = 0.0;
            Vector tails = Vector::Zero(m);
            for (Eigen::Index j = 0; j < p; ++j) {
                const Vector xj = X.col(j);
                const double v = std::sqrt(std::max(0.0, xj.dot(env.P * xj)) / env.lmin) * 2.0 * env.lmax;
                for (Eigen::Index i = 0; i < m; ++i) tails(i) += cn(i) * v;
            }
            tailmax = tails.maxCoeff();
            const Vector rows = integ.rowwise().sum() + dsum;
            if (tailmax <= tol * std::max(rows.maxCoeff(), 1e-300) || tailmax <= 1e-300) break;
            if (++steps > 20'000'000) throw NumericalError("peak_gain: step cap reached");
            const double hn = st.step_for(t);
            if (h == 0.0 || hn > 1.5 * h) {
                h = hn;
                Eh = expm(s.A, h);
                for (int q = 0; q < kGaussPoints; ++q) En[static_cast<std::size_t>(q)] = expm(s.A, 0.5 * h * (1.0 + kGaussNodes[q]));
            }
            const Matrix G0 = s.C * X;
            const Matrix Xn = Eh * X;
            const Matrix G1 = s.C * Xn;
            std::vector<Matrix> Gq(kGaussPoints);
            for (int q = 0; q < kGaussPoints; ++q) Gq[static_cast<std::size_t>(q)] = s.C * (En[static_cast<std::size_t>(q)] * X);
            for (Eigen::Index i = 0; i < m; ++i) {
                for (Eigen::Index j = 0; j < p; ++j) {
                    bool pos = false;
                    bool neg = false;
                    auto mark = [&](double v) {
                        if (v > 0.0) pos = true;
                        if (v < 0.0) neg = true;
                    };
                    mark(G0(i, j));
                    mark(G1(i, j));
                    for (const Matrix& G : Gq) mark(G(i, j));
                    if (pos && neg) {
                        integ(i, j) += abs_integral_split(s.A, s.C.row(i).transpose(), X.col(j), h);
                    } else {
                        double acc = 0.0;
                        for (int q = 0; q < kGaussPoints; ++q) acc += kGaussWeights[q] * std::abs(Gq[static_cast<std::size_t>(q)](i, j));
                        integ(i, j) += 0.5 * h * acc;
                    }
                }
            }
            X = Xn;
            t += h;
            ++rep.evaluations;
        }
    }
    const Vector rows = integ.rowwise().sum() + dsum;
    Eigen::Index bi = 0;
    rep.value = m > 0 ? rows.maxCoeff(&bi) : 0.0;
    rep.channel_row = static_cast<int>(bi);
    rep.maximizer = static_cast<double>(bi);
    return rep;
}

HankelData hankel_singular_values(const StateSpace& sys) {
    require_hurwitz(sys.A, "hankel_singular_values");
    sys.validate();
    HankelData h;
    h.Wc = solve_lyapunov(sys.A, sys.B * sys.B.transpose());
    h.Wo = solve_lyapunov(sys.A.transpose(), sys.C.transpose() * sys.C);
    const Matrix R = sqrtm_psd(h.Wc);
    const Matrix M = R * h.Wo * R;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
    const Vector l = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    h.sigma = l.reverse();
    return h;
}

double l2_to_peak(const StateSpace& sys) {
    require_hurwitz(sys.A, "l2_to_peak");
    if (!sys.strictly_proper()) throw PreconditionError("l2_to_peak: D != 0, the L2-to-peak norm is undefined");
    const Matrix Q = solve_lyapunov(sys.A, sys.B * sys.B.transpose());
    return lambda_max_sym(sys.C * Q * sys.C.transpose());
}

} // namespace kreisslab
