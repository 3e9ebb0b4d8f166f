#include "kreisslab/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "kreisslab/errors.hpp"
#include "kreisslab/parallel.hpp"
#include "kreisslab/subdiff.hpp"

namespace kreisslab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMargin = 1e-6;
constexpr std::size_t kGroupCap = 6;

double pos(double v) { return v > 0.0 ? v : 0.0; }

} // namespace

ControllerStructure ControllerStructure::parse(const std::string& s) {
    ControllerStructure c;
    if (s == "static") {
        c.kind = Kind::Static;
    } else if (s == "statefb") {
        c.kind = Kind::StateFeedback;
    } else if (s.rfind("of:", 0) == 0) {
        c.kind = Kind::OutputFeedback;
        try {
            std::size_t used = 0;
            c.order = std::stoi(s.substr(3), &used);
            if (used != s.size() - 3) throw std::invalid_argument(s);
        } catch (const std::exception&) {
            throw PreconditionError("controller structure: bad order in '" + s + "'");
        }
        if (c.order < 0) throw PreconditionError("controller structure: negative order");
    } else {
        throw PreconditionError("controller structure: unknown '" + s + "' (static | statefb | of:<nK>)");
    }
    return c;
}

std::string ControllerStructure::to_string() const {
    switch (kind) {
    case Kind::Static: return "static";
    case Kind::StateFeedback: return "statefb";
    case Kind::OutputFeedback: return "of:" + std::to_string(order);
    }
    return "static";
}

Plant structured_plant(const Plant& plant, const ControllerStructure& structure) {
    Plant p = plant;
    if (structure.kind == ControllerStructure::Kind::StateFeedback) p.Cy = Matrix::Identity(plant.n(), plant.n());
    p.validate();
    return p;
}

NormReport worst_case_delta(const ClosedLoop& cl, const KreissOptions& opts) {
    const double a = spectral_abscissa(cl.A_cl);
    if (!(a < 0.0)) {
        const double witness = a > 0.0 ? 2.0 / (1.0 + a) : 2.0;
        std::ostringstream os;
        os << "worst_case_delta: family member unstable at eta = " << witness;
        throw StabilityError(os.str(), witness);
    }
    return kreiss_norm(cl.performance(), opts);
}

double rolloff_norm(const Plant& plant, const ControllerRealization& K, const StateSpace& W) {
    const ClosedLoop cl = assemble_closed_loop(plant, K);
    require_hurwitz(cl.A_cl, "rolloff_norm: closed loop");
    require_hurwitz(W.A, "rolloff_norm: weight");
    return hinf_norm(weighted_complementary_sensitivity(plant, K, W)).value;
}

ConstraintReport evaluate_constraints(const SynthesisSpec& spec, const ControllerRealization& K) {
    ConstraintReport r;
    const ClosedLoop cl = assemble_closed_loop(spec.plant, K);
    r.alpha = spectral_abscissa(cl.A_cl);
    r.alpha_residual = r.alpha + spec.eta_rate;
    r.alpha_ok = r.alpha_residual <= 1e-8;
    r.family_stable = r.alpha < 0.0;
    if (spec.W) {
        if (r.family_stable) {
            r.rolloff = rolloff_norm(spec.plant, K, *spec.W);
            r.rolloff_residual = *r.rolloff - 1.0;
            r.rolloff_ok = r.rolloff_residual <= 1e-8;
        } else {
            r.rolloff = kInf;
            r.rolloff_residual = kInf;
            r.rolloff_ok = false;
        }
    }
    return r;
}

namespace {

struct Problem {
    Plant plant;
    double eta_rate = 0.0;
    const StateSpace* W = nullptr;
    ControllerRealization proto;
    KreissOptions kopts;
};

struct Point {
    Vector theta;
    bool stable = false;
    double alpha = kInf;
    double kreiss = kInf;
    double rolloff = 0.0;
    double phi = kInf;
    ClosedLoop cl;
    NormReport rep;
    ControllerRealization K;
};

ControllerRealization with_theta(const Problem& pb, const Vector& th) {
    ControllerRealization K = pb.proto;
    K.set_theta(th);
    return K;
}

// Stabilization objective when kreiss_on is false; penalized Kreiss otherwise.
Point evaluate(const Problem& pb, const Vector& th, bool kreiss_on, double rho) {
    Point p;
    p.theta = th;
    if (!th.allFinite()) return p;
    p.K = with_theta(pb, th);
    p.cl = assemble_closed_loop(pb.plant, p.K);
    p.alpha = spectral_abscissa(p.cl.A_cl);
    if (!kreiss_on) {
        p.stable = p.alpha < 0.0;
        p.phi = p.alpha;
        return p;
    }
    if (!(p.alpha < -1e-10)) return p;
    p.stable = true;
    try {
        p.rep = kreiss_norm(p.cl.performance(), pb.kopts);
        p.kreiss = p.rep.value;
        if (pb.W) p.rolloff = hinf_norm(weighted_complementary_sensitivity(pb.plant, p.K, *pb.W), 1e-9).value;
    } catch (const Error&) {
        p.stable = false;
        p.phi = kInf;
        return p;
    }
    p.phi = p.kreiss + rho * (pos(p.alpha + pb.eta_rate + kMargin) + (pb.W ? pos(p.rolloff - 1.0 + kMargin) : 0.0));
    if (!std::isfinite(p.phi)) p.phi = kInf;
    return p;
}

std::vector<Vector> alpha_gradients(const Point& p, double rel_tol) {
    const Matrix& A = p.cl.A_cl;
    Eigen::ComplexEigenSolver<CMatrix> es(A.cast<cplx>());
    const CMatrix V = es.eigenvectors();
    const CVector lam = es.eigenvalues();
    const CMatrix W = V.inverse();
    std::vector<Vector> out;
    const double thr = p.alpha - rel_tol * std::max(1.0, std::abs(p.alpha));
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (lam(i).real() < thr) continue;
        if (lam(i).imag() < -1e-12) continue; // conjugate pair gives the same real-part gradient
        const CVector l = (W.row(i) * p.cl.Bt.cast<cplx>()).transpose();
        const CVector r = p.cl.Ct.cast<cplx>() * V.col(i);
        const Matrix g = (l * r.transpose()).real();
        if (g.allFinite()) out.push_back(p.K.mask_gradient(g));
    }
    return out;
}

std::vector<Vector> rolloff_gradients(const Problem& pb, const Point& p) {
    const StateSpace wt = weighted_complementary_sensitivity(pb.plant, p.K, *pb.W);
    const Eigen::Index N = p.cl.A_cl.rows();
    const Eigen::Index Nt = wt.n();
    const Eigen::Index m = pb.plant.measurements();
    const Eigen::Index nK = p.K.order();
    Matrix Bt = Matrix::Zero(Nt, p.cl.Bt.cols());
    Bt.topRows(N) = p.cl.Bt;
    Matrix Ct = Matrix::Zero(p.cl.Ct.rows(), Nt);
    Ct.leftCols(N) = p.cl.Ct;
    Matrix E = Matrix::Zero(nK + m, m);
    E.bottomRows(m) = Matrix::Identity(m, m);
    std::vector<Vector> out;
    for (double w : hinf_peak_frequencies(wt, p.rolloff, 1e-6)) {
        const Matrix g = sigma_gradient_theta(wt.A, wt.B, wt.C, cplx(0.0, w), Bt, Ct, &E);
        if (g.allFinite()) out.push_back(p.K.mask_gradient(g));
    }
    return out;
}

std::vector<Vector> cap_group(std::vector<Vector> g) {
    if (g.size() > kGroupCap) g.resize(kGroupCap);
    return g;
}

// Minkowski sum of hulls: conv(A) + conv(B) = conv({a + b}).
std::vector<Vector> minkowski(const std::vector<Vector>& a, const std::vector<Vector>& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    std::vector<Vector> out;
    out.reserve(a.size() * b.size());
    for (const Vector& x : a)
        for (const Vector& y : b) out.push_back(x + y);
    return out;
}

std::vector<Vector> scaled(std::vector<Vector> g, double s, bool with_zero) {
    for (Vector& v : g) v *= s;
    if (with_zero && !g.empty()) g.push_back(Vector::Zero(g.front().size()));
    return g;
}

// Generators of an enlarged Clarke subdifferential of the current objective.
std::vector<Vector> bundle(const Problem& pb, const Point& p, bool kreiss_on, double rho, double eps_act) {
    const Eigen::Index d = p.theta.size();
    if (!kreiss_on) {
        auto g = alpha_gradients(p, eps_act);
        if (g.empty()) g.push_back(Vector::Zero(d));
        return cap_group(g);
    }
    std::vector<Vector> gk = cap_group(kreiss_subgradient(p.cl, p.K, p.rep).gradients);
    if (gk.empty()) gk.push_back(Vector::Zero(d));
    const double ca = p.alpha + pb.eta_rate + kMargin;
    const double scale_a = eps_act * std::max(1.0, std::abs(p.alpha));
    if (ca > -scale_a) {
        auto ga = cap_group(alpha_gradients(p, eps_act));
        gk = minkowski(gk, scaled(ga, rho, ca <= 0.0));
    }
    if (pb.W) {
        const double cw = p.rolloff - 1.0 + kMargin;
        if (cw > -eps_act) {
            auto gw = cap_group(rolloff_gradients(pb, p));
            gk = minkowski(gk, scaled(gw, rho, cw <= 0.0));
        }
    }
    return gk;
}

struct DescentStats {
    int iterations = 0;
    std::vector<double> accepted;
};

// Nonsmooth BFGS with bundled enlarged subdifferentials, Armijo backtracking
// with expansion, and gradient sampling when the line search stalls.
Point descend(const Problem& pb, Point x, bool kreiss_on, double rho, int max_iter, double target, double gtol,
              std::mt19937_64& rng, DescentStats& stats) {
    const Eigen::Index d = x.theta.size();
    if (d == 0) return x;
    Matrix H = Matrix::Identity(d, d);
    double eps_act = kreiss_on ? 1e-3 : 1e-3;
    double radius = 1e-2 * std::max(1.0, x.theta.norm());
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector g_prev;
    stats.accepted.push_back(x.phi);
    for (int it = 0; it < max_iter; ++it) {
        if (x.phi <= target) break;
        ++stats.iterations;
        std::vector<Vector> gens = bundle(pb, x, kreiss_on, rho, eps_act);
        Vector g = min_norm_element(gens, H);
        bool moved = false;
        for (int attempt = 0; attempt < 4 && !moved; ++attempt) {
            const double gHg = g.dot(H * g);
            if (!(gHg > gtol * gtol)) {
                if (attempt == 0 && eps_act > 1e-7) {
                    eps_act *= 0.1;
                    gens = bundle(pb, x, kreiss_on, rho, eps_act);
                    g = min_norm_element(gens, H);
                    continue;
                }
                break;
            }
            const Vector dir = -(H * g);
            double t = 1.0;
            Point best;
            bool ok = false;
            for (int ls = 0; ls < 40; ++ls) {
                Point y = evaluate(pb, x.theta + t * dir, kreiss_on, rho);
                if (y.phi <= x.phi - 1e-4 * t * gHg && std::isfinite(y.phi)) {
                    best = std::move(y);
                    ok = true;
                    break;
                }
                t *= 0.5;
            }
            if (ok && t == 1.0) {
                for (int ex = 0; ex < 12; ++ex) {
                    Point y = evaluate(pb, x.theta + 2.0 * t * dir, kreiss_on, rho);
                    if (!(y.phi < best.phi)) break;
                    t *= 2.0;
                    best = std::move(y);
                }
            }
            if (ok) {
                std::vector<Vector> gn_gens = bundle(pb, best, kreiss_on, rho, eps_act);
                const Vector gn = min_norm_element(gn_gens, H);
                const Vector s = best.theta - x.theta;
                const Vector yv = gn - g;
                const double sy = s.dot(yv);
                if (sy > 1e-12 * s.norm() * yv.norm() && sy > 0.0) {
                    const double r = 1.0 / sy;
                    const Matrix I = Matrix::Identity(d, d);
                    H = (I - r * s * yv.transpose()) * H * (I - r * yv * s.transpose()) + r * s * s.transpose();
                    H = (0.5 * (H + H.transpose())).eval();
                }
                x = std::move(best);
                stats.accepted.push_back(x.phi);
                moved = true;
                break;
            }
            // Stalled: reset the metric and enrich the bundle by sampling nearby points.
            H = Matrix::Identity(d, d);
            for (int k = 0; k <= d; ++k) {
                Vector z = x.theta;
                for (Eigen::Index j = 0; j < d; ++j) z(j) += radius * normal(rng);
                const Point pz = evaluate(pb, z, kreiss_on, rho);
                if (!std::isfinite(pz.phi)) continue;
                const std::vector<Vector> gz = bundle(pb, pz, kreiss_on, rho, eps_act);
                gens.push_back(min_norm_element(gz));
            }
            g = min_norm_element(gens, H);
            radius *= 0.1;
        }
        if (!moved) break;
    }
    return x;
}

Vector random_theta(const Problem& pb, std::mt19937_64& rng, double scale) {
    std::normal_distribution<double> normal(0.0, scale);
    ControllerRealization K = pb.proto;
    Matrix T = K.Theta();
    const Eigen::Index nK = K.order();
    for (Eigen::Index i = 0; i < T.rows(); ++i)
        for (Eigen::Index j = 0; j < T.cols(); ++j) T(i, j) = normal(rng);
    // Start the controller dynamics stable.
    for (Eigen::Index i = 0; i < nK; ++i) T(i, i) = -std::abs(T(i, i)) - 0.1;
    K.set_Theta(T);
    return K.theta();
}

struct RestartOutcome {
    RestartRecord record;
    Vector theta;
};

RestartOutcome run_restart(const Problem& pb, const SynthesisOptions& opt, std::uint64_t seed) {
    RestartOutcome out;
    out.record.seed = seed;
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    std::mt19937_64 rng(seq);
    Vector th = random_theta(pb, rng, opt.init_scale);
    const double stab_target = -std::max(0.5 * pb.eta_rate, 1e-3);
    DescentStats st;
    Point x = evaluate(pb, th, false, 0.0);
    if (x.phi > stab_target) x = descend(pb, x, false, 0.0, opt.stabilization_iter, stab_target, 1e-12, rng, st);
    out.record.iterations = st.iterations;
    if (!(x.alpha < 0.0)) {
        out.theta = x.theta;
        out.record.kreiss = kInf;
        out.record.penalized = kInf;
        return out;
    }
    out.record.stabilized = true;
    double rho = 1.0;
    Point y = evaluate(pb, x.theta, true, 0.0);
    rho = 10.0 * std::max(1.0, y.kreiss);
    y = evaluate(pb, x.theta, true, rho);
    double prev_violation = kInf;
    for (int phase = 0; phase <= opt.penalty_doublings; ++phase) {
        DescentStats ds;
        y = descend(pb, y, true, rho, opt.max_iter, -kInf, opt.stationarity_tol, rng, ds);
        out.record.iterations += ds.iterations;
        for (double v : ds.accepted) out.record.history.emplace_back(rho, v);
        const double viol =
            pos(y.alpha + pb.eta_rate + kMargin) + (pb.W ? pos(y.rolloff - 1.0 + kMargin) : 0.0);
        if (viol <= 0.0) break;
        if (viol < 0.5 * prev_violation && phase > 0) {
            prev_violation = viol;
            continue;
        }
        prev_violation = viol;
        rho *= 2.0;
        y = evaluate(pb, y.theta, true, rho);
    }
    out.theta = y.theta;
    out.record.kreiss = y.kreiss;
    out.record.penalized = y.phi;
    out.record.feasible =
        y.stable && y.alpha + pb.eta_rate <= 1e-8 && (!pb.W || y.rolloff - 1.0 <= 1e-8);
    return out;
}

} // namespace

SynthesisResult minimize_kreiss(const SynthesisSpec& spec, const ControllerStructure& structure) {
    if (spec.eta_rate < 0.0) throw PreconditionError("minimize_kreiss: eta_rate must be >= 0");
    if (spec.W) {
        spec.W->validate();
        require_hurwitz(spec.W->A, "minimize_kreiss: roll-off weight");
    }
    const SynthesisOptions& opt = spec.options;
    if (opt.restarts < 1) throw PreconditionError("minimize_kreiss: restarts must be >= 1");
    Problem pb;
    pb.plant = structured_plant(spec.plant, structure);
    pb.eta_rate = spec.eta_rate;
    pb.W = spec.W ? &*spec.W : nullptr;
    const Eigen::Index nK = structure.kind == ControllerStructure::Kind::OutputFeedback ? structure.order : 0;
    pb.proto = ControllerRealization::zeros(nK, pb.plant.inputs(), pb.plant.measurements());
    pb.kopts.grid_points = opt.grid_points;
    pb.kopts.eta_tol = 1e-8;
    pb.kopts.hinf_tol = 1e-9;
    pb.kopts.max_refine = 4;
    pb.kopts.active_tol = 1e-3;

    const auto R = static_cast<std::size_t>(opt.restarts);
    std::vector<RestartOutcome> outcomes(R);
    parallel_for(R, [&](std::size_t i) { outcomes[i] = run_restart(pb, opt, opt.seed + i); });

    std::size_t best = R;
    for (std::size_t i = 0; i < R; ++i) {
        const RestartRecord& r = outcomes[i].record;
        if (!r.stabilized) continue;
        if (best == R) {
            best = i;
            continue;
        }
        const RestartRecord& b = outcomes[best].record;
        if (r.feasible != b.feasible) {
            if (r.feasible) best = i;
            continue;
        }
        const double rv = r.feasible ? r.kreiss : r.penalized;
        const double bv = b.feasible ? b.kreiss : b.penalized;
        if (rv < bv) best = i;
    }
    if (best == R) {
        std::ostringstream os;
        os << "minimize_kreiss: no stabilizing controller found in " << R << " restarts";
        throw SynthesisError(os.str());
    }

    SynthesisResult res;
    for (auto& o : outcomes) res.restarts.push_back(o.record);
    res.best_restart = best;
    res.controller = with_theta(pb, outcomes[best].theta);
    SynthesisSpec sspec = spec;
    sspec.plant = pb.plant;
    res.constraints = evaluate_constraints(sspec, res.controller);
    const ClosedLoop cl = assemble_closed_loop(pb.plant, res.controller);
    res.kreiss = worst_case_delta(cl);
    res.oracle = oracle_kreiss(cl.performance());
    res.oracle_rel_gap = std::abs(res.kreiss.value - res.oracle.value) / std::max(res.oracle.value, 1e-300);
    res.certified = res.oracle_rel_gap <= 1e-3 && res.kreiss.value <= res.oracle.upper * (1.0 + 1e-9) &&
                    res.kreiss.value >= res.oracle.lower * (1.0 - 1e-9);
    res.kreiss.certification = Certification{res.oracle.lower, res.oracle.upper};
    return res;
}

} // namespace kreisslab
