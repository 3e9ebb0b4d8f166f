// Acceptance runner: one line per criterion. Exit status is 0 when the set of
// failing criteria equals the set given with --expect-fail (default: none).
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "kreisslab/certify.hpp"
#include "kreisslab/errors.hpp"
#include "kreisslab/io.hpp"
#include "kreisslab/lmi.hpp"
#include "kreisslab/oracle.hpp"
#include "kreisslab/synthesis.hpp"
#include "kreisslab/sysnorms.hpp"
#include "test_support.hpp"

using namespace kreisslab;
namespace kt = kreisslab::testing;

namespace {

enum class Outcome { Pass, Fail, Skip };

struct Verdict {
    Outcome outcome = Outcome::Pass;
    std::ostringstream detail;

    void check(bool ok, const std::string& what) {
        if (!ok) outcome = Outcome::Fail;
        if (detail.tellp() > 0) detail << "; ";
        detail << what << (ok ? "" : " [out of tolerance]");
    }
};

std::string num(double v, int prec = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

bool near(double v, double target, double tol) { return std::abs(v - target) <= tol; }

ProblemFile problem(const std::string& name) { return load_problem(kt::problem_path(name)); }

ClosedLoop closed_loop(const ProblemFile& pf) { return assemble_closed_loop(pf.linear_plant(), *pf.controller); }

double max_norm(const Trajectory& tr) {
    double s = 0.0;
    for (const auto& x : tr.x) s = std::max(s, x.norm());
    return s;
}

void c1(Verdict& v) {
    const StateSpace g = *problem("example3").system;
    const double k = kreiss_norm(g).value, m = transient_peak_m0(g).value;
    v.check(near(k, 0.1716, 0.002), "kreiss " + num(k));
    v.check(near(m, 0.25, 0.002), "M0 " + num(m));
}

void c2(Verdict& v) {
    const StateSpace g = *problem("example3_eps").system;
    const double cb = cb_lower_bound(g), k = kreiss_norm(g).value, m = transient_peak_m0(g).value;
    v.check(cb == 0.25, "sigma(CB) " + num(cb, 17));
    v.check(near(k, 0.3006, 0.003), "kreiss " + num(k));
    v.check(near(m, 0.3333, 0.002), "M0 " + num(m));
}

void c3(Verdict& v) {
    const StateSpace g = *problem("example4").system;
    const Matrix A = problem("example4_matrix").system->A;
    const double k = kreiss_norm(g).value, m = transient_peak_m0(g).value;
    const double kA = kreiss_matrix(A).value;
    const double mA = transient_peak_m0(StateSpace(A, Matrix::Identity(3, 3), Matrix::Identity(3, 3))).value;
    v.check(near(k, 1.0, 0.01), "kreiss " + num(k));
    v.check(near(m, 1.0, 0.01), "M0 " + num(m));
    v.check(near(kA, 1.17, 0.02), "K(A) " + num(kA));
    v.check(near(mA, 1.43, 0.02), "M0(A) " + num(mA) + " (target 1.43)");
}

void c4(Verdict& v) {
    const StateSpace g = *problem("example8").system;
    const double cb = cb_lower_bound(g), k = kreiss_norm(g).value, m = transient_peak_m0(g).value;
    v.check(near(cb, 1.0577, 1e-3), "sigma(CB) " + num(cb));
    v.check(near(k, 1.9634, 0.02), "kreiss " + num(k));
    v.check(near(m, 2.5226, 0.02), "M0 " + num(m));
}

StateSpace random_case(std::mt19937_64& rng, int max_n) {
    std::uniform_int_distribution<int> dn(1, max_n), dio(1, 3);
    const int n = dn(rng);
    return kt::random_system(rng, n, dio(rng), dio(rng));
}

void c5(Verdict& v) {
    std::mt19937_64 rng(20240501);
    int violations = 0, oracle_mismatch = 0;
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const StateSpace g = random_case(rng, 6);
        const double K = kreiss_norm(g).value;
        const double M = transient_peak_m0(g).value;
        const OracleResult o = oracle_m0(g, 20000);
        if (M < o.value * (1 - 1e-9) || M > o.upper * (1 + 1e-9)) ++oracle_mismatch;
        const double en = std::exp(1.0) * static_cast<double>(g.n());
        if (K > M + 1e-6 || M > en * K + 1e-6) ++violations;
        worst = std::max(worst, M / (en * K));
    }
    v.check(violations == 0, "sandwich violations " + std::to_string(violations) + "/100, max M0/(enK) " + num(worst, 4));
    v.check(oracle_mismatch == 0, "M0 outside oracle bracket " + std::to_string(oracle_mismatch) + "/100");
}

void c6(Verdict& v) {
    std::mt19937_64 rng(20240502);
    int lower = 0, upper = 0, hankel = 0;
    for (int k = 0; k < 100; ++k) {
        const StateSpace g = random_case(rng, 6);
        const double n = static_cast<double>(g.n()), p = static_cast<double>(g.inputs()),
                     m = static_cast<double>(g.outputs());
        const double h = hinf_norm(g).value;
        const double pk = peak_gain(g).value;
        const double sh = hankel_singular_values(g).sigma.sum();
        // equality holds for single-signed SISO impulse responses; slack covers solver tolerances
        if (pk < h / std::sqrt(m) * (1 - 1e-6)) ++lower;
        if (pk > (2 * n + 1) * std::sqrt(p) * h * (1 + 1e-6)) ++upper;
        if (pk > 2 * std::sqrt(p) * sh * (1 + 1e-6)) ++hankel;
    }
    v.check(lower + upper + hankel == 0, "violations lower " + std::to_string(lower) + ", upper " +
                                             std::to_string(upper) + ", Hankel " + std::to_string(hankel) + " of 100");
}

void c7(Verdict& v) {
    const ProblemFile k1 = problem("brunton_k1");
    const ClosedLoop cl1 = closed_loop(k1);
    const double kr = worst_case_delta(cl1).value;
    const double peak = transient_peak_m0(cl1.performance()).value;
    const double a1 = spectral_abscissa(cl1.A_cl);
    const double wt1 = rolloff_norm(k1.linear_plant(), *k1.controller, *k1.W);
    v.check(near(kr, 1.005, 0.02), "1st-order kreiss " + num(kr));
    v.check(near(peak, 1.10, 0.03), "transient peak " + num(peak));
    v.check(near(a1, -0.393, 0.02), "alpha " + num(a1));
    v.check(wt1 <= 1.0, "||WT|| " + num(wt1));

    const ProblemFile ks = problem("brunton_static");
    const double as = spectral_abscissa(closed_loop(ks).A_cl);
    const double wts = rolloff_norm(ks.linear_plant(), *ks.controller, *ks.W);
    v.check(near(wts, 20.03, 0.5), "static ||WT|| " + num(wts));
    v.check(near(as, -1.99e-4, 1e-4), "static alpha " + num(as));

    const double a3 = spectral_abscissa(closed_loop(problem("brunton_k3")).A_cl);
    v.check(near(a3, -0.811, 0.03), "3rd-order alpha " + num(a3));
}

const std::vector<std::string> kSuffixes = {"kreiss_dyn", "kreiss_sf", "kreiss_x", "kreiss_y",
                                            "qc_dyn",     "qc_sf",     "qc_x",     "qc_y"};

int qc_failures(const std::string& prefix, std::vector<std::string>& failed) {
    int bad = 0;
    for (const auto& s : kSuffixes) {
        const ProblemFile pf = problem(prefix + s);
        const QcCertificate c = qc_analysis(closed_loop(pf), pf.options.epsilon.value_or(1e-3));
        if (!c.feasible) {
            ++bad;
            failed.push_back(s);
        }
    }
    return bad;
}

void c8(Verdict& v) {
    for (int i = 0; i < 4; ++i) {
        const ClosedLoop cl = closed_loop(problem("lorenz28_" + kSuffixes[i]));
        const double k = worst_case_delta(cl).value;
        const double m = transient_peak_m0(cl.performance()).value;
        v.check(near(k, 1.0, 0.01) && near(m, 1.0, 0.01), kSuffixes[i] + " kreiss " + num(k) + " M0 " + num(m));
    }
    std::vector<std::string> failed;
    const int bad = qc_failures("lorenz28_", failed);
    std::string list;
    for (const auto& f : failed) list += " " + f;
    v.check(bad == 0, "qc passes " + std::to_string(8 - bad) + "/8" + list);
}

void c9(Verdict& v) {
    std::vector<std::string> failed;
    const int bad = qc_failures("lorenz10_", failed);
    std::string list;
    for (const auto& f : failed) list += " " + f;
    v.check(bad == 0, "qc passes " + std::to_string(8 - bad) + "/8" + list);
    const NonlinearModel m = kt::lorenz_with(10, kt::row({1, 0, 0}));
    const Plant& p = m.plant();
    const ExistenceResult e = of_existence(p.A, p.Bu, p.Cy, m.n_phi());
    v.check(e.status == LmiStatus::Feasible && e.max_order <= 1,
            std::string("of_existence ") + to_string(e.status) + ", max_order " + std::to_string(e.max_order));
}

void c10(Verdict& v) {
    const ProblemFile lz = problem("lorenz28_qc_x");
    const Trajectory a = simulate_closed_loop(*lz.model, *lz.controller, *lz.options.x0, 15.0, 40.0);
    const double xf = a.final_state().norm();
    v.check(!a.diverged && xf <= 1e-6, "Lorenz K = -27.01 ||x(40)|| " + num(xf, 3));

    const ProblemFile br = problem("brunton_k1");
    IntegratorOptions o;
    o.output_dt = 0.1;
    const Trajectory b = simulate_closed_loop(*br.model, *br.controller, *br.options.x0, 50.0, 120.0, o);
    const double r0 = std::sqrt(0.1);
    double tail = 0.0;
    for (std::size_t k = 0; k < b.t.size(); ++k)
        if (b.t[k] >= 100.0) tail = std::max(tail, b.x[k].norm());
    const double bf = b.final_state().norm();
    v.check(!b.diverged && bf <= 1e-6 && tail < 0.1 * r0,
            "Brunton 1st order ||x(120)|| " + num(bf, 3) + ", max ||x|| on [100, 120] " + num(tail, 3));
}

void c11(Verdict& v) {
    const ProblemFile br = problem("brunton_synth");
    SynthesisSpec spec;
    spec.plant = br.linear_plant();
    spec.eta_rate = br.eta_rate;
    spec.W = br.W;
    spec.options.restarts = 10;
    spec.options.seed = br.options.seed.value_or(1);
    const SynthesisResult rb = minimize_kreiss(spec, ControllerStructure::parse("of:1"));
    v.check(rb.kreiss.value <= 1.05 && rb.constraints.all_ok(),
            "Brunton of:1 kreiss " + num(rb.kreiss.value) + ", alpha " + num(rb.constraints.alpha) + ", ||WT|| " +
                num(rb.constraints.rolloff.value_or(0.0)));
    v.check(rb.oracle_rel_gap <= 1e-3, "oracle " + num(rb.oracle.value) + " (rel gap " + num(rb.oracle_rel_gap, 2) + ")");

    const ProblemFile lz = problem("lorenz_synth");
    SynthesisSpec ls;
    ls.plant = lz.linear_plant();
    ls.options.restarts = 10;
    ls.options.seed = lz.options.seed.value_or(1);
    const SynthesisResult rl = minimize_kreiss(ls, ControllerStructure::parse("static"));
    v.check(rl.kreiss.value <= 1.02 && rl.constraints.all_ok(),
            "Lorenz static kreiss " + num(rl.kreiss.value) + " at K = " + num(rl.controller.DK(0, 0)));
    v.check(rl.oracle_rel_gap <= 1e-3, "oracle " + num(rl.oracle.value) + " (rel gap " + num(rl.oracle_rel_gap, 2) + ")");
}

void c12(Verdict& v) {
    const Brunton2Params p;
    const GainWindow w = static_gain_window(p);
    v.check(w.lower == -2.0 && w.upper == -0.2 && w.lower_open && w.upper_open,
            "window (" + num(w.lower) + ", " + num(w.upper) + ")");

    const ProblemFile py = problem("brunton_yorke");
    const PolyCertificate& cert = *py.certificate;
    const YorkeReport y = yorke_sample_check(cert, closed_loop_field(*py.model, cert.controller), 100000,
                                             py.options.seed.value_or(1));
    v.check(y.pass, "Yorke " + std::to_string(y.violations) + " violations in " + std::to_string(y.samples) +
                        " samples (min -dV/dt " + num(y.min_margin, 3) + ")");

    const BoundednessReport b = boundedness_bound(p, cert.controller);
    const NonlinearModel m = NonlinearModel::brunton2(p);
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    IntegratorOptions o;
    o.output_dt = 0.05;
    int exceed = 0;
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const double r = b.bound * std::sqrt(u(rng));
        const double a = 2 * M_PI * u(rng);
        Vector x0(2);
        x0 << r * std::cos(a), r * std::sin(a);
        const double s = max_norm(simulate_closed_loop(m, cert.controller, x0, 0.0, 60.0, o));
        worst = std::max(worst, s);
        if (s > b.bound) ++exceed;
    }
    v.check(exceed == 0, "bound " + num(b.bound, 4) + " vs max simulated radius " + num(worst, 4) + " (" +
                             std::to_string(exceed) + "/100 exceed)");
}

void c13(Verdict& v) {
    const std::string cfg = kt::data_path("config/brunton4.json");
    if (load_brunton4(cfg).placeholder) {
        v.outcome = Outcome::Skip;
        v.detail << "config/brunton4.json holds placeholder parameters; supply the external data set to run";
        return;
    }
    const double k = worst_case_delta(closed_loop(problem("brunton4_kreiss"))).value;
    const double m = worst_case_delta(closed_loop(problem("brunton4_mixed"))).value;
    v.check(near(k, 1.004, 0.01), "Kreiss-designed " + num(k));
    v.check(near(m, 1.54, 0.03), "mixed-sensitivity " + num(m));
}

struct Criterion {
    int id;
    double budget_s;
    std::function<void(Verdict&)> run;
};

std::set<int> parse_ids(const std::string& s) {
    std::set<int> ids;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) ids.insert(std::stoi(tok));
    return ids;
}

} // namespace

int main(int argc, char** argv) {
    std::set<int> expect_fail, only;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--expect-fail" && i + 1 < argc) expect_fail = parse_ids(argv[++i]);
        else if (a == "--only" && i + 1 < argc) only = parse_ids(argv[++i]);
        else {
            std::fprintf(stderr, "usage: acceptance [--only 1,2] [--expect-fail 3]\n");
            return 2;
        }
    }

    const std::vector<Criterion> all = {{1, 5, c1},   {2, 5, c2},    {3, 10, c3},   {4, 10, c4},  {5, 120, c5},
                                        {6, 120, c6}, {7, 60, c7},   {8, 120, c8},  {9, 60, c9},  {10, 30, c10},
                                        {11, 600, c11}, {12, 120, c12}, {13, 60, c13}};
    std::set<int> failed;
    for (const auto& c : all) {
        if (!only.empty() && !only.count(c.id)) continue;
        Verdict v;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.run(v);
        } catch (const std::exception& e) {
            v.outcome = Outcome::Fail;
            v.detail << (v.detail.tellp() > 0 ? "; " : "") << "exception: " << e.what();
        }
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (v.outcome != Outcome::Skip && dt > c.budget_s) {
            v.outcome = Outcome::Fail;
            v.detail << "; runtime over " << c.budget_s << " s";
        }
        const char* tag = v.outcome == Outcome::Pass ? "PASS" : v.outcome == Outcome::Fail ? "FAIL" : "SKIP";
        std::printf("criterion %2d: %s  %s  (%.2f s)\n", c.id, tag, v.detail.str().c_str(), dt);
        std::fflush(stdout);
        if (v.outcome == Outcome::Fail) failed.insert(c.id);
    }

    bool ok = true;
    for (int id : failed)
        if (!expect_fail.count(id)) ok = false;
    for (int id : expect_fail) {
        if (!only.empty() && !only.count(id)) continue;
        if (!failed.count(id)) {
            std::printf("criterion %d was expected to fail but passed\n", id);
            ok = false;
        }
    }
    std::printf("summary: %zu failing criteria%s\n", failed.size(), ok ? " (all expected)" : "");
    return ok ? 0 : 1;
}
