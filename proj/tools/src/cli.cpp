#include "kreisslab_cli/cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "kreisslab/certify.hpp"
#include "kreisslab/errors.hpp"
#include "kreisslab/io.hpp"
#include "kreisslab/lmi.hpp"
#include "kreisslab/models.hpp"
#include "kreisslab/oracle.hpp"
#include "kreisslab/parallel.hpp"
#include "kreisslab/synthesis.hpp"
#include "kreisslab/sysnorms.hpp"

#ifndef KREISSLAB_VERSION
#define KREISSLAB_VERSION "0.0.0"
#endif

namespace kreisslab::cli {

namespace {

using nlohmann::json;

json to_json(const Matrix& M) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        json r = json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j) r.push_back(M(i, j));
        rows.push_back(r);
    }
    return rows;
}

json to_json(const Vector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

json to_json(const ControllerRealization& K) {
    return {{"AK", to_json(K.AK)}, {"BK", to_json(K.BK)}, {"CK", to_json(K.CK)}, {"DK", to_json(K.DK)}};
}

json to_json(const OracleResult& o) {
    return {{"value", o.value}, {"lower", o.lower}, {"upper", o.upper}, {"argmax", o.argmax},
            {"argmax2", o.argmax2}, {"grid_points", o.grid_points}, {"grid", o.grid}};
}

std::string fmt(double v, int prec = 6) {
    std::ostringstream os;
    os << std::setprecision(prec) << v;
    return os.str();
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

// Report bodies are deterministic; run metadata goes to <report>.meta.json.
void write_report(const std::string& path, const json& body, const std::vector<std::string>& args) {
    if (path.empty()) return;
    std::ofstream out(path);
    if (!out) throw SchemaError("cannot write report " + path);
    out << body.dump(2) << '\n';
    std::string meta = path;
    if (meta.size() > 5 && meta.compare(meta.size() - 5, 5, ".json") == 0) meta.resize(meta.size() - 5);
    meta += ".meta.json";
    std::ofstream m(meta);
    if (!m) throw SchemaError("cannot write report metadata " + meta);
    json j = {{"generated_at", utc_now()},
              {"tool_version", KREISSLAB_VERSION},
              {"command", args},
              {"threads", thread_count()}};
    m << j.dump(2) << '\n';
}

Vector parse_vector(const std::string& s) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw SchemaError("cannot parse vector '" + s + "'");
        }
    }
    Vector x(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) x(static_cast<Eigen::Index>(i)) = v[i];
    return x;
}

struct Target {
    StateSpace sys;
    bool matrix_only = false;
    std::string source;
};

Target analysis_target(const ProblemFile& pf) {
    Target t;
    if (pf.system) {
        t.sys = *pf.system;
        t.matrix_only = pf.matrix_only;
        t.source = pf.matrix_only ? "matrix" : "system";
        return t;
    }
    if (pf.has_plant() && pf.controller) {
        const ClosedLoop cl = assemble_closed_loop(pf.linear_plant(), *pf.controller);
        Matrix J = cl.J;
        if (pf.channel_J) {
            if (pf.channel_J->rows() != cl.A_cl.rows())
                throw SchemaError("channel.J: row count must equal the closed-loop order");
            J = *pf.channel_J;
        }
        t.sys = StateSpace(cl.A_cl, J, J.transpose());
        t.source = "closed_loop";
        return t;
    }
    throw SchemaError("problem has neither a system nor a plant with a controller");
}

const Brunton2Params& brunton_params(const ProblemFile& pf) {
    if (!pf.model || pf.model->kind() != NonlinearModel::Kind::Brunton2)
        throw SchemaError("this method needs a brunton2 model");
    return std::get<Brunton2Params>(pf.model->params());
}

double static_gain(const ProblemFile& pf) {
    if (!pf.controller || pf.controller->order() != 0 || pf.controller->DK.size() != 1)
        throw SchemaError("this method needs a scalar static controller");
    return pf.controller->DK(0, 0);
}

struct Outcome {
    int code = kOk;
    json report;
};

// ---------------------------------------------------------------- analyze

Outcome cmd_analyze(const ProblemFile& pf, const std::string& norm, double tol, bool certify, std::ostream& out) {
    const Target t = analysis_target(pf);
    const StateSpace& sys = t.sys;
    Outcome o;
    json& r = o.report;
    r = {{"command", "analyze"}, {"problem", pf.name}, {"norm", norm}, {"source", t.source}};

    KreissOptions ko;
    ko.certify = certify;
    if (tol > 0) ko.eta_tol = ko.hinf_tol = tol;
    M0Options mo;
    mo.certify = certify;
    if (tol > 0) mo.t_tol = tol;

    std::optional<NormReport> rep;
    std::optional<OracleResult> orc;
    double value = 0.0;
    if (norm == "kreiss") {
        rep = t.matrix_only ? kreiss_matrix(sys.A, ko) : kreiss_norm(sys, ko);
        if (certify) orc = oracle_kreiss(sys);
    } else if (norm == "m0") {
        rep = transient_peak_m0(sys, mo);
        if (certify) orc = oracle_m0(sys);
    } else if (norm == "hinf") {
        rep = hinf_norm(sys, tol > 0 ? tol : 1e-9);
        if (certify) orc = oracle_hinf(sys);
    } else if (norm == "pkgain") {
        rep = peak_gain(sys, tol > 0 ? tol : 1e-8);
        if (certify) orc = oracle_peak_gain(sys);
    } else if (norm == "l2peak") {
        value = l2_to_peak(sys);
        if (certify) orc = oracle_l2_to_peak(sys);
    } else if (norm == "entrywise") {
        rep = entrywise_kreiss(sys, ko);
        if (certify) {
            OracleResult best;
            for (Eigen::Index i = 0; i < sys.outputs(); ++i) {
                for (Eigen::Index j = 0; j < sys.inputs(); ++j) {
                    const OracleResult c =
                        oracle_kreiss(StateSpace(sys.A, Matrix(sys.B.col(j)), Matrix(sys.C.row(i))));
                    if (c.value >= best.value) best.value = c.value, best.argmax = c.argmax, best.argmax2 = c.argmax2;
                    best.lower = std::max(best.lower, c.lower);
                    best.upper = std::max(best.upper, c.upper);
                    best.grid_points += c.grid_points;
                    best.grid = c.grid + " per channel";
                }
            }
            orc = best;
        }
    } else if (norm == "hankel") {
        require_hurwitz(sys.A, "analyze");
        const HankelData h = hankel_singular_values(sys);
        value = h.sigma.size() ? h.sigma(0) : 0.0;
        r["hankel_singular_values"] = to_json(h.sigma);
        out << "hankel singular values:";
        for (Eigen::Index i = 0; i < h.sigma.size(); ++i) out << ' ' << fmt(h.sigma(i), 8);
        out << '\n';
    } else if (norm == "cb") {
        value = cb_lower_bound(sys);
        const AttainmentCheck a = attainment_check(sys);
        r["attainment"] = {{"sigma_cb", a.sigma_cb}, {"slope", a.slope}, {"necessary_ok", a.necessary_ok}};
        out << "attainment necessary condition: " << (a.necessary_ok ? "holds" : "violated") << " (slope "
            << fmt(a.slope) << ")\n";
    } else {
        throw SchemaError("unknown norm '" + norm + "'");
    }
    if (rep) value = rep->value;
    r["value"] = value;
    out << norm << " = " << fmt(value, 8);
    if (rep && rep->kind != MaximizerKind::None) {
        out << "  (" << to_string(rep->kind) << " maximizer " << fmt(rep->maximizer, 8);
        if (rep->kind == MaximizerKind::Eta) out << ", omega " << fmt(rep->inner_frequency, 8);
        out << ')';
        r["maximizer"] = {{"kind", to_string(rep->kind)}, {"at", rep->maximizer}, {"omega", rep->inner_frequency}};
    }
    out << '\n';
    if (rep && rep->channel_row >= 0) r["channel"] = {rep->channel_row, rep->channel_col};
    if (rep && rep->certification) {
        out << "certified bracket [" << fmt(rep->certification->lower, 10) << ", " << fmt(rep->certification->upper, 10)
            << "]\n";
        r["certification"] = {{"lower", rep->certification->lower}, {"upper", rep->certification->upper}};
    }
    if (orc) {
        const double slack = 1e-6 * std::max(1.0, std::abs(value));
        const bool consistent = value >= orc->lower - slack && value <= orc->upper + slack;
        out << "oracle [" << fmt(orc->lower, 10) << ", " << fmt(orc->upper, 10) << "] on " << orc->grid << " ("
            << orc->grid_points << " points): " << (consistent ? "consistent" : "INCONSISTENT") << '\n';
        r["oracle"] = to_json(*orc);
        r["oracle_consistent"] = consistent;
        if (!consistent) o.code = kFail;
    }
    return o;
}

// ------------------------------------------------------------- synthesize

Outcome cmd_synthesize(const ProblemFile& pf, const std::string& structure_flag, std::optional<std::uint64_t> seed,
                       std::optional<int> restarts, const std::string& controller_out, std::ostream& out) {
    if (!pf.has_plant()) throw SchemaError("synthesize needs a plant or model block");
    const std::string s = !structure_flag.empty() ? structure_flag : pf.options.structure.value_or("static");
    ControllerStructure structure;
    try {
        structure = ControllerStructure::parse(s);
    } catch (const Error& e) {
        throw SchemaError(e.what());
    }
    SynthesisSpec spec;
    spec.plant = pf.linear_plant();
    spec.eta_rate = pf.eta_rate;
    spec.W = pf.W;
    if (auto r = restarts ? restarts : pf.options.restarts) spec.options.restarts = *r;
    if (auto sd = seed ? seed : pf.options.seed) spec.options.seed = *sd;

    Outcome o;
    json& r = o.report;
    r = {{"command", "synthesize"}, {"problem", pf.name}, {"structure", structure.to_string()},
         {"seed", spec.options.seed}, {"restarts", spec.options.restarts}};
    SynthesisResult res;
    try {
        res = minimize_kreiss(spec, structure);
    } catch (const SynthesisError& e) {
        out << "synthesis failed: " << e.what() << '\n';
        r["status"] = "failed";
        r["diagnostics"] = e.what();
        o.code = kSynthesisFailed;
        return o;
    }
    const ConstraintReport& c = res.constraints;
    out << "structure " << structure.to_string() << ", best restart " << res.best_restart << " of "
        << res.restarts.size() << '\n';
    out << "kreiss = " << fmt(res.kreiss.value, 8) << "  (eta " << fmt(res.kreiss.maximizer, 6) << ")\n";
    out << "alpha(A_cl) = " << fmt(c.alpha, 6) << " (required <= " << fmt(spec.eta_rate > 0 ? -spec.eta_rate : 0.0) << "): "
        << (c.alpha_ok ? "ok" : "VIOLATED") << '\n';
    if (c.rolloff)
        out << "||W T||_inf = " << fmt(*c.rolloff, 6) << " (required <= 1): " << (c.rolloff_ok ? "ok" : "VIOLATED")
            << '\n';
    out << "oracle [" << fmt(res.oracle.lower, 10) << ", " << fmt(res.oracle.upper, 10)
        << "], relative gap " << fmt(res.oracle_rel_gap, 3) << ": " << (res.certified ? "certified" : "NOT certified")
        << '\n';
    for (std::size_t i = 0; i < res.restarts.size(); ++i) {
        const RestartRecord& rr = res.restarts[i];
        out << "  restart " << i << " seed " << rr.seed << ": "
            << (rr.stabilized ? (rr.feasible ? "feasible" : "infeasible") : "not stabilized");
        if (rr.stabilized) out << ", kreiss " << fmt(rr.kreiss, 8);
        out << ", " << rr.iterations << " iterations\n";
    }
    out << "controller Theta = [A_K B_K; C_K D_K]:\n" << res.controller.Theta() << '\n';

    r["status"] = c.all_ok() ? "ok" : "constraints_violated";
    r["controller"] = to_json(res.controller);
    r["kreiss"] = {{"value", res.kreiss.value}, {"eta", res.kreiss.maximizer}, {"omega", res.kreiss.inner_frequency}};
    r["constraints"] = {{"alpha", c.alpha},
                        {"alpha_residual", c.alpha_residual},
                        {"alpha_ok", c.alpha_ok},
                        {"rolloff", c.rolloff ? json(*c.rolloff) : json(nullptr)},
                        {"rolloff_residual", c.rolloff_residual},
                        {"rolloff_ok", c.rolloff_ok},
                        {"family_stable", c.family_stable}};
    r["certification"] = {{"oracle", to_json(res.oracle)},
                          {"relative_gap", res.oracle_rel_gap},
                          {"certified", res.certified}};
    json rs = json::array();
    for (const RestartRecord& rr : res.restarts)
        rs.push_back({{"seed", rr.seed},
                      {"stabilized", rr.stabilized},
                      {"feasible", rr.feasible},
                      {"kreiss", rr.kreiss},
                      {"penalized", rr.penalized},
                      {"iterations", rr.iterations}});
    r["restart_log"] = rs;
    if (!controller_out.empty()) {
        std::ofstream f(controller_out);
        if (!f) throw SchemaError("cannot write " + controller_out);
        f << controller_to_json(res.controller) << '\n';
    }
    if (!c.all_ok()) o.code = kSynthesisFailed;
    return o;
}

// --------------------------------------------------------------- simulate

Outcome cmd_simulate(const ProblemFile& pf, const std::string& x0_flag, std::optional<double> t_on_flag,
                     std::optional<double> t_final_flag, double dt, const std::string& csv, std::ostream& out) {
    if (!pf.model) throw SchemaError("simulate needs a model block");
    const NonlinearModel& model = *pf.model;
    const ControllerRealization K = pf.controller
                                        ? *pf.controller
                                        : ControllerRealization::static_gain(
                                              Matrix::Zero(model.plant().inputs(), model.plant().measurements()));
    Vector x0;
    if (!x0_flag.empty())
        x0 = parse_vector(x0_flag);
    else if (pf.options.x0)
        x0 = *pf.options.x0;
    else
        throw SchemaError("simulate needs an initial state (--x0 or options.x0)");
    if (x0.size() != model.n()) throw SchemaError("x0 has the wrong dimension");
    const double t_on = t_on_flag ? *t_on_flag : pf.options.t_on.value_or(0.0);
    if (!t_final_flag && !pf.options.t_final) throw SchemaError("simulate needs --t-final or options.t_final");
    const double t_final = t_final_flag ? *t_final_flag : *pf.options.t_final;
    if (t_on < 0.0 || t_on > t_final) throw SchemaError("need 0 <= t_on <= t_final");

    IntegratorOptions io;
    io.output_dt = dt;
    const Trajectory tr = simulate_closed_loop(model, K, x0, t_on, t_final, io);
    if (!csv.empty()) {
        std::ofstream f(csv);
        if (!f) throw SchemaError("cannot write " + csv);
        tr.write_csv(f);
    }
    const double tf = tr.t.empty() ? t_on : tr.t.back();
    const double fn = tr.x.empty() ? x0.norm() : tr.final_state().norm();
    out << "final |x| = " << fmt(fn, 6) << " at t = " << fmt(tf, 8) << "; diverged: " << (tr.diverged ? "yes" : "no")
        << "; steps " << tr.accepted_steps << " accepted / " << tr.rejected_steps << " rejected\n";
    if (tr.diverged) out << tr.message << '\n';
    Outcome o;
    o.report = {{"command", "simulate"}, {"problem", pf.name}, {"t_on", t_on}, {"t_final", t_final},
                {"final_time", tf}, {"final_norm", fn}, {"diverged", tr.diverged},
                {"accepted_steps", tr.accepted_steps}, {"rejected_steps", tr.rejected_steps},
                {"samples", tr.t.size()}};
    if (!tr.x.empty()) o.report["final_state"] = to_json(Vector(tr.final_state()));
    if (tr.diverged) {
        o.report["message"] = tr.message;
        o.code = kBlowup;
    }
    return o;
}

// ---------------------------------------------------------------- certify

Outcome cmd_certify(const ProblemFile& pf, const std::string& method, std::optional<std::size_t> samples_flag,
                    std::optional<std::uint64_t> seed_flag, std::optional<double> eps_flag, bool full,
                    std::ostream& out) {
    Outcome o;
    json& r = o.report;
    r = {{"command", "certify"}, {"problem", pf.name}, {"method", method}};
    auto verdict = [&](const std::string& v) {
        out << "verdict: " << v << '\n';
        r["verdict"] = v;
        if (v != "PASS") o.code = v == "INDETERMINATE" ? kIndeterminate : kFail;
    };

    if (method == "qc") {
        if (!pf.has_plant() || !pf.controller) throw SchemaError("qc needs a plant/model and a controller");
        const double eps = eps_flag ? *eps_flag : pf.options.epsilon.value_or(1e-3);
        const ClosedLoop cl = assemble_closed_loop(pf.linear_plant(), *pf.controller);
        const QcCertificate c = full ? qc_analysis_full(cl, eps) : qc_analysis(cl, eps);
        out << "QC analysis (" << (full ? "full S-procedure form" : "structured form") << ", eps = " << eps
            << "): " << to_string(c.status) << '\n';
        out << "lambda_max(A_cl^T X + X A_cl + eps X) = " << fmt(c.margin, 6)
            << ", lambda_min(X) = " << fmt(c.min_eig, 6) << '\n';
        r["epsilon"] = eps;
        r["form"] = full ? "full" : "structured";
        r["status"] = to_string(c.status);
        r["margin"] = c.margin;
        r["min_eig"] = c.min_eig;
        if (c.X_cl.size()) r["X_cl"] = to_json(c.X_cl);
        verdict(c.status == LmiStatus::Indeterminate ? "INDETERMINATE" : (c.feasible ? "PASS" : "FAIL"));
    } else if (method == "window") {
        const Brunton2Params& p = brunton_params(pf);
        const double K = static_gain(pf);
        const GainWindow w = static_gain_window(p);
        const WindowVerdict v = w.classify(K);
        out << "window (" << fmt(w.lower) << ", " << fmt(w.upper) << ")" << (w.empty() ? " is empty" : "")
            << ", K = " << fmt(K) << ": " << to_string(v) << '\n';
        r["window"] = {w.lower, w.upper};
        r["empty"] = w.empty();
        r["K"] = K;
        r["position"] = to_string(v);
        verdict(v == WindowVerdict::Inside ? "PASS" : v == WindowVerdict::Boundary ? "BOUNDARY" : "FAIL");
        if (v == WindowVerdict::Boundary) out << "boundary gains are not certified (strict inequalities)\n";
    } else if (method == "bendixson") {
        const Brunton2Params& p = brunton_params(pf);
        const double K = static_gain(pf);
        const BendixsonReport b = bendixson_sign(p, K);
        out << "sup_r (P_x + Q_y) = 2 sigma + g K = " << fmt(b.divergence_sup) << ": " << to_string(b.verdict) << '\n';
        r["divergence_sup"] = b.divergence_sup;
        r["position"] = to_string(b.verdict);
        verdict(b.certified() ? "PASS" : b.verdict == WindowVerdict::Boundary ? "BOUNDARY" : "FAIL");
    } else if (method == "dcgain") {
        const Brunton2Params& p = brunton_params(pf);
        if (!pf.controller) throw SchemaError("dcgain needs a controller");
        const DcGainReport d = dc_gain_condition(*pf.controller, p);
        out << "|K(0)| = |" << fmt(d.dc_gain) << "| vs 2 omega / g = " << fmt(d.limit) << '\n';
        r["dc_gain"] = d.dc_gain;
        r["limit"] = d.limit;
        verdict(d.satisfied ? "PASS" : "FAIL");
    } else if (method == "yorke") {
        if (!pf.model) throw SchemaError("yorke needs a model");
        if (!pf.certificate) throw SchemaError("yorke needs a certificate");
        const PolyCertificate& cert = *pf.certificate;
        const ControllerRealization K =
            pf.controller ? *pf.controller
                          : (cert.has_controller ? cert.controller : throw SchemaError("yorke needs a controller"));
        const std::size_t samples = samples_flag ? *samples_flag : pf.options.samples.value_or(100000);
        const std::uint64_t seed = seed_flag ? *seed_flag : pf.options.seed.value_or(1);
        const YorkeReport y = yorke_sample_check(cert, closed_loop_field(*pf.model, K), samples, seed);
        out << "V = V1 + dV2/dt with\n  V1 = " << cert.V1.to_string(cert.variables)
            << "\n  V2 = " << cert.V2.to_string(cert.variables) << '\n';
        out << y.note << '\n';
        out << "violations " << y.violations << " / " << y.samples << ", min -Vdot = " << fmt(y.min_margin, 4)
            << ", min -Vdot/|x|^2 = " << fmt(y.min_scaled_margin, 4) << '\n';
        r["samples"] = y.samples;
        r["seed"] = seed;
        r["violations"] = y.violations;
        r["min_margin"] = y.min_margin;
        r["min_scaled_margin"] = y.min_scaled_margin;
        r["worst_point"] = to_json(y.worst_point);
        r["note"] = y.note;
        if (pf.model->kind() == NonlinearModel::Kind::Brunton2 && K.inputs() == 1 && K.outputs() == 1) {
            try {
                const BoundednessReport b = boundedness_bound(std::get<Brunton2Params>(pf.model->params()), K);
                out << "trajectories bounded: lim sup r <= " << fmt(b.bound) << " (c = " << fmt(b.c) << ")\n";
                r["boundedness"] = {{"bound", b.bound}, {"c", b.c}, {"growth", b.growth}, {"r0", b.r0}};
            } catch (const PreconditionError& e) {
                out << "boundedness not established: " << e.what() << '\n';
                r["boundedness"] = nullptr;
            }
        }
        verdict(y.pass ? "PASS" : "FAIL");
    } else {
        throw SchemaError("unknown certification method '" + method + "'");
    }
    return o;
}

// ----------------------------------------------------------------- oracle

Outcome cmd_oracle(const ProblemFile& pf, const std::string& norm, const std::string& grid, std::ostream& out) {
    const Target t = analysis_target(pf);
    Outcome o;
    if (t.sys.n() > kOracleMaxStates) {
        out << "oracle refuses n = " << t.sys.n() << " > " << kOracleMaxStates << " states\n";
        o.report = {{"command", "oracle"}, {"problem", pf.name}, {"status", "too_large"}, {"n", t.sys.n()}};
        o.code = kTooLarge;
        return o;
    }
    std::optional<double> points;
    if (!grid.empty() && grid != "dense") {
        try {
            std::size_t used = 0;
            points = std::stod(grid, &used);
            if (used != grid.size() || !(*points >= 10)) throw std::invalid_argument(grid);
        } catch (const std::exception&) {
            throw SchemaError("--grid must be 'dense' or a point count >= 10");
        }
    }
    auto count = [&](std::size_t dflt) { return points ? static_cast<std::size_t>(*points) : dflt; };
    OracleResult res;
    if (norm == "kreiss") {
        KreissOracleOptions ko;
        if (points) {
            ko.x_points = std::max<std::size_t>(20, static_cast<std::size_t>(std::sqrt(*points / 2.5)));
            ko.omega_points = std::max<std::size_t>(20, static_cast<std::size_t>(*points / ko.x_points));
        }
        res = oracle_kreiss(t.sys, ko);
    } else if (norm == "m0") {
        res = oracle_m0(t.sys, count(200000));
    } else if (norm == "hinf") {
        res = oracle_hinf(t.sys, count(100000));
    } else if (norm == "pkgain") {
        res = oracle_peak_gain(t.sys, count(200000));
    } else if (norm == "l2peak") {
        res = oracle_l2_to_peak(t.sys, count(200000));
    } else {
        throw SchemaError("oracle supports kreiss, m0, hinf, pkgain, l2peak");
    }
    out << norm << " oracle = " << std::fixed << std::setprecision(4) << res.value << std::defaultfloat
        << "  bracket [" << fmt(res.lower, 10) << ", " << fmt(res.upper, 10) << "]\n";
    out << "grid: " << res.grid << " (" << res.grid_points << " points), argmax " << fmt(res.argmax, 8);
    if (norm == "kreiss") out << ", omega " << fmt(res.argmax2, 8);
    out << '\n';
    o.report = {{"command", "oracle"}, {"problem", pf.name}, {"norm", norm}, {"result", to_json(res)}};
    return o;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"kreisslab: Kreiss-norm analysis, synthesis and certification"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(KREISSLAB_VERSION));

    std::string file, report, norm = "kreiss", structure, x0, out_path, method = "qc", grid = "dense";
    double tol = 0.0, dt = 0.0;
    bool certify = false, full = false;
    std::optional<std::uint64_t> seed;
    std::optional<int> restarts;
    std::optional<double> t_on, t_final, eps;
    std::optional<std::size_t> samples;

    auto common = [&](CLI::App* c) {
        c->add_option("file", file, "problem file (JSON)")->required();
        c->add_option("--report", report, "write a JSON report (metadata goes to <report>.meta.json)");
    };
    CLI::App* a = app.add_subcommand("analyze", "compute a system norm");
    common(a);
    a->add_option("--norm", norm, "kreiss|m0|hinf|pkgain|l2peak|entrywise|hankel|cb")
        ->check(CLI::IsMember({"kreiss", "m0", "hinf", "pkgain", "l2peak", "entrywise", "hankel", "cb"}));
    a->add_option("--tol", tol, "solver tolerance");
    a->add_flag("--certify", certify, "bracket the value and compare with the brute-force oracle");

    CLI::App* s = app.add_subcommand("synthesize", "minimize the closed-loop Kreiss norm");
    common(s);
    s->add_option("--structure", structure, "static|statefb|of:<nK>");
    s->add_option("--seed", seed, "restart seed");
    s->add_option("--restarts", restarts, "number of restarts");
    s->add_option("--out", out_path, "write the controller realization (JSON)");

    CLI::App* m = app.add_subcommand("simulate", "simulate the nonlinear closed loop");
    common(m);
    m->add_option("--x0", x0, "initial plant state, comma separated");
    m->add_option("--t-on", t_on, "controller switch-on time");
    m->add_option("--t-final", t_final, "final time");
    m->add_option("--dt", dt, "output spacing (0 = every accepted step)");
    m->add_option("--out", out_path, "trajectory CSV");

    CLI::App* c = app.add_subcommand("certify", "run a global-stability certificate");
    common(c);
    c->add_option("--method", method, "qc|window|bendixson|dcgain|yorke")
        ->check(CLI::IsMember({"qc", "window", "bendixson", "dcgain", "yorke"}));
    c->add_option("--samples", samples, "Yorke sample count");
    c->add_option("--seed", seed, "Yorke sampling seed");
    c->add_option("--epsilon", eps, "QC decay margin");
    c->add_flag("--full", full, "QC: use the unreduced S-procedure form");

    CLI::App* o = app.add_subcommand("oracle", "brute-force dense-grid reference value");
    common(o);
    o->add_option("--norm", norm, "kreiss|m0|hinf|pkgain|l2peak")
        ->check(CLI::IsMember({"kreiss", "m0", "hinf", "pkgain", "l2peak"}));
    o->add_option("--grid", grid, "'dense' or a number of grid points");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForVersion& e) {
        out << KREISSLAB_VERSION << '\n';
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kSchema;
    }
    std::vector<std::string> args(argv, argv + argc);

    try {
        const ProblemFile pf = load_problem(file);
        Outcome res;
        if (a->parsed())
            res = cmd_analyze(pf, norm, tol, certify, out);
        else if (s->parsed())
            res = cmd_synthesize(pf, structure, seed, restarts, out_path, out);
        else if (m->parsed())
            res = cmd_simulate(pf, x0, t_on, t_final, dt, out_path, out);
        else if (c->parsed())
            res = cmd_certify(pf, method, samples, seed, eps, full, out);
        else
            res = cmd_oracle(pf, norm, grid, out);
        res.report["exit_code"] = res.code;
        write_report(report, res.report, args);
        return res.code;
    } catch (const SchemaError& e) {
        err << "schema error: " << e.what() << '\n';
        return kSchema;
    } catch (const DimensionError& e) {
        err << "schema error: " << e.what() << '\n';
        return kSchema;
    } catch (const PreconditionError& e) {
        err << "precondition error: " << e.what() << '\n';
        return kSchema;
    } catch (const StabilityError& e) {
        err << "unstable: " << e.what() << '\n';
        return kUnstable;
    } catch (const SynthesisError& e) {
        err << "synthesis failed: " << e.what() << '\n';
        return kSynthesisFailed;
    } catch (const IndeterminateError& e) {
        err << "indeterminate: " << e.what() << '\n';
        return kIndeterminate;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFail;
    }
}

} // namespace kreisslab::cli
