#include "kreisslab/io.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json_util.hpp"
#include "kreisslab/errors.hpp"

namespace kreisslab {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw SchemaError(where + ": expected an object");
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) throw SchemaError(where + ": unknown key '" + k + "'");
}

Matrix mat(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw SchemaError(where + ": missing '" + key + "'");
    return detail::matrix_from_json(j[key], where + "." + key);
}

double num(const json& j, const std::string& where) {
    if (!j.is_number()) throw SchemaError(where + ": expected a number");
    return j.get<double>();
}

std::vector<double> coeffs(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) throw SchemaError(where + ": expected a nonempty coefficient array");
    std::vector<double> c;
    for (const auto& v : j) c.push_back(num(v, where));
    return c;
}

std::string resolve(const std::string& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? p : (fs::path(base) / path).lexically_normal().string();
}

template <typename F>
auto wrap(const std::string& where, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const SchemaError&) {
        throw;
    } catch (const DimensionError& e) {
        throw SchemaError(where + ": " + e.what());
    } catch (const PreconditionError& e) {
        throw SchemaError(where + ": " + e.what());
    }
}

StateSpace parse_lti(const json& j, const std::string& where) {
    if (j.contains("num") || j.contains("den")) {
        check_keys(j, {"num", "den"}, where);
        return wrap(where, [&] { return tf2ss(coeffs(j["num"], where + ".num"), coeffs(j["den"], where + ".den")); });
    }
    check_keys(j, {"A", "B", "C", "D"}, where);
    const Matrix A = mat(j, "A", where);
    const Matrix B = mat(j, "B", where);
    const Matrix C = mat(j, "C", where);
    const Matrix D = j.contains("D") ? detail::matrix_from_json(j["D"], where + ".D") : Matrix::Zero(C.rows(), B.cols());
    return wrap(where, [&] {
        StateSpace s(A, B, C, D);
        s.validate();
        return s;
    });
}

ControllerRealization parse_controller(const json& j) {
    const std::string where = "controller";
    if (j.contains("static")) {
        check_keys(j, {"static"}, where);
        return wrap(where, [&] { return ControllerRealization::static_gain(detail::matrix_from_json(j["static"], where)); });
    }
    if (j.contains("num") || j.contains("den")) {
        check_keys(j, {"num", "den"}, where);
        return wrap(where, [&] {
            return ControllerRealization::from_transfer(coeffs(j["num"], where + ".num"), coeffs(j["den"], where + ".den"));
        });
    }
    check_keys(j, {"AK", "BK", "CK", "DK"}, where);
    const Matrix DK = mat(j, "DK", where);
    auto opt = [&](const char* key) {
        if (!j.contains(key) || (j[key].is_array() && j[key].empty())) return Matrix(0, 0);
        return detail::matrix_from_json(j[key], where + "." + key);
    };
    Matrix AK = opt("AK"), BK = opt("BK"), CK = opt("CK");
    if (AK.size() == 0) {
        AK.resize(0, 0);
        BK.resize(0, DK.cols());
        CK.resize(DK.rows(), 0);
    }
    return wrap(where, [&] {
        ControllerRealization K(AK, BK, CK, DK);
        K.validate();
        return K;
    });
}

LorenzParams parse_lorenz(const json& j) {
    LorenzParams p;
    check_keys(j, {"p", "R", "b"}, "model.params");
    if (j.contains("p")) p.p = num(j["p"], "model.params.p");
    if (j.contains("R")) p.R = num(j["R"], "model.params.R");
    if (j.contains("b")) p.b = num(j["b"], "model.params.b");
    return p;
}

Brunton2Params parse_brunton2(const json& j) {
    Brunton2Params p;
    check_keys(j, {"sigma", "omega", "alpha", "beta", "gamma", "g"}, "model.params");
    auto set = [&](const char* k, double& dst) {
        if (j.contains(k)) dst = num(j[k], std::string("model.params.") + k);
    };
    set("sigma", p.sigma);
    set("omega", p.omega);
    set("alpha", p.alpha);
    set("beta", p.beta);
    set("gamma", p.gamma);
    set("g", p.g);
    return p;
}

NonlinearModel parse_model(const json& j, const std::string& base) {
    check_keys(j, {"kind", "params", "Cy", "config"}, "model");
    if (!j.contains("kind") || !j["kind"].is_string()) throw SchemaError("model: missing kind");
    const std::string kind = j["kind"].get<std::string>();
    const json params = j.contains("params") ? j["params"] : json::object();
    if (kind == "lorenz") {
        const LorenzParams p = parse_lorenz(params);
        if (j.contains("Cy")) return wrap("model", [&] { return NonlinearModel::lorenz(p, mat(j, "Cy", "model")); });
        return NonlinearModel::lorenz(p);
    }
    if (kind == "brunton2") return wrap("model", [&] { return NonlinearModel::brunton2(parse_brunton2(params)); });
    if (kind == "brunton4") {
        if (!j.contains("config") || !j["config"].is_string())
            throw SchemaError("model: brunton4 needs a 'config' parameter file");
        return NonlinearModel::brunton4(load_brunton4(resolve(base, j["config"].get<std::string>())));
    }
    throw SchemaError("model: unknown kind '" + kind + "'");
}

ProblemOptions parse_options(const json& j) {
    check_keys(j, {"t_on", "t_final", "x0", "restarts", "seed", "tol", "epsilon", "samples", "structure", "order"},
               "options");
    ProblemOptions o;
    if (j.contains("t_on")) o.t_on = num(j["t_on"], "options.t_on");
    if (j.contains("t_final")) o.t_final = num(j["t_final"], "options.t_final");
    if (j.contains("x0")) o.x0 = detail::vector_from_json(j["x0"], "options.x0");
    auto nonneg_int = [&](const char* k) {
        if (!j[k].is_number_integer() || j[k].get<long long>() < 0)
            throw SchemaError(std::string("options.") + k + ": expected a nonnegative integer");
        return j[k].get<long long>();
    };
    if (j.contains("restarts")) o.restarts = static_cast<int>(nonneg_int("restarts"));
    if (j.contains("seed")) o.seed = static_cast<std::uint64_t>(nonneg_int("seed"));
    if (j.contains("samples")) o.samples = static_cast<std::size_t>(nonneg_int("samples"));
    if (j.contains("order")) o.order = static_cast<int>(nonneg_int("order"));
    if (j.contains("tol")) o.tol = num(j["tol"], "options.tol");
    if (j.contains("epsilon")) o.epsilon = num(j["epsilon"], "options.epsilon");
    if (j.contains("structure")) {
        if (!j["structure"].is_string()) throw SchemaError("options.structure: expected a string");
        o.structure = j["structure"].get<std::string>();
    }
    return o;
}

} // namespace

const Plant& ProblemFile::linear_plant() const {
    if (plant) return *plant;
    if (model) return model->plant();
    throw SchemaError("problem: no plant or model block");
}

ProblemFile parse_problem(const std::string& text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("problem: ") + e.what());
    }
    check_keys(j, {"schema_version", "name", "description", "system", "model", "plant", "controller", "channel",
                   "constraints", "certificate", "options"},
               "problem");
    if (!j.contains("schema_version") || !j["schema_version"].is_number_integer())
        throw SchemaError("problem: missing schema_version");
    ProblemFile pf;
    pf.schema_version = j["schema_version"].get<int>();
    if (pf.schema_version != kSchemaVersion)
        throw SchemaError("problem: unsupported schema_version " + std::to_string(pf.schema_version));
    pf.base_dir = base_dir;
    if (j.contains("name") && j["name"].is_string()) pf.name = j["name"].get<std::string>();

    if (j.contains("system")) {
        const json& s = j["system"];
        if (s.is_object() && s.contains("A") && !s.contains("B") && !s.contains("C")) {
            check_keys(s, {"A"}, "system");
            const Matrix A = mat(s, "A", "system");
            if (A.rows() != A.cols()) throw SchemaError("system.A: matrix must be square");
            const Matrix I = Matrix::Identity(A.rows(), A.rows());
            pf.system = StateSpace(A, I, I, Matrix::Zero(A.rows(), A.rows()));
            pf.matrix_only = true;
        } else {
            pf.system = parse_lti(s, "system");
        }
    }
    if (j.contains("model")) pf.model = parse_model(j["model"], base_dir);
    if (j.contains("plant")) {
        const json& p = j["plant"];
        check_keys(p, {"A", "Bw", "Bu", "Cy"}, "plant");
        Plant pl;
        pl.A = mat(p, "A", "plant");
        pl.Bu = mat(p, "Bu", "plant");
        pl.Cy = mat(p, "Cy", "plant");
        pl.Bw = p.contains("Bw") ? mat(p, "Bw", "plant") : Matrix::Zero(pl.A.rows(), 0);
        wrap("plant", [&] {
            pl.validate();
            return 0;
        });
        pf.plant = pl;
    }
    if (j.contains("controller")) pf.controller = parse_controller(j["controller"]);
    if (j.contains("channel")) {
        check_keys(j["channel"], {"J"}, "channel");
        pf.channel_J = mat(j["channel"], "J", "channel");
    }
    if (j.contains("constraints")) {
        const json& c = j["constraints"];
        check_keys(c, {"eta", "W"}, "constraints");
        if (c.contains("eta")) pf.eta_rate = num(c["eta"], "constraints.eta");
        if (pf.eta_rate < 0.0) throw SchemaError("constraints.eta: must be nonnegative");
        if (c.contains("W")) pf.W = parse_lti(c["W"], "constraints.W");
    }
    if (j.contains("certificate")) {
        const json& c = j["certificate"];
        if (c.is_string())
            pf.certificate = load_certificate(resolve(base_dir, c.get<std::string>()));
        else
            pf.certificate = certificate_from_json(c.dump());
    }
    if (j.contains("options")) pf.options = parse_options(j["options"]);

    if (pf.controller && pf.has_plant()) {
        const Plant& pl = pf.linear_plant();
        if (pf.controller->outputs() != pl.inputs() || pf.controller->inputs() != pl.measurements())
            throw SchemaError("controller: dimensions do not match the plant");
    }
    if (pf.options.t_on && pf.options.t_final && *pf.options.t_on > *pf.options.t_final)
        throw SchemaError("options: t_on exceeds t_final");
    return pf;
}

ProblemFile load_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("problem: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const fs::path parent = fs::path(path).parent_path();
    return parse_problem(ss.str(), parent.empty() ? "." : parent.string());
}

std::string controller_to_json(const ControllerRealization& K, int indent) {
    json j;
    j["AK"] = detail::matrix_to_json(K.AK);
    j["BK"] = detail::matrix_to_json(K.BK);
    j["CK"] = detail::matrix_to_json(K.CK);
    j["DK"] = detail::matrix_to_json(K.DK);
    return j.dump(indent);
}

ControllerRealization controller_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("controller: ") + e.what());
    }
    return parse_controller(j);
}

} // namespace kreisslab
