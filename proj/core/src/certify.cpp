#include "kreisslab/certify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "json_util.hpp"
#include "kreisslab/errors.hpp"
#include "kreisslab/parallel.hpp"

namespace kreisslab {

using nlohmann::json;

const char* to_string(WindowVerdict v) {
    switch (v) {
    case WindowVerdict::Inside: return "inside";
    case WindowVerdict::Boundary: return "boundary";
    case WindowVerdict::Outside: return "outside";
    }
    return "?";
}

namespace {

bool near(double a, double b, double rel_tol) {
    return std::abs(a - b) <= rel_tol * std::max({std::abs(a), std::abs(b), 1e-300});
}

void require_brunton(const Brunton2Params& p) {
    if (!(p.g != 0.0) || !std::isfinite(p.g)) throw PreconditionError("Brunton parameters: g must be nonzero");
}

Polynomial::Exponents parse_exponents(const std::string& key, std::size_t nvars) {
    std::string s;
    for (char ch : key)
        if (ch != '[' && ch != ']' && ch != '(' && ch != ')' && ch != ' ') s += ch;
    Polynomial::Exponents e;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            const int k = std::stoi(tok, &used);
            if (used != tok.size() || k < 0) throw SchemaError("");
            e.push_back(k);
        } catch (const std::exception&) {
            throw SchemaError("certificate: bad monomial key '" + key + "'");
        }
    }
    if (e.size() != nvars) throw SchemaError("certificate: monomial key '" + key + "' has wrong arity");
    return e;
}

std::string exponent_key(const Polynomial::Exponents& e) {
    std::string s;
    for (std::size_t i = 0; i < e.size(); ++i) s += (i ? "," : "") + std::to_string(e[i]);
    return s;
}

Polynomial poly_from_json(const json& j, std::size_t nvars, const std::string& what) {
    if (!j.is_object()) throw SchemaError("certificate: " + what + " must be an object keyed by exponent tuples");
    Polynomial p(nvars);
    for (const auto& [k, v] : j.items()) {
        if (!v.is_number()) throw SchemaError("certificate: " + what + " coefficient is not a number");
        p.add_term(parse_exponents(k, nvars), v.get<double>());
    }
    return p;
}

json poly_to_json(const Polynomial& p) {
    json j = json::object();
    for (const auto& [e, c] : p.terms()) j[exponent_key(e)] = c;
    return j;
}

} // namespace

WindowVerdict GainWindow::classify(double K, double rel_tol) const {
    if (near(K, lower, rel_tol) && lower_open) return WindowVerdict::Boundary;
    if (near(K, upper, rel_tol) && upper_open) return WindowVerdict::Boundary;
    if (empty()) return WindowVerdict::Outside;
    const bool above = lower_open ? K > lower : K >= lower;
    const bool below = upper_open ? K < upper : K <= upper;
    return above && below ? WindowVerdict::Inside : WindowVerdict::Outside;
}

GainWindow static_gain_window(const Brunton2Params& p) {
    if (!(p.g > 0.0)) throw PreconditionError("static_gain_window: requires g > 0");
    GainWindow w;
    w.lower = -2.0 * p.omega / p.g;
    w.upper = -2.0 * p.sigma / p.g;
    return w;
}

double bendixson_divergence(const Brunton2Params& p, double K, double r) {
    return 2.0 * p.sigma - 4.0 * p.alpha * p.beta * r * r + p.g * K;
}

BendixsonReport bendixson_sign(const Brunton2Params& p, double K, double rel_tol) {
    BendixsonReport rep;
    rep.divergence_sup = 2.0 * p.sigma + p.g * K;
    const double scale = std::max(std::abs(2.0 * p.sigma), std::abs(p.g * K));
    if (std::abs(rep.divergence_sup) <= rel_tol * scale)
        rep.verdict = WindowVerdict::Boundary;
    else
        rep.verdict = rep.divergence_sup < 0.0 ? WindowVerdict::Inside : WindowVerdict::Outside;
    return rep;
}

DcGainReport dc_gain_condition(const ControllerRealization& K, const Brunton2Params& p) {
    require_brunton(p);
    if (K.inputs() != 1 || K.outputs() != 1) throw DimensionError("dc_gain_condition: SISO controller expected");
    double dc = K.DK(0, 0);
    if (K.order() > 0) {
        Eigen::FullPivLU<Matrix> lu(K.AK);
        if (!lu.isInvertible())
            throw PreconditionError("dc_gain_condition: A_K is singular (the DC gain condition assumes invertibility)");
        dc -= (K.CK * lu.solve(K.BK))(0, 0);
    }
    DcGainReport rep;
    rep.dc_gain = dc;
    rep.limit = 2.0 * p.omega / std::abs(p.g);
    rep.satisfied = std::abs(dc) < rep.limit;
    return rep;
}

void PolyCertificate::validate() const {
    const std::size_t n = variables.size();
    if (n == 0) throw SchemaError("certificate: no variables");
    if (V1.variables() != n || V2.variables() != n) throw SchemaError("certificate: V1/V2 arity mismatch");
    if (!V1.finite() || !V2.finite()) throw SchemaError("certificate: non-finite coefficient");
    if (V1.degree() > 2 || V2.degree() > 2) throw SchemaError("certificate: V1, V2 must have degree at most 2");
    if (has_controller) controller.validate();
}

std::string certificate_to_json(const PolyCertificate& c) {
    json j;
    j["schema_version"] = 1;
    j["kind"] = "poly_certificate";
    j["variables"] = c.variables;
    j["V1"] = poly_to_json(c.V1);
    j["V2"] = poly_to_json(c.V2);
    if (c.has_controller) {
        j["controller"] = {{"AK", detail::matrix_to_json(c.controller.AK)},
                           {"BK", detail::matrix_to_json(c.controller.BK)},
                           {"CK", detail::matrix_to_json(c.controller.CK)},
                           {"DK", detail::matrix_to_json(c.controller.DK)}};
    }
    if (!c.note.empty()) j["note"] = c.note;
    return j.dump(2);
}

PolyCertificate certificate_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("certificate: ") + e.what());
    }
    if (!j.is_object() || !j.contains("schema_version")) throw SchemaError("certificate: missing schema_version");
    if (!j.contains("variables") || !j["variables"].is_array()) throw SchemaError("certificate: missing variables");
    PolyCertificate c;
    for (const auto& v : j["variables"]) {
        if (!v.is_string()) throw SchemaError("certificate: variable names must be strings");
        c.variables.push_back(v.get<std::string>());
    }
    const std::size_t n = c.variables.size();
    if (!j.contains("V1") || !j.contains("V2")) throw SchemaError("certificate: V1 and V2 are required");
    c.V1 = poly_from_json(j["V1"], n, "V1");
    c.V2 = poly_from_json(j["V2"], n, "V2");
    if (j.contains("controller")) {
        const json& k = j["controller"];
        for (const char* key : {"AK", "BK", "CK", "DK"})
            if (!k.contains(key)) throw SchemaError(std::string("certificate: controller.") + key + " missing");
        auto get = [&](const char* key) {
            const json& m = k[key];
            if (m.is_array() && m.empty()) return Matrix(0, 0);
            return detail::matrix_from_json(m, std::string("controller.") + key);
        };
        Matrix AK = get("AK"), BK = get("BK"), CK = get("CK"), DK = get("DK");
        if (AK.size() == 0) {
            BK.resize(0, DK.cols());
            CK.resize(DK.rows(), 0);
        }
        try {
            c.controller = ControllerRealization(AK, BK, CK, DK);
        } catch (const DimensionError& e) {
            throw SchemaError(std::string("certificate: ") + e.what());
        }
        c.has_controller = true;
    }
    if (j.contains("note") && j["note"].is_string()) c.note = j["note"].get<std::string>();
    c.validate();
    return c;
}

PolyCertificate load_certificate(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("certificate: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return certificate_from_json(ss.str());
}

VectorField closed_loop_field(const NonlinearModel& model, const ControllerRealization& K) {
    const Plant& pl = model.plant();
    if (K.outputs() != pl.inputs() || K.inputs() != pl.measurements())
        throw DimensionError("closed_loop_field: controller dimensions do not match the plant");
    const Eigen::Index n = pl.n();
    const Eigen::Index nK = K.order();
    const Matrix Ax = pl.A + pl.Bu * K.DK * pl.Cy;
    VectorField vf;
    vf.dim = n + nK;
    vf.f = [model, K, Ax, n, nK](const Vector& z) {
        const Plant& p = model.plant();
        const Vector x = z.head(n);
        Vector dz(n + nK);
        dz.head(n) = Ax * x + p.Bw * model.phi(x);
        if (nK) {
            dz.head(n) += p.Bu * (K.CK * z.tail(nK));
            dz.tail(nK) = K.AK * z.tail(nK) + K.BK * (p.Cy * x);
        }
        return dz;
    };
    vf.jacobian = [model, K, Ax, n, nK](const Vector& z) {
        const Plant& p = model.plant();
        Matrix J = Matrix::Zero(n + nK, n + nK);
        J.topLeftCorner(n, n) = Ax + p.Bw * model.phi_jacobian(z.head(n));
        if (nK) {
            J.topRightCorner(n, nK) = p.Bu * K.CK;
            J.bottomLeftCorner(nK, n) = K.BK * p.Cy;
            J.bottomRightCorner(nK, nK) = K.AK;
        }
        return J;
    };
    return vf;
}

VectorField linear_field(const Matrix& A) {
    require_square(A, "linear_field");
    VectorField vf;
    vf.dim = A.rows();
    vf.f = [A](const Vector& x) { return Vector(A * x); };
    vf.jacobian = [A](const Vector&) { return A; };
    return vf;
}

double certificate_vdot(const PolyCertificate& c, const VectorField& field, const Vector& x) {
    const Vector f = field.f(x);
    const double v1 = c.V1.gradient(x).dot(f);
    if (c.V2.terms().empty()) return v1;
    const Matrix J = field.jacobian(x);
    return v1 + f.dot(c.V2.hessian(x) * f) + c.V2.gradient(x).dot(J * f);
}

YorkeReport yorke_sample_check(const PolyCertificate& cert, const VectorField& field, std::size_t samples,
                               std::uint64_t seed, const YorkeOptions& opts) {
    cert.validate();
    if (static_cast<Eigen::Index>(cert.variables.size()) != field.dim)
        throw DimensionError("yorke_sample_check: certificate and field dimensions differ");
    if (!(opts.r_min > 0.0 && opts.r_min < opts.r_max)) throw PreconditionError("yorke_sample_check: bad annulus");
    const std::size_t chunk = std::max<std::size_t>(opts.chunk, 1);
    const std::size_t nchunks = (samples + chunk - 1) / chunk;

    struct Partial {
        std::size_t violations = 0;
        double min_margin = std::numeric_limits<double>::infinity();
        double min_scaled = std::numeric_limits<double>::infinity();
        Vector worst;
    };
    std::vector<Partial> parts(nchunks);
    const double lo = std::log(opts.r_min), hi = std::log(opts.r_max);
    parallel_for(nchunks, [&](std::size_t ci) {
        std::seed_seq ss{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                         static_cast<std::uint32_t>(ci)};
        std::mt19937_64 rng(ss);
        std::normal_distribution<double> nd;
        std::uniform_real_distribution<double> ud(lo, hi);
        Partial& P = parts[ci];
        const std::size_t end = std::min(samples, (ci + 1) * chunk);
        for (std::size_t s = ci * chunk; s < end; ++s) {
            Vector d(field.dim);
            for (Eigen::Index k = 0; k < d.size(); ++k) d(k) = nd(rng);
            const double nrm = d.norm();
            if (nrm == 0.0) d(0) = 1.0;
            const double r = std::exp(ud(rng));
            const Vector x = d / (nrm == 0.0 ? 1.0 : nrm) * r;
            const double margin = -certificate_vdot(cert, field, x);
            const double scaled = margin / (r * r);
            if (!(margin > 0.0)) ++P.violations;
            if (scaled < P.min_scaled || P.worst.size() == 0) {
                P.min_scaled = scaled;
                P.worst = x;
            }
            P.min_margin = std::min(P.min_margin, margin);
        }
    });

    YorkeReport rep;
    rep.samples = samples;
    rep.min_margin = std::numeric_limits<double>::infinity();
    rep.min_scaled_margin = std::numeric_limits<double>::infinity();
    for (const auto& P : parts) {
        rep.violations += P.violations;
        rep.min_margin = std::min(rep.min_margin, P.min_margin);
        if (P.min_scaled < rep.min_scaled_margin) {
            rep.min_scaled_margin = P.min_scaled;
            rep.worst_point = P.worst;
        }
    }
    rep.pass = samples > 0 && rep.violations == 0;
    std::ostringstream note;
    note << "Vdot < 0 checked at " << samples << " samples with " << opts.r_min << " <= |x| <= " << opts.r_max
         << "; sampling can falsify but does not prove the certificate";
    rep.note = note.str();
    return rep;
}

double exp_norm_integral(const Matrix& A, double tol) {
    require_square(A, "exp_norm_integral");
    if (A.rows() == 0) return 0.0;
    if (!is_hurwitz(A)) throw PreconditionError("exp_norm_integral: matrix is not Hurwitz");
    // Composite Simpson on [0, T] with step from the h^4/180 error term; once
    // q = ||e^{TA}|| < 1 the tail obeys int_T^inf <= q * int_0^inf, so I <= I_T / (1 - q).
    const double scale = std::max(A.norm(), std::abs(spectral_abscissa(A)));
    const double h = std::min(0.05, std::pow(180.0 * tol, 0.25)) / scale;
    const Matrix Eh = expm(A, h);
    Matrix E = Matrix::Identity(A.rows(), A.cols());
    double integral = 0.0;
    double f0 = 1.0;
    for (std::size_t k = 0; k < 50'000'000; ++k) {
        const Matrix Em = E * Eh;
        const Matrix E2 = Em * Eh;
        const double fm = sigma_max(Em), f2 = sigma_max(E2);
        integral += h / 3.0 * (f0 + 4.0 * fm + f2);
        E = E2;
        f0 = f2;
        if (f2 < 0.5 && f2 * integral <= tol * integral * (1.0 - f2)) return integral / (1.0 - f2);
    }
    throw NumericalError("exp_norm_integral: quadrature did not converge");
}

BoundednessReport boundedness_bound(const Brunton2Params& p, const ControllerRealization& K) {
    require_brunton(p);
    if (!(p.alpha * p.beta > 0.0)) throw PreconditionError("boundedness_bound: requires alpha beta > 0");
    if (K.inputs() != 1 || K.outputs() != 1) throw DimensionError("boundedness_bound: SISO controller expected");
    BoundednessReport rep;
    rep.r0 = std::sqrt(std::max(p.sigma, 0.0) / (p.alpha * p.beta));
    if (K.order() > 0) {
        if (!is_hurwitz(K.AK)) throw PreconditionError("boundedness_bound: A_K is not Hurwitz");
        rep.c = sigma_max(K.BK) * exp_norm_integral(K.AK);
    }
    const double ck = K.order() > 0 ? sigma_max(K.CK) : 0.0;
    rep.growth = p.sigma + std::max(p.g * K.DK(0, 0), 0.0) + std::abs(p.g) * ck * rep.c;
    rep.bound = std::sqrt(std::max(rep.growth, 0.0) / (p.alpha * p.beta));
    return rep;
}

} // namespace kreisslab
