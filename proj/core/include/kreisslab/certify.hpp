#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kreisslab/control.hpp"
#include "kreisslab/models.hpp"
#include "kreisslab/polynomial.hpp"

namespace kreisslab {

enum class WindowVerdict { Inside, Boundary, Outside };
const char* to_string(WindowVerdict v);

// Static gains K with -2 omega/g < K < -2 sigma/g.
struct GainWindow {
    double lower = 0.0;
    double upper = 0.0;
    bool lower_open = true;
    bool upper_open = true;

    bool empty() const { return !(lower < upper); }
    // Boundary means within rel_tol of an excluded endpoint.
    WindowVerdict classify(double K, double rel_tol = 1e-12) const;
};

GainWindow static_gain_window(const Brunton2Params& p);

struct BendixsonReport {
    // 2 sigma + g K: supremum over r of P_x + Q_y.
    double divergence_sup = 0.0;
    WindowVerdict verdict = WindowVerdict::Outside;
    bool certified() const { return verdict == WindowVerdict::Inside; }
};

// P_x + Q_y = 2 sigma - 4 alpha beta r^2 + g K at radius r.
double bendixson_divergence(const Brunton2Params& p, double K, double r);
BendixsonReport bendixson_sign(const Brunton2Params& p, double K, double rel_tol = 1e-12);

struct DcGainReport {
    double dc_gain = 0.0;
    double limit = 0.0;
    bool satisfied = false;
};

// |D_K - C_K A_K^{-1} B_K| < 2 omega / g for a SISO controller.
DcGainReport dc_gain_condition(const ControllerRealization& K, const Brunton2Params& p);

struct PolyCertificate {
    std::vector<std::string> variables;
    Polynomial V1;
    Polynomial V2;
    ControllerRealization controller;
    bool has_controller = false;
    std::string note;

    // Same variable count, finite coefficients, degree at most 2.
    void validate() const;
};

std::string certificate_to_json(const PolyCertificate& c);
PolyCertificate certificate_from_json(const std::string& text);
PolyCertificate load_certificate(const std::string& path);

struct VectorField {
    std::function<Vector(const Vector&)> f;
    std::function<Matrix(const Vector&)> jacobian;
    Eigen::Index dim = 0;
};

// x_cl = (x, x_K) with u = C_K x_K + D_K C_y x.
VectorField closed_loop_field(const NonlinearModel& model, const ControllerRealization& K);
VectorField linear_field(const Matrix& A);

// V = V1 + dV2/dt; returns dV/dt along the field.
double certificate_vdot(const PolyCertificate& c, const VectorField& field, const Vector& x);

struct YorkeOptions {
    double r_min = 1e-3;
    double r_max = 1e2;
    std::size_t chunk = 4096;
};

struct YorkeReport {
    std::size_t samples = 0;
    std::size_t violations = 0;
    // min over samples of -dV/dt, and of -dV/dt / ||x||^2.
    double min_margin = 0.0;
    double min_scaled_margin = 0.0;
    Vector worst_point;
    bool pass = false;
    std::string note;
};

// Sample i depends only on (seed, i): a pass at N samples implies a pass on every prefix.
YorkeReport yorke_sample_check(const PolyCertificate& cert, const VectorField& field, std::size_t samples,
                               std::uint64_t seed, const YorkeOptions& opts = {});

struct BoundednessReport {
    double bound = 0.0;
    double r0 = 0.0;
    // ||B_K|| * int_0^inf ||e^{t A_K}|| dt.
    double c = 0.0;
    // sigma + max(g D_K, 0) + |g| ||C_K|| c.
    double growth = 0.0;
};

// Radius bound from the comparison ODE r' = growth r - alpha beta r^3.
BoundednessReport boundedness_bound(const Brunton2Params& p, const ControllerRealization& K);

// int_0^inf ||e^{tA}||_2 dt for Hurwitz A.
double exp_norm_integral(const Matrix& A, double tol = 1e-10);

} // namespace kreisslab
