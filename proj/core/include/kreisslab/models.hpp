#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "kreisslab/control.hpp"
#include "kreisslab/numkernel.hpp"
#include "kreisslab/state_space.hpp"

namespace kreisslab {

struct LorenzParams {
    double p = 10.0;
    double R = 28.0;
    double b = 1.0;
};

struct Brunton2Params {
    double sigma = 0.1;
    double omega = 1.0;
    double alpha = 1.0;
    double beta = 1.0;
    double gamma = 0.0;
    double g = 1.0;
};

// Fourth-order oscillator; numeric data comes from an external parameter file.
struct Brunton4Params {
    double sigma_u = 0.0, omega_u = 0.0, sigma_a = 0.0, omega_a = 0.0, g = 1.0;
    double alpha_u = 0.0, alpha_a = 0.0;
    double beta_uu = 0.0, gamma_uu = 0.0, beta_au = 0.0, gamma_au = 0.0;
    double beta_ua = 0.0, gamma_ua = 0.0, beta_aa = 0.0, gamma_aa = 0.0;
    bool placeholder = true;
    std::string note;
};

Brunton4Params load_brunton4(const std::string& path);

// x' = A x + B_w phi(x) + B_u u, y = C_y x.
class NonlinearModel {
public:
    enum class Kind { Lorenz, Brunton2, Brunton4 };

    static NonlinearModel lorenz(const LorenzParams& p, const Matrix& Cy);
    static NonlinearModel lorenz(const LorenzParams& p = {});
    static NonlinearModel brunton2(const Brunton2Params& p = {});
    static NonlinearModel brunton4(const Brunton4Params& p);

    Kind kind() const { return kind_; }
    std::string name() const;
    const Plant& plant() const { return plant_; }
    Eigen::Index n() const { return plant_.n(); }
    Eigen::Index n_phi() const { return plant_.Bw.cols(); }
    const std::variant<LorenzParams, Brunton2Params, Brunton4Params>& params() const { return params_; }

    Vector phi(const Vector& x) const;
    Matrix phi_jacobian(const Vector& x) const;
    Vector rhs(const Vector& x, const Vector& u) const;

    // Throws ConsistencyError unless B_w phi(0) = 0 and B_w phi'(0) = 0.
    void check_origin() const;

private:
    Kind kind_ = Kind::Lorenz;
    std::variant<LorenzParams, Brunton2Params, Brunton4Params> params_;
    Plant plant_;
};

struct FixedPoints {
    std::vector<Vector> points;
    bool degenerate = false;
};

FixedPoints lorenz_fixed_points(const LorenzParams& p);

// (A, B_w, I): the w -> z channel with z the full state.
StateSpace model_as_statespace(const NonlinearModel& model);

// sqrt(sigma / (alpha beta)); empty when sigma <= 0.
std::optional<double> limit_cycle_radius(const Brunton2Params& p);

struct IntegratorOptions {
    double rtol = 1e-9;
    double atol = 1e-12;
    double h0 = 1e-3;
    double h_min = 1e-14;
    double h_max = 0.1;
    double blowup = 1e12;
    std::size_t max_steps = 5'000'000;
    // Uniform output spacing; 0 records every accepted step.
    double output_dt = 0.0;
};

struct Trajectory {
    std::vector<double> t;
    std::vector<Vector> x;
    std::vector<Vector> xK;
    std::vector<Vector> u;
    std::vector<Vector> y;
    double t_on = 0.0;
    bool diverged = false;
    std::string message;
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;

    Vector final_state() const { return x.back(); }
    void write_csv(std::ostream& os) const;
};

// u = 0 and frozen controller states before t_on, u = K(s) y afterwards.
Trajectory simulate_closed_loop(const NonlinearModel& model, const ControllerRealization& K, const Vector& x0,
                                double t_on, double t_final, const IntegratorOptions& opts = {});

// Plain integration of x' = f(t, x) with the embedded 5(4) Dormand-Prince pair.
using OdeRhs = std::function<Vector(double, const Vector&)>;
Trajectory integrate_ode(const OdeRhs& f, const Vector& x0, double t0, double t1, const IntegratorOptions& opts = {});

struct TransientCurve {
    std::vector<double> t;
    std::vector<double> sigma;
    double peak = 0.0;
    double t_peak = 0.0;
    void write_csv(std::ostream& os) const;
};

// sigma_max(J^T e^{A_cl t} J) on the given time grid.
TransientCurve transient_curve(const Matrix& A_cl, const Matrix& J, const std::vector<double>& times);

// Three slowest-time-constant horizon past t_on.
double default_horizon(const Matrix& A_cl, double t_on);

} // namespace kreisslab
