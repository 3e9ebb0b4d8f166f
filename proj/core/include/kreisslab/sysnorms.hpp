#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "kreisslab/numkernel.hpp"
#include "kreisslab/state_space.hpp"

namespace kreisslab {

enum class MaximizerKind { None, Time, Frequency, Eta, Channel };

const char* to_string(MaximizerKind k);

struct Certification {
    double lower = 0.0;
    double upper = 0.0;
};

// A point of the Kreiss family attaining (within clustering tolerance) the maximum.
struct ActivePoint {
    double eta = 0.0;
    double omega = 0.0;
    double value = 0.0;
};

struct NormReport {
    double value = 0.0;
    MaximizerKind kind = MaximizerKind::None;
    double maximizer = 0.0;
    double inner_frequency = 0.0;
    std::optional<Certification> certification;
    std::size_t evaluations = 0;
    int channel_row = -1;
    int channel_col = -1;
    std::vector<int> sign_vector;
    std::vector<ActivePoint> active;
};

struct HankelData {
    Matrix Wc;
    Matrix Wo;
    Vector sigma;
};

struct AttainmentCheck {
    double sigma_cb = 0.0;
    double Y_sym_max = 0.0;
    // d/dt ||C e^{At} B|| at t = 0, i.e. Y_sym_max / (2 sigma_cb).
    double slope = 0.0;
    bool necessary_ok = false;
};

struct KreissOptions {
    int grid_points = 200;
    double eta_cap = 2.0 - 1e-6;
    double eta_tol = 1e-10;
    double hinf_tol = 1e-10;
    int max_refine = 8;
    double active_tol = 1e-6;
    bool certify = false;
};

struct M0Options {
    double t_tol = 1e-12;
    std::size_t max_steps = 20'000'000;
    int max_refine = 12;
    bool certify = false;
};

inline constexpr double kActiveTol = 1e-6;

// sigma_max(G(j omega)), optionally for the shifted family member A - x I.
double sigma_at(const StateSpace& sys, double omega, double shift = 0.0);

NormReport hinf_norm(const StateSpace& sys, double tol = 1e-9);

// All frequencies (>= 0) where sigma_max(G(j w)) >= (1 - rel_tol) ||G||_inf,
// one per local peak.
std::vector<double> hinf_peak_frequencies(const StateSpace& sys, double hinf_value,
                                          double rel_tol = kActiveTol);

inline double eta_to_x(double eta) { return (2.0 - eta) / eta; }
inline double x_to_eta(double x) { return 2.0 / (1.0 + x); }

// f(eta) = ||C (sI - (eta/(2-eta) A - I))^{-1} B||_inf; eta = 0 gives sigma_max(CB).
double kreiss_family_value(const StateSpace& sys, double eta, double tol = 1e-10,
                           double* omega = nullptr);

NormReport kreiss_norm(const StateSpace& sys, const KreissOptions& opts = {});
NormReport kreiss_matrix(const Matrix& A, const KreissOptions& opts = {});
NormReport transient_peak_m0(const StateSpace& sys, const M0Options& opts = {});
double cb_lower_bound(const StateSpace& sys);
AttainmentCheck attainment_check(const StateSpace& sys, double tol = 1e-9);
NormReport entrywise_kreiss(const StateSpace& sys, const KreissOptions& opts = {});
NormReport sign_pattern_kreiss(const StateSpace& sys, const KreissOptions& opts = {});
NormReport peak_gain(const StateSpace& sys, double tol = 1e-8);
HankelData hankel_singular_values(const StateSpace& sys);
double l2_to_peak(const StateSpace& sys);

void require_hurwitz(const Matrix& A, const char* what);
void require_strictly_proper(const StateSpace& sys, const char* what);

} // namespace kreisslab
