#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kreisslab/control.hpp"
#include "kreisslab/models.hpp"
#include "kreisslab/numkernel.hpp"

namespace kreisslab {

// F(y) = blockdiag_b (F0[b] + sum_i y_i F[i][b]) < 0.
struct LmiProblem {
    std::vector<Matrix> F0;
    std::vector<std::vector<Matrix>> F;
    std::vector<std::string> block_names;
    std::vector<std::string> variable_names;
    // Required strictness; negative selects 1e-7 * max(1, ||F0||).
    double margin = -1.0;

    std::size_t variables() const { return F.size(); }
    std::size_t blocks() const { return F0.size(); }
    void validate() const;
    Matrix block(std::size_t b, const Vector& y) const;
    double lambda_max(const Vector& y) const;
    double required_margin() const;

    // Builds F0 and F_i from an affine map y -> blocks (F_i = F(e_i) - F(0)).
    static LmiProblem from_affine(std::size_t nvars, const std::function<std::vector<Matrix>(const Vector&)>& map);
};

enum class LmiStatus { Feasible, Infeasible, Indeterminate };
const char* to_string(LmiStatus s);

struct LmiOptions {
    int max_iter = 400;
    int stages = 9;
    // Early exit once lambda_max <= -stop_margin * scale.
    double stop_margin = 1e-2;
};

struct LmiResult {
    LmiStatus status = LmiStatus::Indeterminate;
    Vector y;
    double lambda_max = 0.0;
    double required = 0.0;
    // Smoothed-dual stationarity: || (tr F_i Z)_i || with Z the softmax eigenprojector.
    double dual_residual = 0.0;
    int iterations = 0;
};

LmiResult sdp_feasibility(const LmiProblem& prob, const LmiOptions& opts = {});

std::string lmi_to_json(const LmiProblem& prob);
LmiProblem lmi_from_json(const std::string& text);

// max |x_cl^T B_w phi(x)| / ||x||^3 over random states in the ball of the given radius.
double lossless_check(const NonlinearModel& model, std::size_t samples, std::uint64_t seed, double radius = 100.0);
double lossless_value(const NonlinearModel& model, const Vector& x);

struct QcCertificate {
    Matrix X_cl;
    double epsilon = 0.0;
    LmiStatus status = LmiStatus::Indeterminate;
    bool feasible = false;
    // lambda_max(A_cl^T X_cl + X_cl A_cl + eps X_cl), recomputed.
    double margin = 0.0;
    double min_eig = 0.0;
    Eigen::Index n_phi = 0;
    Eigen::Index n_K = 0;
};

// Structured Lyapunov inequality with X_cl B_w,cl = B_w,cl (mu0 = -1 eliminated).
QcCertificate qc_analysis(const ClosedLoop& cl, double epsilon = 1e-3);
// Same question on the unreduced S-procedure form with free X_cl, mu0 = -1 and the
// zero block relaxed to -tau I.
QcCertificate qc_analysis_full(const ClosedLoop& cl, double epsilon = 1e-3, double tau = 1e-6);

struct StateFeedbackResult {
    LmiStatus status = LmiStatus::Indeterminate;
    Matrix K;
    Matrix Y;
    Matrix W;
    QcCertificate verification;
};

// Solves A diag(Y, I) + B W + (.)^T < -eps diag(Y, I), Y > 0; K = W diag(Y, I)^{-1}.
StateFeedbackResult sf_synthesis(const Matrix& A, const Matrix& B, Eigen::Index n_phi, double epsilon = 1e-3);

struct ExistenceResult {
    LmiStatus status = LmiStatus::Indeterminate;
    Matrix X;
    Matrix Y;
    Eigen::Index max_order = 0;
    Vector coupling_singular_values;
};

ExistenceResult of_existence(const Matrix& A, const Matrix& B, const Matrix& C, Eigen::Index n_phi,
                             double epsilon = 1e-3);

struct ReconstructionResult {
    LmiStatus status = LmiStatus::Indeterminate;
    ControllerRealization controller;
    Matrix X_cl;
    QcCertificate verification;
};

ReconstructionResult reconstruct_controller(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& X,
                                            const Matrix& Y, Eigen::Index n_K, double epsilon = 1e-3);

} // namespace kreisslab
