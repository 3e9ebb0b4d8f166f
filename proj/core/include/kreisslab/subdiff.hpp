#pragma once

#include <functional>
#include <vector>

#include "kreisslab/control.hpp"
#include "kreisslab/numkernel.hpp"
#include "kreisslab/state_space.hpp"
#include "kreisslab/sysnorms.hpp"

namespace kreisslab {

// Clarke subdifferential of ||.||_inf at G: { sum_k Q_k Y_k P_k^H : Y_k >= 0, sum tr Y_k = 1 }.
struct SubgradientSet {
    std::vector<double> frequencies;
    std::vector<CMatrix> Q;
    std::vector<CMatrix> P;
    std::vector<CMatrix> Y;
};

// sigma_max'(G; D) = 1/2 lambda_max(Q^H D P + P^H D^H Q).
double sigma_directional(const CMatrix& G, const CMatrix& D, double cluster_tol = kSvdClusterTol);
double sigma_directional(const Matrix& G, const Matrix& D, double cluster_tol = kSvdClusterTol);

// Direction in transfer-function space, evaluated per frequency.
using FrequencyDirection = std::function<CMatrix(double omega)>;

// dG(j w) for a perturbation (dA, dB, dC, dD) of the realization of `sys`.
FrequencyDirection system_direction(const StateSpace& sys, const StateSpace& dsys);

SubgradientSet hinf_subdifferential(const StateSpace& sys, const std::vector<double>& peaks);
double hinf_directional(const StateSpace& sys, const std::vector<double>& peaks, const FrequencyDirection& D);

// Gradient with respect to Theta of sigma_max(Co R Bo), R = (sI - A)^{-1}, where
// A = A0 + Bt Theta Ct and, when E is given, Bo = Bo0 + Bt Theta E. The maximal
// singular block is averaged (Y = I/k), which is a valid Clarke subgradient.
Matrix sigma_gradient_theta(const Matrix& A, const Matrix& Bo, const Matrix& Co, cplx s, const Matrix& Bt,
                            const Matrix& Ct, const Matrix* E = nullptr);

struct KreissSubgradient {
    double value = 0.0;
    std::vector<ActivePoint> active;
    // One gradient (over the free controller entries) per active (eta, omega).
    std::vector<Vector> gradients;
};

// Subgradients of theta -> K(J^T (sI - A_cl(theta))^{-1} J) at the active points.
KreissSubgradient kreiss_subgradient(const ClosedLoop& cl, const ControllerRealization& K,
                                     const KreissOptions& opts = {});
KreissSubgradient kreiss_subgradient(const ClosedLoop& cl, const ControllerRealization& K, const NormReport& rep);

// Minimum-norm element of the convex hull of `g` in the metric H (identity if empty);
// returns the convex weights in `weights` when given.
Vector min_norm_element(const std::vector<Vector>& g, const Matrix& H = Matrix(), std::vector<double>* weights = nullptr);

} // namespace kreisslab
