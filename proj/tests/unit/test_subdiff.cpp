#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kreisslab/subdiff.hpp"
#include "kreisslab/synthesis.hpp"
#include "test_support.hpp"

using namespace kreisslab;
namespace kt = kreisslab::testing;

TEST(SigmaDirectional, MatchesFiniteDifferenceSimpleSingularValue) {
    std::mt19937_64 rng(1);
    const Matrix G = kt::random_matrix(rng, 3, 4);
    const Matrix D = kt::random_matrix(rng, 3, 4);
    const double h = 1e-7;
    const double fd = (sigma_max(Matrix(G + h * D)) - sigma_max(G)) / h;
    EXPECT_NEAR(sigma_directional(G, D), fd, 1e-5);
}

TEST(SigmaDirectional, RepeatedSingularValueIsOneSided) {
    const Matrix G = Matrix::Identity(2, 2);
    Matrix D = Matrix::Zero(2, 2);
    D(1, 1) = 1.0;
    EXPECT_NEAR(sigma_directional(G, D), 1.0, 1e-12);
    EXPECT_NEAR(sigma_directional(G, Matrix(-D)), 0.0, 1e-12);
}

TEST(SigmaDirectional, ComplexFiniteDifference) {
    std::mt19937_64 rng(2);
    const CMatrix G = kt::random_matrix(rng, 2, 2).cast<cplx>() + cplx(0, 1) * kt::random_matrix(rng, 2, 2);
    const CMatrix D = kt::random_matrix(rng, 2, 2).cast<cplx>() + cplx(0, 1) * kt::random_matrix(rng, 2, 2);
    const double h = 1e-7;
    const double fd = (sigma_max(CMatrix(G + h * D)) - sigma_max(G)) / h;
    EXPECT_NEAR(sigma_directional(G, D), fd, 1e-5);
}

TEST(HinfDirectional, MatchesFiniteDifference) {
    std::mt19937_64 rng(3);
    const StateSpace g = kt::random_system(rng, 4, 2, 2);
    const StateSpace dg(kt::random_matrix(rng, 4, 4) * 0.1, kt::random_matrix(rng, 4, 2), kt::random_matrix(rng, 2, 4));
    const double v = hinf_norm(g, 1e-13).value;
    const auto peaks = hinf_peak_frequencies(g, v);
    const double d = hinf_directional(g, peaks, system_direction(g, dg));
    const double h = 1e-6;
    const StateSpace gp(g.A + h * dg.A, g.B + h * dg.B, g.C + h * dg.C);
    const double fd = (hinf_norm(gp, 1e-13).value - v) / h;
    EXPECT_NEAR(d, fd, 1e-3 * std::max(1.0, std::abs(fd)));
}

TEST(HinfSubdifferential, WeightsHaveUnitTrace) {
    const StateSpace g = tf2ss({1}, {1, 0.2, 1});
    const double v = hinf_norm(g).value;
    const SubgradientSet s = hinf_subdifferential(g, hinf_peak_frequencies(g, v));
    ASSERT_FALSE(s.Y.empty());
    double tr = 0.0;
    for (const auto& Y : s.Y) tr += Y.trace().real();
    EXPECT_NEAR(tr, 1.0, 1e-12);
}

TEST(SigmaGradientTheta, MatchesFiniteDifference) {
    std::mt19937_64 rng(4);
    const Plant plant = kt::brunton_plant();
    ControllerRealization K = kt::brunton_first_order();
    const ClosedLoop cl = assemble_closed_loop(plant, K);
    const cplx s(0.3, 0.9);
    const Matrix G = sigma_gradient_theta(cl.A_cl, cl.J, cl.J.transpose(), s, cl.Bt, cl.Ct);
    const Matrix Th = K.Theta();
    const Matrix dTh = kt::random_matrix(rng, Th.rows(), Th.cols());
    auto value = [&](const Matrix& T) {
        const Matrix A = cl.A0 + cl.Bt * T * cl.Ct;
        const CMatrix R = (s * CMatrix::Identity(A.rows(), A.rows()) - A.cast<cplx>()).inverse();
        return sigma_max(CMatrix(cl.J.transpose().cast<cplx>() * R * cl.J.cast<cplx>()));
    };
    const double h = 1e-7;
    const double fd = (value(Th + h * dTh) - value(Th - h * dTh)) / (2 * h);
    EXPECT_NEAR((G.array() * dTh.array()).sum(), fd, 1e-6 * std::max(1.0, std::abs(fd)));
}

TEST(KreissSubgradient, DirectionalDerivativeBound) {
    const Plant plant = kt::brunton_plant();
    ControllerRealization K = kt::brunton_first_order();
    const ClosedLoop cl = assemble_closed_loop(plant, K);
    const KreissSubgradient sg = kreiss_subgradient(cl, K);
    ASSERT_FALSE(sg.gradients.empty());
    EXPECT_EQ(sg.gradients.front().size(), K.free_count());
    // max-type function: f'(theta; d) = max over active gradients of <g, d>
    const Vector d = -sg.gradients.front().normalized();
    const double h = 1e-6;
    ControllerRealization Kp = K;
    Kp.set_theta(K.theta() + h * d);
    const double fp = worst_case_delta(assemble_closed_loop(plant, Kp)).value;
    double dmax = -1e300;
    for (const auto& g : sg.gradients) dmax = std::max(dmax, g.dot(d));
    EXPECT_LE((fp - sg.value) / h, dmax + 1e-3);
}

TEST(MinNormElement, SegmentProjection) {
    Vector a(2), b(2);
    a << 1, 1;
    b << -1, 1;
    std::vector<double> w;
    const Vector m = min_norm_element({a, b}, Matrix(), &w);
    EXPECT_NEAR(m(0), 0.0, 1e-12);
    EXPECT_NEAR(m(1), 1.0, 1e-12);
    ASSERT_EQ(w.size(), 2u);
    EXPECT_NEAR(w[0], 0.5, 1e-10);
}

TEST(MinNormElement, OriginInHull) {
    Vector a(2), b(2), c(2);
    a << 1, 0;
    b << -1, 1;
    c << -1, -1;
    EXPECT_LT(min_norm_element({a, b, c}).norm(), 1e-10);
}

TEST(MinNormElement, SingleVector) {
    Vector a(3);
    a << 1, 2, 3;
    EXPECT_LT((min_norm_element({a}) - a).norm(), 1e-14);
}
