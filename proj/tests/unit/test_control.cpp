#include <gtest/gtest.h>

#include <cmath>

#include "kreisslab/control.hpp"
#include "kreisslab/errors.hpp"
#include "kreisslab/sysnorms.hpp"
#include "test_support.hpp"

using namespace kreisslab;
namespace kt = kreisslab::testing;

TEST(Controller, ThetaRoundTrip) {
    ControllerRealization K = kt::brunton_third_order();
    const Matrix T = K.Theta();
    EXPECT_EQ(T.rows(), 4);
    EXPECT_EQ(T.cols(), 4);
    Vector th = K.theta();
    th(0) += 1.0;
    K.set_theta(th);
    EXPECT_DOUBLE_EQ(K.theta()(0), th(0));
}

TEST(Controller, MaskedEntriesAreStructuralZeros) {
    Mask m = Mask::Constant(2, 2, true);
    m(1, 0) = false;
    ControllerRealization K(kt::mat({{-1}}), kt::mat({{1}}), kt::mat({{5}}), kt::mat({{0}}), m);
    EXPECT_EQ(K.free_count(), 3);
    EXPECT_DOUBLE_EQ(K.CK(0, 0), 0.0);
    Vector x(3);
    x << -2.0, 4.0, 3.0;
    K.set_theta(x);
    EXPECT_DOUBLE_EQ(K.AK(0, 0), -2.0);
    EXPECT_DOUBLE_EQ(K.BK(0, 0), 4.0);
    EXPECT_DOUBLE_EQ(K.DK(0, 0), 3.0);
    EXPECT_DOUBLE_EQ(K.CK(0, 0), 0.0);
}

TEST(Controller, FromTransferEvaluates) {
    const ControllerRealization K = kt::brunton_first_order();
    const cplx s(0, 2.0);
    const cplx expect = (0.001071 * s - 2.247) / (s + 1.483);
    EXPECT_LT(std::abs(K.as_state_space().eval(s)(0, 0) - expect), 1e-13);
    EXPECT_LT(std::abs(kt::brunton_first_order_scaled().as_state_space().eval(s)(0, 0) - expect), 1e-13);
}

TEST(ClosedLoop, StaticGainAssembly) {
    const Plant p = kt::brunton_plant();
    const ControllerRealization K = ControllerRealization::static_gain(kt::mat({{-1.0}}));
    const ClosedLoop cl = assemble_closed_loop(p, K);
    EXPECT_LT((cl.A_cl - (p.A + p.Bu * K.DK * p.Cy)).norm(), 1e-15);
    EXPECT_LT((cl.A_cl - (cl.A0 + cl.Bt * K.Theta() * cl.Ct)).norm(), 1e-14);
}

TEST(ClosedLoop, DynamicAssemblyAffine) {
    const Plant p = kt::brunton_plant();
    const ControllerRealization K = kt::brunton_third_order();
    const ClosedLoop cl = assemble_closed_loop(p, K);
    EXPECT_EQ(cl.A_cl.rows(), 5);
    EXPECT_LT((cl.A_cl - (cl.A0 + cl.Bt * K.Theta() * cl.Ct)).norm(), 1e-12);
    EXPECT_EQ(cl.plant_order(), 2);
}

TEST(ClosedLoop, DimensionMismatchThrows) {
    const Plant p = kt::brunton_plant();
    const ControllerRealization K = ControllerRealization::static_gain(Matrix::Zero(2, 2));
    EXPECT_THROW(assemble_closed_loop(p, K), DimensionError);
}

TEST(Rolloff, BruntonPrintedControllers) {
    const Plant p = kt::brunton_plant();
    const StateSpace W = kt::rolloff_weight();
    auto wt = [&](const ControllerRealization& K) {
        return hinf_norm(weighted_complementary_sensitivity(p, K, W)).value;
    };
    EXPECT_NEAR(wt(ControllerRealization::static_gain(kt::mat({{-0.200398}}))), 20.03, 0.5);
    EXPECT_LE(wt(kt::brunton_first_order()), 1.0);
    EXPECT_LE(wt(kt::brunton_third_order()), 1.0);
}
