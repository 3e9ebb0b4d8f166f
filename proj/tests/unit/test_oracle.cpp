#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kreisslab/oracle.hpp"
#include "kreisslab/sysnorms.hpp"
#include "test_support.hpp"

using namespace kreisslab;
namespace kt = kreisslab::testing;

TEST(Oracle, HinfBracketsAnalytic) {
    const StateSpace g = tf2ss({1}, {1, 0.2, 1});
    const OracleResult o = oracle_hinf(g);
    const double exact = hinf_norm(g).value;
    EXPECT_LE(o.value, exact + 1e-9);
    EXPECT_NEAR(o.value, exact, 1e-3 * exact);
}

TEST(Oracle, M0Example3) {
    const OracleResult o = oracle_m0(kt::example3());
    EXPECT_NEAR(o.value, 0.25, 1e-4);
    EXPECT_LE(o.lower, 0.25 + 1e-12);
}

TEST(Oracle, KreissExample3Bracket) {
    const OracleResult o = oracle_kreiss(kt::example3());
    const double exact = 3.0 - 2.0 * std::sqrt(2.0);
    EXPECT_LE(o.lower, exact + 1e-9);
    EXPECT_GE(o.upper, exact - 1e-9);
    EXPECT_LT(o.upper - o.lower, 0.01);
}

TEST(Oracle, EtaGridAgreesWithKreiss) {
    const StateSpace g = kt::example8();
    const OracleResult o = oracle_eta_grid(g, 2000);
    const double k = kreiss_norm(g).value;
    EXPECT_LE(o.value, k + 1e-8);
    EXPECT_NEAR(o.value, k, 1e-3 * k);
}

TEST(Oracle, KreissMatchesAnalyticOnRandomSystems) {
    std::mt19937_64 rng(17);
    KreissOracleOptions opts;
    opts.x_points = 200;
    opts.omega_points = 400;
    for (int k = 0; k < 5; ++k) {
        const StateSpace g = kt::random_system(rng, 3, 1, 1);
        const double v = kreiss_norm(g).value;
        const OracleResult o = oracle_kreiss(g, opts);
        EXPECT_LE(o.lower, v * (1 + 1e-8)) << k;
        EXPECT_GE(o.upper, v * (1 - 1e-8)) << k;
    }
}

TEST(Oracle, PeakGainAndL2Peak) {
    const StateSpace g = tf2ss({1}, {1, 2});
    EXPECT_NEAR(oracle_peak_gain(g).value, 0.5, 1e-4);
    EXPECT_NEAR(oracle_l2_to_peak(g).value, l2_to_peak(g), 1e-6);
}
