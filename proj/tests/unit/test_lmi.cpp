#include <gtest/gtest.h>

#include <string>

#include "kreisslab/errors.hpp"
#include "kreisslab/io.hpp"
#include "kreisslab/lmi.hpp"
#include "test_support.hpp"

using namespace kreisslab;
namespace kt = kreisslab::testing;

namespace {

QcCertificate qc_for(const std::string& problem) {
    const ProblemFile pf = load_problem(kt::problem_path(problem));
    return qc_analysis(assemble_closed_loop(pf.linear_plant(), *pf.controller), pf.options.epsilon.value_or(1e-3));
}

void expect_sound(const QcCertificate& c, const ClosedLoop& cl) {
    const Matrix& X = c.X_cl;
    const Matrix L = (cl.A_cl.transpose() * X + X * cl.A_cl + c.epsilon * X).eval();
    EXPECT_LE(lambda_max_sym(L), 0.0);
    EXPECT_GT(lambda_min_sym(X), 0.0);
    EXPECT_LT((X * cl.B_wcl - cl.B_wcl).norm(), 1e-9 * std::max(1.0, X.norm()));
}

} // namespace

TEST(Sdp, OneDimensionalFeasible) {
    // diag(y - 1, -y) < 0 holds for 0 < y < 1
    LmiProblem p;
    p.F0 = {kt::mat({{-1, 0}, {0, 0}})};
    p.F = {{kt::mat({{1, 0}, {0, -1}})}};
    const LmiResult r = sdp_feasibility(p);
    ASSERT_EQ(r.status, LmiStatus::Feasible);
    EXPECT_GT(r.y(0), 0.0);
    EXPECT_LT(r.y(0), 1.0);
    EXPECT_LE(p.lambda_max(r.y), -r.required);
}

TEST(Sdp, IdentityWithoutVariablesInfeasible) {
    LmiProblem p;
    p.F0 = {Matrix::Identity(2, 2)};
    EXPECT_EQ(sdp_feasibility(p).status, LmiStatus::Infeasible);
}

TEST(Sdp, ContradictoryConstraintsInfeasible) {
    // y < 0 and -y < -1
    LmiProblem p;
    p.F0 = {kt::mat({{0}}), kt::mat({{1}})};
    p.F = {{kt::mat({{1}}), kt::mat({{-1}})}};
    EXPECT_EQ(sdp_feasibility(p).status, LmiStatus::Infeasible);
}

TEST(Sdp, AffineBuilder) {
    const LmiProblem p = LmiProblem::from_affine(2, [](const Vector& y) {
        return std::vector<Matrix>{kt::mat({{y(0) - 1, y(1)}, {y(1), -y(0) - 1}})};
    });
    EXPECT_EQ(p.variables(), 2u);
    EXPECT_EQ(p.blocks(), 1u);
    Vector y(2);
    y << 0.25, 0.5;
    EXPECT_LT((p.block(0, y) - kt::mat({{-0.75, 0.5}, {0.5, -1.25}})).norm(), 1e-15);
}

TEST(Sdp, MalformedProblem) {
    LmiProblem p;
    p.F0 = {kt::mat({{0, 1}, {0, 0}})};
    EXPECT_THROW(p.validate(), Error);
}

TEST(Sdp, JsonRoundTrip) {
    LmiProblem p;
    p.F0 = {kt::mat({{-1, 0}, {0, 0}})};
    p.F = {{kt::mat({{1, 0}, {0, -1}})}};
    p.block_names = {"main"};
    p.variable_names = {"y"};
    const LmiProblem q = lmi_from_json(lmi_to_json(p));
    ASSERT_EQ(q.variables(), 1u);
    EXPECT_EQ(q.F0[0], p.F0[0]);
    EXPECT_EQ(q.F[0][0], p.F[0][0]);
    EXPECT_EQ(q.variable_names, p.variable_names);
}

TEST(Lossless, LorenzIdentity) {
    const NonlinearModel m = NonlinearModel::lorenz();
    Vector x(3);
    x << 1, 2, 3;
    EXPECT_EQ(lossless_value(m, x), 0.0);
    EXPECT_LE(lossless_check(m, 100000, 7), 1e-12);
}

TEST(Lossless, CubicOscillatorIsNotLossless) {
    EXPECT_GT(lossless_check(NonlinearModel::brunton2(), 1000, 7), 1e-3);
}

TEST(QcAnalysis, LorenzOpenLoopInfeasible) {
    const NonlinearModel m = kt::lorenz_with(28, kt::row({0, 1, 0}));
    const ClosedLoop cl = assemble_closed_loop(m.plant(), ControllerRealization::static_gain(kt::mat({{0.0}})));
    const QcCertificate c = qc_analysis(cl);
    EXPECT_FALSE(c.feasible);
    EXPECT_NE(c.status, LmiStatus::Feasible);
}

TEST(QcAnalysis, LorenzStaticYFeedback) {
    const NonlinearModel m = kt::lorenz_with(28, kt::row({0, 1, 0}));
    const ClosedLoop cl = assemble_closed_loop(m.plant(), ControllerRealization::static_gain(kt::mat({{-27.01}})));
    const QcCertificate c = qc_analysis(cl);
    ASSERT_TRUE(c.feasible);
    expect_sound(c, cl);
    EXPECT_EQ(c.n_phi, 2);
}

class PrintedControllers : public ::testing::TestWithParam<std::string> {};

TEST_P(PrintedControllers, QcAnalysisPasses) {
    const ProblemFile pf = load_problem(kt::problem_path(GetParam()));
    const ClosedLoop cl = assemble_closed_loop(pf.linear_plant(), *pf.controller);
    const QcCertificate c = qc_analysis(cl, pf.options.epsilon.value_or(1e-3));
    ASSERT_TRUE(c.feasible) << "margin " << c.margin;
    expect_sound(c, cl);
}

INSTANTIATE_TEST_SUITE_P(Lorenz, PrintedControllers,
                         ::testing::Values("lorenz28_kreiss_dyn", "lorenz28_kreiss_sf", "lorenz28_kreiss_x",
                                           "lorenz28_kreiss_y", "lorenz28_qc_dyn", "lorenz28_qc_sf",
                                           "lorenz28_qc_x", "lorenz28_qc_y", "lorenz10_kreiss_dyn",
                                           "lorenz10_kreiss_sf", "lorenz10_kreiss_x", "lorenz10_kreiss_y",
                                           "lorenz10_qc_dyn", "lorenz10_qc_sf", "lorenz10_qc_x", "lorenz10_qc_y"));

TEST(QcAnalysis, ReducedAndFullFormsAgree) {
    for (const char* name : {"lorenz28_qc_x", "lorenz28_kreiss_dyn"}) {
        const ProblemFile pf = load_problem(kt::problem_path(name));
        const ClosedLoop cl = assemble_closed_loop(pf.linear_plant(), *pf.controller);
        EXPECT_EQ(qc_analysis(cl).feasible, qc_analysis_full(cl).feasible) << name;
    }
    const NonlinearModel m = kt::lorenz_with(28, kt::row({1, 0, 0}));
    const ClosedLoop open = assemble_closed_loop(m.plant(), ControllerRealization::static_gain(kt::mat({{0.0}})));
    EXPECT_FALSE(qc_analysis_full(open).feasible);
}

TEST(SfSynthesis, LorenzClosure) {
    for (double R : {28.0, 10.0}) {
        const Plant p = kt::lorenz_with(R, kt::row({1, 0, 0})).plant();
        const StateFeedbackResult r = sf_synthesis(p.A, p.Bu, 2);
        ASSERT_EQ(r.status, LmiStatus::Feasible) << R;
        EXPECT_EQ(r.K.rows(), 1);
        EXPECT_EQ(r.K.cols(), 3);
        EXPECT_TRUE(r.verification.feasible) << R;
        Plant sf = p;
        sf.Cy = Matrix::Identity(3, 3);
        EXPECT_TRUE(qc_analysis(assemble_closed_loop(sf, ControllerRealization::static_gain(r.K))).feasible);
    }
}

TEST(SfSynthesis, AlreadyStableAdmitsZeroGain) {
    // A + A^T < 0 with n_phi = n: K = 0 is admissible
    const Matrix A = kt::mat({{-1, 0.5}, {-0.5, -1}});
    const StateFeedbackResult r = sf_synthesis(A, kt::mat({{1}, {0}}), 2);
    EXPECT_EQ(r.status, LmiStatus::Feasible);
    EXPECT_TRUE(r.verification.feasible);
}

TEST(OfExistence, LorenzOrderBound) {
    for (double R : {28.0, 10.0}) {
        const Plant p = kt::lorenz_with(R, kt::row({1, 0, 0})).plant();
        const ExistenceResult e = of_existence(p.A, p.Bu, p.Cy, 2);
        ASSERT_EQ(e.status, LmiStatus::Feasible) << R;
        EXPECT_LE(e.max_order, 1);
    }
}

TEST(Reconstruct, LorenzFirstOrder) {
    const Plant p = kt::lorenz_with(28, kt::row({1, 0, 0})).plant();
    const ExistenceResult e = of_existence(p.A, p.Bu, p.Cy, 2);
    ASSERT_EQ(e.status, LmiStatus::Feasible);
    const ReconstructionResult r = reconstruct_controller(p.A, p.Bu, p.Cy, e.X, e.Y, 1);
    ASSERT_EQ(r.status, LmiStatus::Feasible);
    EXPECT_EQ(r.controller.order(), 1);
    EXPECT_TRUE(r.verification.feasible);
    EXPECT_TRUE(qc_analysis(assemble_closed_loop(p, r.controller)).feasible);
}

TEST(QcAnalysis, FileHelper) { EXPECT_TRUE(qc_for("lorenz10_qc_x").feasible); }
