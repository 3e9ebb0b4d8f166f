#include <gtest/gtest.h>

#include "kreisslab/errors.hpp"
#include "kreisslab/synthesis.hpp"
#include "test_support.hpp"

using namespace kreisslab;
namespace kt = kreisslab::testing;

TEST(Structure, Parse) {
    EXPECT_EQ(ControllerStructure::parse("static").kind, ControllerStructure::Kind::Static);
    EXPECT_EQ(ControllerStructure::parse("statefb").kind, ControllerStructure::Kind::StateFeedback);
    const auto of = ControllerStructure::parse("of:3");
    EXPECT_EQ(of.kind, ControllerStructure::Kind::OutputFeedback);
    EXPECT_EQ(of.order, 3);
    EXPECT_EQ(of.to_string(), "of:3");
    EXPECT_THROW(ControllerStructure::parse("of:x"), PreconditionError);
    EXPECT_THROW(ControllerStructure::parse("of:-1"), PreconditionError);
    EXPECT_THROW(ControllerStructure::parse("dynamic"), PreconditionError);
}

TEST(Structure, StateFeedbackMeasuresState) {
    const Plant p = kt::lorenz_with(28, kt::row({1, 0, 0})).plant();
    const Plant s = structured_plant(p, ControllerStructure::parse("statefb"));
    EXPECT_TRUE(s.Cy.isIdentity());
}

TEST(WorstCaseDelta, BruntonFirstOrder) {
    const ClosedLoop cl = assemble_closed_loop(kt::brunton_plant(), kt::brunton_first_order());
    const NormReport r = worst_case_delta(cl);
    EXPECT_NEAR(r.value, 1.005, 2e-2);
    EXPECT_EQ(r.kind, MaximizerKind::Eta);
}

TEST(WorstCaseDelta, UnstableReportsWitness) {
    const ClosedLoop cl =
        assemble_closed_loop(kt::brunton_plant(), ControllerRealization::static_gain(kt::mat({{0.5}})));
    try {
        worst_case_delta(cl);
        FAIL() << "expected StabilityError";
    } catch (const StabilityError& e) {
        EXPECT_GT(e.witness(), 0.0);
    }
}

TEST(Constraints, BruntonPrintedControllers) {
    SynthesisSpec spec;
    spec.plant = kt::brunton_plant();
    spec.eta_rate = 0.1;
    spec.W = kt::rolloff_weight();
    const ConstraintReport k1 = evaluate_constraints(spec, kt::brunton_first_order());
    EXPECT_TRUE(k1.all_ok());
    EXPECT_NEAR(k1.alpha, -0.393, 2e-2);
    ASSERT_TRUE(k1.rolloff.has_value());
    EXPECT_LE(*k1.rolloff, 1.0);
    const ConstraintReport ks = evaluate_constraints(spec, ControllerRealization::static_gain(kt::mat({{-0.200398}})));
    EXPECT_FALSE(ks.alpha_ok);
    EXPECT_FALSE(ks.rolloff_ok);
    EXPECT_NEAR(*ks.rolloff, 20.03, 0.5);
    EXPECT_NEAR(ks.alpha, -1.99e-4, 1e-4);
}

TEST(Constraints, RolloffNormMatchesConstraintReport) {
    const Plant p = kt::brunton_plant();
    const StateSpace W = kt::rolloff_weight();
    SynthesisSpec spec;
    spec.plant = p;
    spec.W = W;
    const auto K = kt::brunton_third_order();
    EXPECT_NEAR(rolloff_norm(p, K, W), *evaluate_constraints(spec, K).rolloff, 1e-8);
}

TEST(Synthesis, LorenzStaticReachesOne) {
    SynthesisSpec spec;
    spec.plant = kt::lorenz_with(28, kt::row({1, 0, 0})).plant();
    spec.options.restarts = 4;
    spec.options.seed = 1;
    const SynthesisResult r = minimize_kreiss(spec, ControllerStructure::parse("static"));
    EXPECT_LE(r.kreiss.value, 1.02);
    EXPECT_TRUE(r.constraints.all_ok());
    EXPECT_LT(r.oracle_rel_gap, 1e-3);
    EXPECT_TRUE(r.certified);
    EXPECT_EQ(r.restarts.size(), 4u);
}

TEST(Synthesis, AcceptedIteratesNonincreasing) {
    SynthesisSpec spec;
    spec.plant = kt::lorenz_with(28, kt::row({1, 0, 0})).plant();
    spec.options.restarts = 2;
    const SynthesisResult r = minimize_kreiss(spec, ControllerStructure::parse("static"));
    for (const auto& rec : r.restarts) {
        for (std::size_t i = 1; i < rec.history.size(); ++i) {
            if (rec.history[i].first != rec.history[i - 1].first) continue;
            EXPECT_LE(rec.history[i].second, rec.history[i - 1].second + 1e-12);
        }
    }
}

TEST(Synthesis, DeterministicForSeed) {
    SynthesisSpec spec;
    spec.plant = kt::lorenz_with(28, kt::row({1, 0, 0})).plant();
    spec.options.restarts = 2;
    spec.options.seed = 5;
    const auto s = ControllerStructure::parse("static");
    const SynthesisResult a = minimize_kreiss(spec, s);
    const SynthesisResult b = minimize_kreiss(spec, s);
    EXPECT_EQ(a.controller.Theta(), b.controller.Theta());
}

TEST(Synthesis, ZeroActuationFails) {
    SynthesisSpec spec;
    spec.plant.A = kt::mat({{0.1, -1}, {1, 0.1}});
    spec.plant.Bw = Matrix::Identity(2, 2);
    spec.plant.Bu = Matrix::Zero(2, 1);
    spec.plant.Cy = kt::row({0, 1});
    spec.options.restarts = 2;
    EXPECT_THROW(minimize_kreiss(spec, ControllerStructure::parse("of:1")), SynthesisError);
}
