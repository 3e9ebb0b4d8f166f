#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kreisslab/control.hpp"
#include "kreisslab/oracle.hpp"
#include "kreisslab/sysnorms.hpp"

namespace kreisslab {

struct ControllerStructure {
    enum class Kind { Static, StateFeedback, OutputFeedback };
    Kind kind = Kind::Static;
    int order = 0;

    // "static", "statefb" or "of:<nK>".
    static ControllerStructure parse(const std::string& s);
    std::string to_string() const;
};

struct SynthesisOptions {
    int restarts = 10;
    std::uint64_t seed = 1;
    int max_iter = 120;
    int stabilization_iter = 200;
    int grid_points = 48;
    double init_scale = 1.0;
    double stationarity_tol = 1e-7;
    int penalty_doublings = 6;
};

struct SynthesisSpec {
    Plant plant;
    double eta_rate = 0.0;
    std::optional<StateSpace> W;
    SynthesisOptions options;
};

struct ConstraintReport {
    double alpha = 0.0;
    double alpha_residual = 0.0;
    bool alpha_ok = false;
    std::optional<double> rolloff;
    double rolloff_residual = 0.0;
    bool rolloff_ok = true;
    bool family_stable = false;
    bool all_ok() const { return alpha_ok && rolloff_ok && family_stable; }
};

struct RestartRecord {
    std::uint64_t seed = 0;
    bool stabilized = false;
    bool feasible = false;
    double kreiss = 0.0;
    double penalized = 0.0;
    int iterations = 0;
    // Accepted penalized objective values, one block per penalty weight.
    std::vector<std::pair<double, double>> history;
};

struct SynthesisResult {
    ControllerRealization controller;
    NormReport kreiss;
    ConstraintReport constraints;
    OracleResult oracle;
    double oracle_rel_gap = 0.0;
    bool certified = false;
    std::size_t best_restart = 0;
    std::vector<RestartRecord> restarts;
};

// Inner maximization of the Kreiss family for a fixed controller.
NormReport worst_case_delta(const ClosedLoop& cl, const KreissOptions& opts = {});

double rolloff_norm(const Plant& plant, const ControllerRealization& K, const StateSpace& W);

ConstraintReport evaluate_constraints(const SynthesisSpec& spec, const ControllerRealization& K);

// Plant as used by the structure: state feedback measures the full state.
Plant structured_plant(const Plant& plant, const ControllerStructure& structure);

SynthesisResult minimize_kreiss(const SynthesisSpec& spec, const ControllerStructure& structure);

} // namespace kreisslab
