#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "kreisslab/certify.hpp"
#include "kreisslab/control.hpp"
#include "kreisslab/models.hpp"
#include "kreisslab/state_space.hpp"

namespace kreisslab {

inline constexpr int kSchemaVersion = 1;

struct ProblemOptions {
    std::optional<double> t_on;
    std::optional<double> t_final;
    std::optional<Vector> x0;
    std::optional<int> restarts;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
    std::optional<double> epsilon;
    std::optional<std::size_t> samples;
    std::optional<std::string> structure;
    std::optional<int> order;
};

// Parsed problem document. Matrices are row-major arrays of rows.
struct ProblemFile {
    int schema_version = kSchemaVersion;
    std::string name;
    std::string base_dir;

    std::optional<StateSpace> system;
    // Matrix-level problems carry only A (B = C = I).
    bool matrix_only = false;
    std::optional<NonlinearModel> model;
    std::optional<Plant> plant;
    std::optional<ControllerRealization> controller;
    std::optional<Matrix> channel_J;
    double eta_rate = 0.0;
    std::optional<StateSpace> W;
    std::optional<PolyCertificate> certificate;
    ProblemOptions options;

    // Plant from the explicit block, else from the model.
    const Plant& linear_plant() const;
    bool has_plant() const { return plant.has_value() || model.has_value(); }
};

ProblemFile parse_problem(const std::string& text, const std::string& base_dir = ".");
ProblemFile load_problem(const std::string& path);

std::string controller_to_json(const ControllerRealization& K, int indent = 2);
ControllerRealization controller_from_json(const std::string& text);

} // namespace kreisslab
