#pragma once

#include <cstddef>
#include <string>

#include "kreisslab/numkernel.hpp"
#include "kreisslab/state_space.hpp"

namespace kreisslab {

// Brute-force dense-grid references. `value` is the best sampled value (a lower
// bound for sup-type norms); `upper` is a grid-derived upper bound.
struct OracleResult {
    double value = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double argmax = 0.0;
    double argmax2 = 0.0;
    std::size_t grid_points = 0;
    std::string grid;
};

struct KreissOracleOptions {
    std::size_t x_points = 400;
    std::size_t omega_points = 1000;
    // Ratio of consecutive x nodes for the monotonicity upper bound.
    double upper_ratio = 1.01;
};

OracleResult oracle_hinf(const StateSpace& sys, std::size_t points = 100000);
OracleResult oracle_m0(const StateSpace& sys, std::size_t points = 200000);
OracleResult oracle_kreiss(const StateSpace& sys, const KreissOracleOptions& opts = {});
// Dense eta-grid maximization of the Kreiss family (each member by Hamiltonian H-inf).
OracleResult oracle_eta_grid(const StateSpace& sys, std::size_t points = 10000);
OracleResult oracle_peak_gain(const StateSpace& sys, std::size_t points = 200000);
OracleResult oracle_l2_to_peak(const StateSpace& sys, std::size_t points = 200000);

} // namespace kreisslab
