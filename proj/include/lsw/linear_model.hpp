#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lsw/lsw_solver.hpp"
#include "lsw/profile.hpp"

namespace lsw {

// Coarsening with drift -1 + x/L. Characteristics are affine in their labels,
// so F(x, t) = F0(t) + k(t) x and two anchors carry the whole state.
struct LinearRunConfig {
    SurvivalProfile initial;
    double T_final = 200.0;
    double delta = 0.05;
    std::size_t sample_every = 1;  // steps between trace samples
    // Interior labels, as fractions of the support, integrated on their own
    // to check the affine reconstruction.
    std::vector<double> probes = {0.1, 0.25, 0.5, 0.75, 0.9};
};

struct LinearRun {
    CoarseningTrace trace;
    bool compact_input = true;     // false when a tail had to be cut off
    std::vector<double> F0, k;     // aligned with trace.samples
    std::vector<double> beta_initial;  // beta0(F0) read off the initial beta
    double max_beta_gap = 0.0;     // sup |beta(0, t) - beta0(F0(t))|
    double max_affine_error = 0.0; // probes vs F0 + k x, relative to the support
    double beta_grid_spacing = 0.0;
};

LinearRun advance_linear(const LinearRunConfig& config);

struct LimitingBeta {
    bool applicable = false;
    double value = 0.0;  // p/(1+p) from the end exponent; 0 for block data
    std::string note;
};
// Limit of beta0 at the end of the support, when the data allow one.
LimitingBeta limiting_beta(const SurvivalProfile& profile);

struct StabilityReport {
    bool applicable = true;
    std::string note;
    double beta_limit = 0.0;
    double T = 0.0;
    double ratio_final = 0.0;  // Lambda(T)/T
    double ratio_fit = 0.0;    // least-squares slope of Lambda over the last third
    double tolerance = 0.05;
    double max_beta_gap = 0.0;
    bool pass = false;
};

StabilityReport stability_check(const LinearRun& run, const LimitingBeta& limit,
                                double tolerance = 0.05);

}  // namespace lsw
