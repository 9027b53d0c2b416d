#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "lsw/profile.hpp"

namespace lsw {

struct ExitRecord {
    double label = 0.0;
    double time = 0.0;
};

// Survivors of the characteristic flow. Positions are stored divided by a
// cumulative dilation `scale`, which is only folded back into the arrays when
// the critical size drifts far from 1 in stored units.
struct CharacteristicEnsemble {
    std::vector<double> label;  // initial position y_i, increasing
    std::vector<double> w;      // w0(y_i); never touched after seeding
    std::vector<double> x;      // current position / scale
    double scale = 1.0;
    double t = 0.0;
    double mass0 = 1.0;
    ExitRecord last_exit;
    std::vector<ExitRecord> exits;
    std::shared_ptr<const SurvivalProfile> initial;  // compact representative of w0

    // Seeds one characteristic per grid node. A tail model is cut off at the
    // last node and the remainder rescaled to unit mass.
    static CharacteristicEnsemble from_profile(const SurvivalProfile& w0);

    std::size_t survivors() const { return x.size(); }
    double position(std::size_t i) const { return scale * x[i]; }
    // True when every survivor carries the same value, i.e. block data whose
    // linear representative is exact however few nodes are left.
    bool flat() const;
};

struct BoundaryState {
    double label = 0.0;  // F(0, t)
    double w = 0.0;      // w(0, t) = w0(F(0, t))
};

// The label at x = 0, interpolated in time between the last exit and the
// predicted exit of the first survivor under the frozen critical size L_hint.
BoundaryState boundary_state(const CharacteristicEnsemble& e, double L_hint);

// Critical size from L^{1/3} = (1/3) int x^{-2/3} w / w(0). Without a hint the
// boundary is resolved by a short fixed-point loop.
double l_from_state(const CharacteristicEnsemble& e, double L_hint = 0.0);

double ensemble_mass(const CharacteristicEnsemble& e, double L_hint);
double ensemble_energy(const CharacteristicEnsemble& e, double L_hint);  // (2/3) int x^{-1/3} w
// beta(0, t) = -w_x(0) * mass / w(0)^2, w_x from the first three survivors.
double boundary_beta(const CharacteristicEnsemble& e, double L_hint);

// The current w as a compact profile: the boundary node at x = 0 followed by
// the survivors, in original units.
SurvivalProfile ensemble_profile(const CharacteristicEnsemble& e, double L_hint);

// Advances survivors by dt (original units) under the critical size path
// L(t' - e.t), 0 <= t' - e.t <= dt. Exits are logged with their time.
void step_characteristics(CharacteristicEnsemble& e, const std::function<double(double)>& L_path,
                          double dt);

struct PicardResult {
    std::vector<double> s;  // sub-node offsets from the start, original units
    std::vector<double> L;  // converged critical size at the sub-nodes
    std::vector<double> corrections;  // sup |L_{k+1} - L_k| / L(t), per iteration
    std::size_t iterations = 0;
    bool converged = false;
    double max_ratio = 0.0;  // largest successive correction ratio observed
    CharacteristicEnsemble end;
};

// Fixed point of L -> T(L) on [t, t + delta L(t)] starting from L constant.
PicardResult picard_solve_interval(const CharacteristicEnsemble& e, double delta, double tol = 1e-10,
                                   std::size_t max_iter = 50);

struct TraceSample {
    double t = 0.0, tau = 0.0, L = 0.0, Lambda = 0.0, E = 0.0, beta0 = 0.0, mass = 0.0, gamma = 0.0;
    double boundary_label = 0.0;
    std::size_t picard_iters = 0;
    double contraction = 0.0;
    double first_correction = 0.0;
    std::size_t survivors = 0;
};

struct EnsembleSnapshot {
    double t = 0.0, tau = 0.0, Lambda = 0.0, L = 0.0;
    double beta0 = std::numeric_limits<double>::quiet_NaN();  // boundary fit, when known
    SurvivalProfile profile;    // original units, boundary node first
    std::vector<double> label;  // aligned with profile.x
};

struct CoarseningTrace {
    std::vector<TraceSample> samples;
    std::vector<EnsembleSnapshot> snapshots;
    std::vector<std::string> violations;
    std::string stop_reason;
    std::size_t steps = 0;
    std::size_t picard_iters_total = 0;
    std::size_t delta_halvings = 0;
    double max_contraction = 0.0;
    double max_mass_drift = 0.0;
    double max_slope_violation = 0.0;  // slopes of F outside (0, 1] or decreasing
};

struct SolverOptions {
    double delta = 0.05;
    double tol = 1e-10;
    std::size_t max_picard = 50;
    double T_final = 1.0;
    double tau_final = std::numeric_limits<double>::infinity();
    std::vector<double> snapshot_times;  // t = 0 is always kept
    std::size_t survivor_floor = 16;
    bool reseed = true;
    double reseed_gap = 1.0 / 256.0;  // target spacing near x = 0, in units of L
    std::size_t max_steps = 1000000;
    double mass_tol = 1e-4;
};

CoarseningTrace advance_global(CharacteristicEnsemble& e, const SolverOptions& options);

// Inserts midpoint labels where survivors within 2L of the boundary are farther
// apart than gap * L. Returns the number inserted.
std::size_t reseed_boundary(CharacteristicEnsemble& e, double L_hint, double gap,
                            std::size_t capacity);

struct IdentityReport {
    std::size_t samples = 0;
    std::size_t within = 0;
    double fraction_within = 0.0;
    double max_rel_error = 0.0;
    double tolerance = 0.02;
    bool upper_bound_ok = true;   // Lambda(T) <= Lambda(0) + sup beta0 T
    bool energy_bound_ok = true;  // E(T) <= Lambda(T)^{-1/3}
    double worst_upper_margin = 0.0;
    double worst_energy_margin = 0.0;
};

IdentityReport coarsening_identity_check(const CoarseningTrace& trace, double sup_beta0,
                                         double tolerance = 0.02);

struct FlowBeta {
    std::vector<double> x;
    std::vector<double> transported;  // beta0(F) F' h / h0(F)
    std::vector<double> direct;       // beta_from_profile on the current grid
    double discrepancy = 0.0;         // sup over interior trusted nodes
    double grid_spacing = 0.0;
};

FlowBeta beta_along_flow(const CharacteristicEnsemble& e, double L_hint = 0.0);
FlowBeta beta_along_flow(const EnsembleSnapshot& snap, const SurvivalProfile& initial);

struct SnapshotDiagnostics {
    double t = 0.0;
    double sup_beta = 0.0;
    double min_g = 0.0;
    double max_g_increase = 0.0;     // relative, over adjacent nodes
    double max_beta_decrease = 0.0;  // over adjacent trusted nodes
    std::vector<double> x, g, beta;
};

struct BetaEvolutionReport {
    std::vector<SnapshotDiagnostics> snapshots;
    bool g_nonnegative = true;
    bool sup_beta_nonincreasing = true;
    bool g_monotone = true;     // only asserted when sup beta(., 0) <= 1
    bool beta_monotone = true;  // only asserted when beta(., 0) is also increasing
    bool monotone_hypothesis = false;
    bool increasing_hypothesis = false;
    std::vector<std::string> violations;
};

// g(x, t) at the snapshot nodes x > 0 from exact per-cell integrals.
std::vector<double> g_function(const SurvivalProfile& profile, double L);

BetaEvolutionReport beta_evolution_diagnostics(const CoarseningTrace& trace, double beta_tol = 2e-3,
                                               double g_tol = 1e-6);

struct NormalizedView {
    double tau = 0.0, gamma = 0.0, Lambda = 0.0;
    std::vector<double> y, w, beta;
    double w_at_zero = 0.0;
    double mass = 0.0;
};

NormalizedView normalized_view(const EnsembleSnapshot& snap);

struct StationarityReport {
    double sup_diff = 0.0;      // sup_y |w*(y, later) - w*(y, earlier)| over both node sets
    double at_y = 0.0;
    // The same sup away from the support end, where w* may vanish like a small
    // power and any end displacement shows up magnified.
    double sup_diff_interior = 0.0;
    double interior_fraction = 0.99;
    double beta_earlier = 0.0, beta_later = 0.0;
};
StationarityReport stationarity(const EnsembleSnapshot& earlier, const EnsembleSnapshot& later,
                                double interior_fraction = 0.99);

struct DyadicLevels {
    double tau = 0.0;
    std::vector<int> N;            // level index of each interval start
    std::vector<double> length;    // |I_N|
};

struct DyadicReport {
    std::vector<DyadicLevels> per_snapshot;
    std::vector<double> ratio_at_zero;  // |I_N(0)| / |I_{N+1}(0)| for N = 1, 2, ...
    double predicted_ratio = 0.0;       // 2^{1/beta1 - 1}
    double beta1 = 0.0;
    bool insufficient_resolution = false;
    bool ratio_nondecreasing = true;
    double worst_ratio_drop = 0.0;
};

// Levels are w = 2^{-N} w(0, 0); they ride the characteristics, so at later
// times they are found on the transported w rather than the normalized one.
DyadicReport dyadic_diagnostics(const CoarseningTrace& trace, int max_level = 12,
                                double ratio_tol = 1e-6);

}  // namespace lsw
