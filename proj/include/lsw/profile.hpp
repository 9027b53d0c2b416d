#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "lsw/errors.hpp"

namespace lsw {

enum class TailKind { compact, exponential, power };

// What w does beyond the last grid node x_M.
//   compact:     w = 0 (a jump from w(x_M) is allowed: the block/Dirac idiom)
//   exponential: w = w_M exp(-rate (x - x_M))
//   power:       w = w_M ((x + shift) / (x_M + shift))^{-p},  p > 1
struct TailModel {
    TailKind kind = TailKind::compact;
    double rate = 0.0;
    double p = 0.0;
    double shift = 0.0;

    static TailModel compact() { return {}; }
    static TailModel exponential(double rate) { return {TailKind::exponential, rate, 0.0, 0.0}; }
    static TailModel power(double p, double shift) { return {TailKind::power, 0.0, p, shift}; }
};

const char* tail_name(TailKind k);

// Piecewise-linear survival function on a nonuniform grid plus a tail model.
struct SurvivalProfile {
    std::vector<double> x;
    std::vector<double> w;
    TailModel tail;

    void validate() const;  // throws InvalidProfile / NonIntegrableTail
    std::size_t size() const { return x.size(); }
    double w0() const { return w.front(); }
    bool compact() const { return tail.kind == TailKind::compact; }
    double support_end() const {
        return compact() ? x.back() : std::numeric_limits<double>::infinity();
    }
    double eval(double at) const;
    // Four-point Lagrange interpolation inside the grid (linear in the first and
    // last cells), clipped to the bracketing node values. Used when a profile is
    // resampled and the kinks of the linear interpolant would pollute w''.
    double eval_smooth(double at) const;
    // -w'(at) inside the tail region (analytic), 0 for compact.
    double tail_density(double at) const;
    double tail_mass() const;  // integral of w beyond x_M
    // Generalized inverse: the largest x with w(x) >= level (0 when level >= w(0)).
    double quantile(double level) const;
};

// h(x_i) = integral of w from x_i to infinity, exact for the representative.
// When a compact profile falls to w = 0 at its end, the last cell uses the
// power law w ~ (end - x)^end_power fitted through the two previous nodes
// instead of the linear interpolant, which misses a (end - x)^p root.
struct TailMass {
    SurvivalProfile profile;
    std::vector<double> h;
    double end_power = 1.0;
    double eval(double at) const;
};

// beta = h'' h / (h')^2 on the grid of a profile. c holds -w' at the nodes.
// The last `low_confidence` nodes are where the one-sided estimate degrades.
struct BetaProfile {
    std::vector<double> x;
    std::vector<double> beta;
    std::vector<double> c;
    std::size_t low_confidence = 0;

    double eval(double at) const;
    std::size_t trusted() const { return x.size() - low_confidence; }
    double sup() const;  // over trusted nodes
    double inf() const;
};

TailMass integrate_tail(const SurvivalProfile& profile);
BetaProfile beta_from_profile(const SurvivalProfile& profile);
// Reconstructs w from beta and the mean, normalized to unit mass (w(0) = 1/mean).
SurvivalProfile profile_from_beta(const BetaProfile& beta, double mean);

double mass(const SurvivalProfile& profile);
double mean(const SurvivalProfile& profile);  // h(0) / w(0)
double moment(const SurvivalProfile& profile, double alpha);
double energy(const SurvivalProfile& profile);  // (2/3) int x^{-1/3} w
// (1/3) int x^{-2/3} w / w(0), the cube root of L in the coarsening system.
double l_cbrt(const SurvivalProfile& profile);

struct RegularVariation {
    double p = 0.0;
    double residual = 0.0;  // rms deviation of local slopes from p
    bool oscillating = false;
    std::size_t nodes = 0;
};
RegularVariation regular_variation_exponent(const SurvivalProfile& profile);

struct FisherInformation {
    double direct = 0.0;     // int h'^2 / h
    double beta_form = 0.0;  // int (h'^2/h)(1 - beta) + boundary
    double boundary = 0.0;   // w(0) - w(end-)
};
FisherInformation fisher_information(const TailMass& tail);

// int phi(x) w(x) dx over the tail model region x > x_M.
double integrate_beyond_grid(const SurvivalProfile& profile, const std::function<double(double)>& phi,
                             double from = 0.0);
// int phi(x) w(x) dx over the whole support.
double integrate_against_w(const SurvivalProfile& profile, const std::function<double(double)>& phi);
// E[phi(X)] for P(X > x) = w(x)/w(0). `breaks` are points where phi has kinks.
double expectation(const SurvivalProfile& profile, const std::function<double(double)>& phi,
                   const std::vector<double>& breaks = {});
// E[phi(X); X < a] restricted to the part of the law below a.
double expectation_below(const SurvivalProfile& profile, const std::function<double(double)>& phi,
                         double a);

SurvivalProfile dilate(const SurvivalProfile& profile, double s);  // x -> w(x/s)
SurvivalProfile scale_values(const SurvivalProfile& profile, double k);
SurvivalProfile normalize_mass(const SurvivalProfile& profile);
// Drops the tail model (w beyond x_M set to 0) and rescales to unit mass.
SurvivalProfile truncate_to_compact(const SurvivalProfile& profile);

struct GridOptions {
    std::size_t nodes = 4096;
    int levels_per_octave = 8;
    double floor_ratio = 1e-12;  // stop quantile nodes at w(0) * floor_ratio
    double end_gap = 0.0;        // no quantile nodes closer than this to a compact end
    // Optional local spacing cap, e.g. to resolve oscillations.
    std::function<double(double)> feature_dx;
};

struct SampledFunction {
    std::function<double(double)> w;
    std::function<double(double)> quantile;  // level -> x
    double support_end = std::numeric_limits<double>::infinity();
    // Tail model fitted at the truncation point (x_M, w_M); unused when compact.
    std::function<TailModel(double, double)> tail_at;
};

// Quantile nodes at levels w(0) 2^{-k/levels_per_octave}, then uniform fill.
SurvivalProfile sample_profile(const SampledFunction& f, const GridOptions& opts = {});

double max_spacing(const SurvivalProfile& profile);

}  // namespace lsw
