#pragma once

#include <cstddef>
#include <vector>

#include "lsw/profile.hpp"

namespace lsw {

// Zeros of f(z) = 1 - z^{1/3} + alpha z. At alpha = 4/27 both equal 27/8.
struct FAlphaRoots {
    double a = 0.0;      // smallest positive zero, in (1, (1/3alpha)^{3/2}]
    double upper = 0.0;  // the other zero
};
FAlphaRoots f_alpha_roots(double alpha);

// Stationary profile w*(y) = exp(-alpha Gamma(gamma y)) on [0, a/gamma), with
// Gamma(z) = int_0^z dz' / f(z'). In u = z^{1/3} the integrand has a simple pole
// at b = a^{1/3}; it is split off as A/(b - u) and the remainder integrated
// numerically. Near the end w* behaves like (a - z)^{alpha A}.
class SelfSimilarProfile {
public:
    SelfSimilarProfile(double alpha, double margin = 1e-3);

    double alpha() const { return alpha_; }
    double a() const { return a_; }
    double gamma() const { return gamma_; }
    double pole_coefficient() const { return pole_; }
    double end_exponent() const { return alpha_ * pole_; }
    // int_0^a z^{-2/3} exp(-alpha Gamma) dz - 3.
    double z4_residual() const { return z4_ - 3.0; }
    double support_end() const { return a_ / gamma_; }

    double Gamma(double z) const;
    double w_star(double y) const;
    double g_alpha(double z) const;
    // g at nondecreasing z, sharing the tail integral between neighbours.
    std::vector<double> g_alpha(const std::vector<double>& z) const;
    // Slope of g at the end from its linear expansion there.
    double g_end_slope() const;
    // (1 - z^{1/3} + alpha z) exp(-alpha Gamma(z)) and the tail integral
    // int_z^a z'^{-2/3}/3 exp(-alpha Gamma) dz'; equal for every z.
    double ac4_lhs(double z) const;
    double ac4_rhs(double z) const;

private:
    double regular(double u) const;            // int_0^u (c2 s + c1)/q(s) ds
    double q(double u) const;
    double one_minus_u_over_b(double z) const;  // 1 - (z/a)^{1/3}, stable near a
    double s_of(double z) const;
    double u_of_s(double s) const;
    double tail_integral_s(double s, bool cubic_weight) const;  // int_0^s ... ds'

    double alpha_, a_, b_, pole_, c1_, c2_, m_;
    double gamma_ = 0.0, z4_ = 0.0;
    std::vector<double> table_u_, table_r_;
};

struct GAlphaReport {
    double g0 = 0.0, g0_expected = 0.0;
    double g_end = 0.0, g_end_expected = 0.0;  // extrapolated from the last interior sample
    double max_decrease = 0.0;  // largest g[i] - g[i+1] over adjacent samples
    double ode_residual = 0.0;  // [f g] - alpha int (g - 1) over each sample interval, per length
    double ac4_residual_zero = 0.0, ac4_residual_half = 0.0;
    double min_lower_margin = 0.0;  // min of g - 3 alpha z^{2/3}
    double log_total_variation = 0.0;
    std::vector<double> z, g;
};
GAlphaReport g_alpha_report(const SelfSimilarProfile& profile, std::size_t samples = 2048);

SelfSimilarProfile build_self_similar(double alpha, double margin = 1e-3);
// w* as a unit-mass SurvivalProfile with w(0) = 1.
SurvivalProfile seed_solver(const SelfSimilarProfile& profile, const GridOptions& grid = {});

}  // namespace lsw
