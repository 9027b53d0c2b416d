#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lsw/profile.hpp"

namespace lsw {

// Convex increasing map with F(0) > 0 and 0 < F' < 1.
class MapF {
public:
    enum class Kind { linear, cube_root, tabulated };

    static MapF linear(double lambda);  // (1 - lambda) + lambda x
    static MapF cube_root();            // 2^{1/3} + x - (1 + x)^{1/3}
    // Piecewise linear through (x[i], F[i]) with x[0] = 0, extended linearly.
    static MapF tabulated(std::vector<double> x, std::vector<double> f);

    Kind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    double operator()(double x) const;
    double derivative(double x) const;
    double inverse(double y) const;  // bisection, 60 halvings; needs y >= F(0)
    // Safeguarded Newton inside a known bracket F(lo) <= y <= F(hi).
    double inverse(double y, double lo, double hi) const;

    // Throws InvalidMap when F(0) <= 0, F' leaves (0, 1) or F is not convex
    // on sampled points of [0, x_max].
    void validate(double x_max = 100.0) const;

private:
    MapF(Kind kind, std::string name) : kind_(kind), name_(std::move(name)) {}
    Kind kind_;
    std::string name_;
    double lambda_ = 0.0;
    std::vector<double> tx_, tf_;
};

struct FixedPointGamma {
    double a_F = 0.0;
    double gamma_F = 0.0;  // +inf when x F'(x) <= F(x) on all of [0, x_max]
};
FixedPointGamma fixed_point_and_gamma(const MapF& F, double x_max = 1e6);

// x -> w(F(x)) on a fresh quantile grid.
SurvivalProfile apply_map(const SurvivalProfile& profile, const MapF& F, const GridOptions& grid = {});

// beta of the image from the input's beta: at each node x of `image_grid`,
//   beta(F(x)) F'(x) int_{F(x)} w(z)/F'(F^{-1}(z)) dz / int_{F(x)} w(z) dz.
BetaProfile beta_transform(const SurvivalProfile& profile, const MapF& F,
                           const std::vector<double>& image_grid);

struct Normalized {
    double lambda = 1.0;
    SurvivalProfile profile;  // x -> w(x / lambda)
};
// Dilates so that <(lambda X)^rho>^{1/rho} = K.
Normalized normalize(const SurvivalProfile& profile, double rho, double K);

struct IterationRecord {
    std::size_t n = 0;
    double lambda = 0.0;
    double mean = 0.0;
    double sup_beta = 0.0;
    double inf_beta = 0.0;
    double ratio_third = 0.0;  // <X^a>/<X>^a for a = 1/3, 1/2, 2/3
    double ratio_half = 0.0;
    double ratio_two_thirds = 0.0;
    double sup_X = 0.0;
    // Largest excess of beta(image) over beta_input(F(x)) at trusted nodes, in
    // absolute terms, using the image's own finite-difference beta.
    double l2_excess = 0.0;
    // Same excess for the beta_transform formula, and the opposite deficit.
    double l2_excess_formula = 0.0;
    double l2_deficit_formula = 0.0;
    // Largest |beta_transform - beta(image)|.
    double formula_gap = 0.0;
};

struct IterateOptions {
    double rho = 1.0 / 3.0;
    double K = 1.0;
    std::size_t steps = 100;
    GridOptions grid;
    bool check_formula = true;  // evaluate beta_transform each step
};

struct IterationState {
    std::size_t n = 0;
    SurvivalProfile profile;
    BetaProfile beta;
    double lambda = 1.0;
    std::vector<IterationRecord> history;
};

// X_{n+1} = T_F(lambda_n X_n). Throws DegenerateImage naming the step when
// F(0) >= lambda_n ||X_n||.
IterationState iterate(const SurvivalProfile& profile0, const MapF& F, const IterateOptions& options);

}  // namespace lsw
