#pragma once

#include <functional>
#include <vector>

namespace lsw {

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

// Gauss-Legendre rule with n points, cached per n.
const GaussRule& gauss_legendre(int n);

// Fixed-order Gauss-Legendre over [a, b].
double integrate_gl(const std::function<double(double)>& f, double a, double b, int n = 16);

// Adaptive Gauss-Kronrod (7/15) with absolute + relative tolerance.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol = 1e-14, double rel_tol = 1e-13, int max_depth = 40);

// Root of a monotone function on [lo, hi] by plain bisection; f(lo) and f(hi)
// must have opposite signs (or one of them vanishes).
double bisect(const std::function<double(double)>& f, double lo, double hi, int iterations = 200);

}  // namespace lsw
