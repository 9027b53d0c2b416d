#pragma once

#include <string>

#include "lsw/profile.hpp"

namespace lsw {

struct JensenCertificate {
    double alpha = 0.0;
    double lhs = 0.0;   // <X^alpha>
    double mean = 0.0;  // <X>
    double rhs_reverse = 0.0;  // C <X>^alpha
    double rhs_sharp = 0.0;    // (1 - eta) <X>^alpha
    double C_used = 0.0;
    double eta_used = 0.0;      // certified lower bound on the Jensen gap
    double eta_observed = 0.0;  // 1 - <X^alpha>/<X>^alpha
    bool applicable = true;
    bool pass = false;
    std::string note;
};

// C = C1^alpha / 2 with C1 <X> the largest x where w(x)/w(0) >= 1/2.
// Inapplicable when sup beta is not finite.
JensenCertificate reverse_jensen(const SurvivalProfile& profile, double alpha);

// Lower bound for the gap from beta0 = inf beta alone. With Z = X/<X> and
// phi(z) = 1 + alpha(z-1) - z^alpha >= 0 one has 1 - <Z^alpha> = E[phi(Z)], and
// phi(z)/z increases for z >= 1, so
//   eta >= phi(1+xi) E[Z; Z >= 1+xi] / (1+xi) >= phi(1+xi)(1 - B(xi)) / (1+xi)
// where B(xi) = 2(1+xi)/(sqrt(1+(1+xi)beta0)+1) bounds E[Z; Z < 1+xi].
// The certificate also checks that truncated-mean bound on 32 values of xi.
JensenCertificate sharp_jensen(const SurvivalProfile& profile, double alpha);
double sharp_eta_bound(double alpha, double beta0);

struct TailBoundReport {
    double beta0 = 0.0;
    double mean = 0.0;
    // max over the grid of (<X> + beta0 x) - E[X | X > x], relative to the bound
    double conditional_violation = 0.0;
    // max over lambda of P(X > lambda <X>) - 1/(1 + beta0 lambda)
    double tail_violation = 0.0;
    std::size_t checks = 0;
    bool pass = false;
};
TailBoundReport tail_and_conditional_bounds(const SurvivalProfile& profile, double tolerance = 1e-6);

struct JensenGapReport {
    double alpha = 0.0;
    double lhs = 0.0;  // E|<X>^alpha - X^alpha|^{1/alpha}
    double rhs = 0.0;  // (1/alpha) <X>^{1-alpha} (<X>^alpha - <X^alpha>)
    double ratio = 0.0;
    double g_expectation = 0.0;  // E[g(X/<X>)], g(z) = |z^a - 1|^{1/a} + z^a/a - z
    double g_bound = 0.0;        // 1/alpha - 1
    bool asserted = false;  // the inequality is only claimed for alpha <= 1/2
    bool pass = true;
};
JensenGapReport quantitative_jensen_gap(const SurvivalProfile& profile, double alpha);

}  // namespace lsw
