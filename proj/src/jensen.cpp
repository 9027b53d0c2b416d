#include "lsw/jensen.hpp"

#include <algorithm>
#include <cmath>

namespace lsw {

namespace {

constexpr double kBetaCap = 1e8;
constexpr double kRoundoff = 1e-12;

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("Jensen certificates need 0 < alpha < 1");
}

double truncated_mean_bound(double xi, double beta0) {
    return 2.0 * (1.0 + xi) / (std::sqrt(1.0 + (1.0 + xi) * beta0) + 1.0);
}

std::vector<double> xi_grid() {
    std::vector<double> xs;
    for (int k = 0; k < 32; ++k) xs.push_back(2.0 * std::pow(1e-3, (31.0 - k) / 31.0));
    return xs;
}

}  // namespace

JensenCertificate reverse_jensen(const SurvivalProfile& profile, double alpha) {
    check_alpha(alpha);
    JensenCertificate c;
    c.alpha = alpha;
    c.mean = mean(profile);
    c.lhs = moment(profile, alpha);
    c.eta_observed = 1.0 - c.lhs / std::pow(c.mean, alpha);
    const double sup_beta = beta_from_profile(profile).sup();
    if (!std::isfinite(sup_beta) || sup_beta > kBetaCap) {
        c.applicable = false;
        c.note = "sup beta is not finite";
        return c;
    }
    const double xstar = profile.quantile(0.5 * profile.w0());
    const double c1 = std::min(xstar, profile.support_end()) / c.mean;
    c.C_used = 0.5 * std::pow(c1, alpha);
    c.rhs_reverse = c.C_used * std::pow(c.mean, alpha);
    c.pass = c.lhs >= c.rhs_reverse * (1.0 - kRoundoff) &&
             c.lhs <= std::pow(c.mean, alpha) * (1.0 + kRoundoff);
    return c;
}

double sharp_eta_bound(double alpha, double beta0) {
    double best = 0.0;
    for (double xi : xi_grid()) {
        double z = 1.0 + xi;
        double phi = 1.0 + alpha * (z - 1.0) - std::pow(z, alpha);
        double mass_above = 1.0 - truncated_mean_bound(xi, beta0);
        if (mass_above > 0.0) best = std::max(best, phi * mass_above / z);
    }
    return best;
}

JensenCertificate sharp_jensen(const SurvivalProfile& profile, double alpha) {
    check_alpha(alpha);
    JensenCertificate c;
    c.alpha = alpha;
    c.mean = mean(profile);
    c.lhs = moment(profile, alpha);
    c.eta_observed = 1.0 - c.lhs / std::pow(c.mean, alpha);
    const double beta0 = beta_from_profile(profile).inf();
    if (!(beta0 > 0.0)) {
        c.applicable = false;
        c.note = "inf beta is zero";
        return c;
    }
    bool truncated_ok = true;
    for (double xi : xi_grid()) {
        double a = (1.0 + xi) * c.mean;
        double lhs = expectation_below(profile, [](double x) { return x; }, a);
        if (lhs > truncated_mean_bound(xi, beta0) * c.mean * (1.0 + 1e-9)) truncated_ok = false;
    }
    c.eta_used = sharp_eta_bound(alpha, beta0);
    c.rhs_sharp = (1.0 - c.eta_used) * std::pow(c.mean, alpha);
    c.pass = truncated_ok && c.eta_used > 0.0 && c.lhs <= c.rhs_sharp * (1.0 + kRoundoff);
    if (!truncated_ok) c.note = "truncated-mean bound violated";
    return c;
}

TailBoundReport tail_and_conditional_bounds(const SurvivalProfile& profile, double tolerance) {
    TailBoundReport r;
    const BetaProfile bp = beta_from_profile(profile);
    const TailMass tm = integrate_tail(profile);
    r.beta0 = bp.inf();
    r.mean = tm.h[0] / profile.w0();
    r.conditional_violation = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < bp.trusted(); ++i) {
        const double x = profile.x[i], w = profile.w[i];
        if (!(w > 0.0)) continue;
        double bound = r.mean + r.beta0 * x;
        double cond = x + tm.h[i] / w;
        r.conditional_violation = std::max(r.conditional_violation, (bound - cond) / bound);
        ++r.checks;
    }
    r.tail_violation = -std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 64; ++k) {
        double lambda = std::pow(10.0, -2.0 + 4.0 * k / 64.0);
        double p = profile.eval(lambda * r.mean) / profile.w0();
        r.tail_violation = std::max(r.tail_violation, p - 1.0 / (1.0 + r.beta0 * lambda));
        ++r.checks;
    }
    r.pass = r.conditional_violation <= tolerance && r.tail_violation <= tolerance;
    return r;
}

JensenGapReport quantitative_jensen_gap(const SurvivalProfile& profile, double alpha) {
    check_alpha(alpha);
    JensenGapReport r;
    r.alpha = alpha;
    const double m = mean(profile);
    const double ma = std::pow(m, alpha);
    const double moment_a = moment(profile, alpha);
    r.lhs = expectation(profile, [&](double x) { return std::pow(std::fabs(ma - std::pow(x, alpha)), 1.0 / alpha); },
                        {m});
    r.rhs = std::pow(m, 1.0 - alpha) * (ma - moment_a) / alpha;
    r.ratio = r.rhs > 0.0 ? r.lhs / r.rhs : 0.0;
    r.g_expectation = expectation(
        profile,
        [&](double x) {
            double z = x / m, za = std::pow(z, alpha);
            return std::pow(std::fabs(za - 1.0), 1.0 / alpha) + za / alpha - z;
        },
        {m});
    r.g_bound = 1.0 / alpha - 1.0;
    r.asserted = alpha <= 0.5;
    if (r.asserted) {
        const double slack = 1e-9 * (1.0 + std::fabs(r.rhs));
        r.pass = r.lhs <= r.rhs + slack && r.g_expectation <= r.g_bound * (1.0 + 1e-9);
    }
    return r;
}

}  // namespace lsw
