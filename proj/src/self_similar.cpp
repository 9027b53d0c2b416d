#include "lsw/self_similar.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lsw/quadrature.hpp"

namespace lsw {

namespace {

constexpr double kAlphaMax = 4.0 / 27.0;
constexpr std::size_t kTableCells = 2048;

double f_alpha(double alpha, double z) { return 1.0 - std::cbrt(z) + alpha * z; }

}  // namespace

FAlphaRoots f_alpha_roots(double alpha) {
    if (!(alpha > 0.0)) throw DomainError("f_alpha needs alpha > 0");
    if (alpha > kAlphaMax) throw DomainError("f_alpha has no positive zeros for alpha > 4/27");
    const double zmin = std::pow(1.0 / (3.0 * alpha), 1.5);
    if (alpha == kAlphaMax) return {zmin, zmin};
    auto f = [alpha](double z) { return f_alpha(alpha, z); };
    FAlphaRoots r;
    r.a = bisect(f, 1.0, zmin);
    double hi = 2.0 * zmin;
    while (f(hi) < 0.0) hi *= 2.0;
    r.upper = bisect(f, zmin, hi);
    return r;
}

SelfSimilarProfile::SelfSimilarProfile(double alpha, double margin) : alpha_(alpha) {
    if (!(alpha > 0.0) || alpha > kAlphaMax - margin)
        throw DomainError("self-similar profile needs 0 < alpha <= 4/27 - " + std::to_string(margin) +
                          "; near 4/27 the two zeros of f merge and the profile degenerates");
    a_ = f_alpha_roots(alpha).a;
    b_ = std::cbrt(a_);
    const double qb = 1.0 - 3.0 * alpha * b_ * b_;
    pole_ = 3.0 * b_ * b_ / qb;
    c2_ = 3.0 + pole_ * alpha;
    c1_ = b_ * (3.0 + 2.0 * pole_ * alpha);
    m_ = 1.0 / (1.0 + alpha * pole_);

    table_u_.resize(kTableCells + 1);
    table_r_.resize(kTableCells + 1);
    table_r_[0] = 0.0;
    for (std::size_t k = 0; k <= kTableCells; ++k) table_u_[k] = b_ * k / kTableCells;
    auto integrand = [this](double s) { return (c2_ * s + c1_) / q(s); };
    for (std::size_t k = 1; k <= kTableCells; ++k)
        table_r_[k] = table_r_[k - 1] + integrate_adaptive(integrand, table_u_[k - 1], table_u_[k]);

    // With u = b(1 - s^m) the factor (1 - u/b)^{alpha A} du becomes b m ds.
    z4_ = 3.0 * b_ * m_ * integrate_adaptive([this](double s) { return std::exp(alpha_ * regular(u_of_s(s))); },
                                             0.0, 1.0, 1e-15, 1e-14);
    gamma_ = tail_integral_s(1.0, true);
}

double SelfSimilarProfile::q(double u) const {
    return 1.0 - alpha_ * b_ * b_ - alpha_ * b_ * u - alpha_ * u * u;
}

double SelfSimilarProfile::regular(double u) const {
    u = std::clamp(u, 0.0, b_);
    auto k = static_cast<std::size_t>(u / b_ * kTableCells);
    k = std::min(k, kTableCells);
    double base = table_r_[k];
    if (u == table_u_[k]) return base;
    return base + integrate_gl([this](double s) { return (c2_ * s + c1_) / q(s); }, table_u_[k], u, 16);
}

double SelfSimilarProfile::one_minus_u_over_b(double z) const {
    if (z <= 0.0) return 1.0;
    if (z >= a_) return 0.0;
    return -std::expm1(std::log1p(-(a_ - z) / a_) / 3.0);
}

double SelfSimilarProfile::s_of(double z) const {
    return std::pow(one_minus_u_over_b(z), 1.0 / m_);
}

double SelfSimilarProfile::u_of_s(double s) const { return b_ * (1.0 - std::pow(s, m_)); }

double SelfSimilarProfile::tail_integral_s(double s, bool cubic_weight) const {
    if (s <= 0.0) return 0.0;
    auto f = [this, cubic_weight](double t) {
        double u = u_of_s(t);
        double e = std::exp(alpha_ * regular(u));
        return cubic_weight ? 3.0 * u * u * e : e;
    };
    return b_ * m_ * integrate_adaptive(f, 0.0, s, 1e-15, 1e-14);
}

double SelfSimilarProfile::Gamma(double z) const {
    if (z <= 0.0) return 0.0;
    if (z >= a_) return std::numeric_limits<double>::infinity();
    return -pole_ * std::log(one_minus_u_over_b(z)) - regular(std::cbrt(z));
}

double SelfSimilarProfile::w_star(double y) const {
    double z = gamma_ * y;
    if (z <= 0.0) return 1.0;
    if (z >= a_) return 0.0;
    double d = one_minus_u_over_b(z);
    return std::pow(d, end_exponent()) * std::exp(alpha_ * regular(std::cbrt(z)));
}

double SelfSimilarProfile::g_alpha(double z) const {
    if (z >= a_) return 3.0 * alpha_ * b_ * b_;
    double s = s_of(std::max(z, 0.0));
    double u = std::cbrt(std::max(z, 0.0));
    if (s <= 0.0) return 3.0 * alpha_ * b_ * b_;
    // alpha J / (f e^{-alpha Gamma}) with f e^{-alpha Gamma} = b s q(u) e^{alpha R(u)}.
    double j = tail_integral_s(s, true);
    return alpha_ * j / (b_ * s * q(u) * std::exp(alpha_ * regular(u)));
}

std::vector<double> SelfSimilarProfile::g_alpha(const std::vector<double>& z) const {
    std::vector<double> out(z.size());
    auto f = [this](double t) {
        double u = u_of_s(t);
        return 3.0 * u * u * std::exp(alpha_ * regular(u));
    };
    // s decreases as z grows, so walk from the end of the support inwards.
    double j = 0.0, s_prev = 0.0;
    for (std::size_t k = z.size(); k-- > 0;) {
        if (k + 1 < z.size() && z[k] > z[k + 1]) throw DomainError("g_alpha needs nondecreasing z");
        const double zk = std::max(z[k], 0.0);
        const double s = zk >= a_ ? 0.0 : s_of(zk);
        if (s <= 0.0) {
            out[k] = 3.0 * alpha_ * b_ * b_;
            continue;
        }
        j += b_ * m_ * integrate_adaptive(f, s_prev, s, 1e-15, 1e-14);
        s_prev = s;
        const double u = std::cbrt(zk);
        out[k] = alpha_ * j / (b_ * s * q(u) * std::exp(alpha_ * regular(u)));
    }
    return out;
}

double SelfSimilarProfile::g_end_slope() const {
    return 2.0 * alpha_ / (b_ * (2.0 - 3.0 * alpha_ * b_ * b_));
}

double SelfSimilarProfile::ac4_lhs(double z) const {
    double u = std::cbrt(std::max(z, 0.0));
    return b_ * s_of(z) * q(u) * std::exp(alpha_ * regular(u));
}

double SelfSimilarProfile::ac4_rhs(double z) const { return tail_integral_s(s_of(z), false); }

GAlphaReport g_alpha_report(const SelfSimilarProfile& p, std::size_t samples) {
    GAlphaReport r;
    const double alpha = p.alpha(), a = p.a(), b = std::cbrt(a);
    r.g0_expected = alpha * p.gamma();
    r.g_end_expected = 3.0 * alpha * b * b;
    // Uniform in z plus a geometric approach to the end.
    for (std::size_t i = 0; i < samples; ++i) r.z.push_back(a * i / samples);
    for (int k = 3; k <= 9; ++k)
        for (int j = 9; j >= 1; --j) r.z.push_back(a - a * j * std::pow(10.0, -k - 1));
    std::sort(r.z.begin(), r.z.end());
    r.z.erase(std::unique(r.z.begin(), r.z.end()), r.z.end());
    // Three Gauss nodes per sample interval in u = z^{1/3}, where g is smooth,
    // for the integrated form of the ODE.
    const GaussRule& rule = gauss_legendre(3);
    std::vector<double> all = r.z;
    for (std::size_t i = 0; i + 1 < r.z.size(); ++i) {
        const double u0 = std::cbrt(r.z[i]), u1 = std::cbrt(r.z[i + 1]);
        for (double node : rule.nodes) {
            const double u = 0.5 * (u0 + u1) + 0.5 * (u1 - u0) * node;
            all.push_back(u * u * u);
        }
    }
    std::vector<std::size_t> order(all.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return all[x] < all[y]; });
    std::vector<double> sorted(all.size());
    for (std::size_t i = 0; i < order.size(); ++i) sorted[i] = all[order[i]];
    const std::vector<double> gs = p.g_alpha(sorted);
    std::vector<double> gall(all.size());
    for (std::size_t i = 0; i < order.size(); ++i) gall[order[i]] = gs[i];
    r.g.assign(gall.begin(), gall.begin() + static_cast<std::ptrdiff_t>(r.z.size()));

    r.g0 = r.g.front();
    r.g_end = r.g.back() + p.g_end_slope() * (a - r.z.back());
    r.min_lower_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < r.z.size(); ++i) {
        r.min_lower_margin = std::min(r.min_lower_margin, r.g[i] - 3.0 * alpha * std::pow(r.z[i], 2.0 / 3.0));
        if (i + 1 < r.z.size()) {
            r.max_decrease = std::max(r.max_decrease, r.g[i] - r.g[i + 1]);
            r.log_total_variation += std::fabs(std::log(r.g[i + 1] / r.g[i]));
        }
    }
    // [f g] over each interval against alpha int (g - 1) dz, per unit length.
    auto fg = [&](std::size_t i) { return f_alpha(alpha, r.z[i]) * r.g[i]; };
    std::size_t at = r.z.size();
    for (std::size_t i = 0; i + 1 < r.z.size(); ++i) {
        const double u0 = std::cbrt(r.z[i]), u1 = std::cbrt(r.z[i + 1]);
        double integral = 0.0;
        for (std::size_t n = 0; n < rule.nodes.size(); ++n, ++at) {
            const double u = 0.5 * (u0 + u1) + 0.5 * (u1 - u0) * rule.nodes[n];
            integral += rule.weights[n] * (gall[at] - 1.0) * 3.0 * u * u;
        }
        integral *= 0.5 * (u1 - u0);
        const double res = std::fabs(fg(i + 1) - fg(i) - alpha * integral) / (r.z[i + 1] - r.z[i]);
        r.ode_residual = std::max(r.ode_residual, res);
    }
    r.ac4_residual_zero = std::fabs(p.ac4_lhs(0.0) - p.ac4_rhs(0.0));
    r.ac4_residual_half = std::fabs(p.ac4_lhs(0.5 * a) - p.ac4_rhs(0.5 * a));
    return r;
}

SelfSimilarProfile build_self_similar(double alpha, double margin) {
    return SelfSimilarProfile(alpha, margin);
}

SurvivalProfile seed_solver(const SelfSimilarProfile& p, const GridOptions& grid) {
    SampledFunction f;
    f.support_end = p.support_end();
    f.w = [&p](double y) { return p.w_star(y); };
    f.quantile = [&p](double level) {
        double lo = 0.0, hi = p.support_end();
        for (int i = 0; i < 200 && hi - lo > 1e-16 * hi; ++i) {
            double mid = 0.5 * (lo + hi);
            (p.w_star(mid) >= level ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };
    GridOptions g = grid;
    return normalize_mass(sample_profile(f, g));
}

}  // namespace lsw
