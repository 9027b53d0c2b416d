#include "lsw/families.hpp"

#include <cmath>
#include <numbers>

#include "lsw/quadrature.hpp"
#include "lsw/self_similar.hpp"

namespace lsw {

const std::vector<FamilyInfo>& family_catalog() {
    static const std::vector<FamilyInfo> catalog{
        {"constant-beta", "beta=0.5", "h = [1-(1-b)x]^{1/(1-b)} (b<1), e^{-x} (b=1), [1+(b-1)x]^{-1/(b-1)} (b>1)"},
        {"example1", "eps=0.3", "h = e^{-x}(1 + eps cos x), oscillating bounded beta"},
        {"example2", "eps=0.3,p=2", "h = (1-x)^{p+1}(1 + eps (1-x)^2 cos(1/(1-x))), no beta limit at x = 1"},
        {"power-tail", "eps=1", "c0 = K/(1+x)^{2+eps}, K = eps(1+eps) for unit mass"},
        {"exponential", "", "w = e^{-x}"},
        {"indicator", "", "w = 1 on [0, 1]: all clusters of volume 1"},
        {"self-similar", "alpha=0.05", "stationary normalized profile w*, 0 < alpha < 4/27"},
    };
    return catalog;
}

SurvivalProfile indicator_profile() {
    SurvivalProfile p{{0.0, 1.0}, {1.0, 1.0}, TailModel::compact()};
    p.validate();
    return p;
}

SurvivalProfile exponential_profile(const GridOptions& grid) {
    SampledFunction f;
    f.w = [](double x) { return std::exp(-x); };
    f.quantile = [](double level) { return -std::log(level); };
    f.tail_at = [](double, double) { return TailModel::exponential(1.0); };
    return sample_profile(f, grid);
}

SurvivalProfile constant_beta_profile(double beta, const GridOptions& grid) {
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw DomainError("constant-beta needs beta >= 0");
    if (beta == 0.0) return indicator_profile();
    if (beta == 1.0) return exponential_profile(grid);
    SampledFunction f;
    if (beta < 1.0) {
        const double k = 1.0 - beta, e = beta / k;
        f.support_end = 1.0 / k;
        f.w = [k, e](double x) { double b = 1.0 - k * x; return b > 0.0 ? std::pow(b, e) : 0.0; };
        f.quantile = [k, e](double level) { return (1.0 - std::pow(level, 1.0 / e)) / k; };
    } else {
        const double k = beta - 1.0, e = beta / k;
        f.w = [k, e](double x) { return std::pow(1.0 + k * x, -e); };
        f.quantile = [k, e](double level) { return (std::pow(level, -1.0 / e) - 1.0) / k; };
        f.tail_at = [k, e](double, double) { return TailModel::power(e, 1.0 / k); };
    }
    return sample_profile(f, grid);
}

namespace {

// Quantile of a decreasing w by bisection on [lo, hi].
std::function<double(double)> bisect_quantile(std::function<double(double)> w, double hi) {
    return [w = std::move(w), hi](double level) {
        double a = 0.0, b = hi;
        if (w(b) >= level) return b;
        for (int i = 0; i < 200 && b - a > 1e-15 * b; ++i) {
            double m = 0.5 * (a + b);
            (w(m) >= level ? a : b) = m;
        }
        return 0.5 * (a + b);
    };
}

}  // namespace

double example1_beta(double eps, double x) {
    double c = std::cos(x), s = std::sin(x);
    double d = 1.0 + eps * c + eps * s;
    return (1.0 + eps * c) * (1.0 + 2.0 * eps * s) / (d * d);
}

SurvivalProfile example1_profile(double eps, const GridOptions& grid) {
    if (!(std::fabs(eps) < 0.5)) throw DomainError("example1 needs |eps| < 1/2");
    const double norm = 1.0 / (1.0 + eps);
    SampledFunction f;
    f.w = [eps, norm](double x) {
        return norm * std::exp(-x) * (1.0 + eps * std::cos(x) + eps * std::sin(x));
    };
    f.quantile = bisect_quantile(f.w, 60.0);
    // Exponential tail carrying the exact remaining mass h = w / rate.
    f.tail_at = [eps](double x, double) {
        double rate = (1.0 + eps * std::cos(x) + eps * std::sin(x)) / (1.0 + eps * std::cos(x));
        return TailModel::exponential(rate);
    };
    return sample_profile(f, grid);
}

SurvivalProfile example2_profile(double eps, double p, GridOptions grid) {
    if (!(p > 0.0)) throw DomainError("example2 needs p > 0");
    if (!(std::fabs(eps) < 0.5 * p * (p + 1.0) / (p + 3.0)))
        throw DomainError("example2 needs |eps| small relative to p");
    const double norm = 1.0 / (1.0 + eps * std::cos(1.0));
    SampledFunction f;
    f.support_end = 1.0;
    f.w = [eps, p, norm](double x) {
        double d = 1.0 - x;
        if (d <= 0.0) return 0.0;
        double q = 1.0 + eps * d * d * std::cos(1.0 / d);
        double dq = eps * (2.0 * d * std::cos(1.0 / d) + std::sin(1.0 / d));
        return norm * ((p + 1.0) * std::pow(d, p) * q + std::pow(d, p + 1.0) * dq);
    };
    f.quantile = bisect_quantile(f.w, 1.0);
    if (grid.end_gap <= 0.0) grid.end_gap = 1e-3;
    const double gap = grid.end_gap;
    if (!grid.feature_dx)
        grid.feature_dx = [gap](double x) {
            double d = 1.0 - x;
            return d <= gap ? -1.0 : 2.0 * std::numbers::pi * d * d / 16.0;
        };
    SurvivalProfile out = sample_profile(f, grid);
    // Drop feature nodes inside the end gap, keeping the end itself.
    SurvivalProfile trimmed;
    for (std::size_t i = 0; i < out.size(); ++i)
        if (i + 1 == out.size() || 1.0 - out.x[i] >= gap) {
            trimmed.x.push_back(out.x[i]);
            trimmed.w.push_back(out.w[i]);
        }
    trimmed.tail = TailModel::compact();
    trimmed.validate();
    return trimmed;
}

SurvivalProfile power_tail_profile(double eps, const GridOptions& grid) {
    if (!(eps > 0.0)) throw DomainError("power-tail needs eps > 0");
    SampledFunction f;
    f.w = [eps](double x) { return eps * std::pow(1.0 + x, -1.0 - eps); };
    f.quantile = [eps](double level) { return std::pow(level / eps, -1.0 / (1.0 + eps)) - 1.0; };
    f.tail_at = [eps](double, double) { return TailModel::power(1.0 + eps, 1.0); };
    return sample_profile(f, grid);
}

namespace {

double param(const std::map<std::string, double>& params, const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

}  // namespace

SurvivalProfile make_family(const std::string& id, const std::map<std::string, double>& params,
                            const GridOptions& grid) {
    for (const auto& f : family_catalog()) {
        if (f.id != id) continue;
        for (const auto& [key, value] : params)
            if (("," + f.params).find("," + key + "=") == std::string::npos)
                throw DomainError("family '" + id + "' has no parameter '" + key + "'");
    }
    if (id == "constant-beta") return constant_beta_profile(param(params, "beta", 0.5), grid);
    if (id == "example1") return example1_profile(param(params, "eps", 0.3), grid);
    if (id == "example2")
        return example2_profile(param(params, "eps", 0.3), param(params, "p", 2.0), grid);
    if (id == "power-tail") return power_tail_profile(param(params, "eps", 1.0), grid);
    if (id == "exponential") return exponential_profile(grid);
    if (id == "indicator") return indicator_profile();
    if (id == "self-similar")
        return seed_solver(build_self_similar(param(params, "alpha", 0.05)), grid);
    throw DomainError("unknown family '" + id + "'");
}

}  // namespace lsw
