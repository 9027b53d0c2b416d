#include "lsw/map_iteration.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lsw/quadrature.hpp"

namespace lsw {

MapF MapF::linear(double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0))
        throw InvalidMap("linear map needs 0 < lambda < 1 (got " + std::to_string(lambda) + ")");
    MapF f(Kind::linear, "linear");
    f.lambda_ = lambda;
    return f;
}

MapF MapF::cube_root() { return MapF(Kind::cube_root, "cube-root"); }

MapF MapF::tabulated(std::vector<double> x, std::vector<double> f) {
    if (x.size() < 2 || x.size() != f.size() || x.front() != 0.0)
        throw InvalidMap("tabulated map needs >= 2 points starting at x = 0");
    MapF m(Kind::tabulated, "tabulated");
    m.tx_ = std::move(x);
    m.tf_ = std::move(f);
    for (std::size_t i = 1; i < m.tx_.size(); ++i)
        if (!(m.tx_[i] > m.tx_[i - 1])) throw InvalidMap("tabulated map abscissae must increase");
    m.validate();
    return m;
}

double MapF::operator()(double x) const {
    switch (kind_) {
        case Kind::linear: return (1.0 - lambda_) + lambda_ * x;
        case Kind::cube_root: return std::cbrt(2.0) + x - std::cbrt(1.0 + x);
        case Kind::tabulated: {
            auto it = std::upper_bound(tx_.begin(), tx_.end(), x);
            std::size_t i = it == tx_.begin() ? 0 : static_cast<std::size_t>(it - tx_.begin()) - 1;
            i = std::min(i, tx_.size() - 2);
            return tf_[i] + (x - tx_[i]) * (tf_[i + 1] - tf_[i]) / (tx_[i + 1] - tx_[i]);
        }
    }
    return 0.0;
}

double MapF::derivative(double x) const {
    switch (kind_) {
        case Kind::linear: return lambda_;
        case Kind::cube_root: {
            double c = std::cbrt(1.0 + x);
            return 1.0 - 1.0 / (3.0 * c * c);
        }
        case Kind::tabulated: {
            auto it = std::upper_bound(tx_.begin(), tx_.end(), x);
            std::size_t i = it == tx_.begin() ? 0 : static_cast<std::size_t>(it - tx_.begin()) - 1;
            i = std::min(i, tx_.size() - 2);
            return (tf_[i + 1] - tf_[i]) / (tx_[i + 1] - tx_[i]);
        }
    }
    return 0.0;
}

double MapF::inverse(double y) const {
    const double f0 = (*this)(0.0);
    if (y < f0) throw DomainError("F^{-1} undefined below F(0)");
    if (kind_ == Kind::linear) return (y - (1.0 - lambda_)) / lambda_;
    double hi = std::max(1.0, y);
    while ((*this)(hi) < y) hi *= 2.0;
    return inverse(y, 0.0, hi);
}

double MapF::inverse(double y, double lo, double hi) const {
    if (kind_ == Kind::linear) return (y - (1.0 - lambda_)) / lambda_;
    // Newton from the bracket midpoint, falling back to halving whenever a step
    // leaves the bracket.
    double t = 0.5 * (lo + hi);
    for (int i = 0; i < 60; ++i) {
        double r = (*this)(t) - y;
        if (r == 0.0) return t;
        (r < 0.0 ? lo : hi) = t;
        double next = t - r / derivative(t);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::fabs(next - t) <= 1e-15 * std::max(1.0, std::fabs(t))) return next;
        t = next;
    }
    return t;
}

void MapF::validate(double x_max) const {
    if (!((*this)(0.0) > 0.0)) throw InvalidMap("F(0) must be positive");
    const int samples = 512;
    double prev = -1.0;
    for (int k = 0; k <= samples; ++k) {
        double x = x_max * k / samples;
        double d = derivative(x);
        if (!(d > 0.0 && d < 1.0)) throw InvalidMap("F' must lie in (0, 1) (x = " + std::to_string(x) + ")");
        if (d < prev - 1e-12) throw InvalidMap("F must be convex (x = " + std::to_string(x) + ")");
        prev = d;
    }
}

FixedPointGamma fixed_point_and_gamma(const MapF& F, double x_max) {
    FixedPointGamma r;
    double hi = 1.0;
    while (F(hi) >= hi) {
        hi *= 2.0;
        if (hi > 1e300) throw InvalidMap("F has no fixed point");
    }
    r.a_F = bisect([&](double x) { return F(x) - x; }, 0.0, hi);
    auto excess = [&](double x) { return F(x) - x * F.derivative(x); };  // decreasing
    if (excess(x_max) > 0.0)
        r.gamma_F = std::numeric_limits<double>::infinity();
    else
        r.gamma_F = bisect(excess, 0.0, x_max);
    return r;
}

SurvivalProfile apply_map(const SurvivalProfile& profile, const MapF& F, const GridOptions& grid) {
    profile.validate();
    const double f0 = F(0.0);
    const double end = profile.support_end();
    if (!(f0 < end))
        throw DegenerateImage("F(0) = " + std::to_string(f0) + " is not below the support end " +
                              std::to_string(end) + "; the image would be constant");
    SampledFunction f;
    f.w = [&](double x) { return profile.eval_smooth(F(x)); };
    f.quantile = [&](double level) {
        double z = profile.quantile(level);
        if (!std::isfinite(z)) return z;
        return z <= f0 ? 0.0 : F.inverse(z);
    };
    const double xm = profile.x.back(), wm = profile.w.back();
    if (profile.compact()) {
        f.support_end = F.inverse(end);
        if (wm > 0.0) {
            // Keep the jump at the end: w(F(x)) stays at w_M up to F^{-1}(x_M).
            auto inner = f.w;
            f.w = [inner, wm, e = f.support_end](double x) { return x >= e ? wm : inner(x); };
        }
    } else {
        const TailModel tail = profile.tail;
        f.tail_at = [&F, tail, xm](double x, double) {
            const double slope = F.derivative(x);
            if (tail.kind == TailKind::exponential) return TailModel::exponential(tail.rate * slope);
            return TailModel::power(tail.p, (F(x) + tail.shift) / slope - x);
        };
    }
    return sample_profile(f, grid);
}

BetaProfile beta_transform(const SurvivalProfile& profile, const MapF& F,
                           const std::vector<double>& image_grid) {
    const BetaProfile beta = beta_from_profile(profile);
    const TailMass tm = integrate_tail(profile);
    const auto& x = profile.x;
    const auto& w = profile.w;
    const std::size_t n = x.size();
    auto weight = [&](double z) { return 1.0 / F.derivative(F.inverse(z)); };
    const double f0 = F(0.0);
    // Preimages of the input nodes bracket every later inversion.
    std::vector<double> pre(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) pre[i] = x[i] <= f0 ? 0.0 : F.inverse(x[i]);
    auto cell = [&](std::size_t i, double a, double b) {
        double slope = (w[i + 1] - w[i]) / (x[i + 1] - x[i]);
        return integrate_gl(
            [&](double z) {
                double y = F.inverse(z, pre[i], pre[i + 1]);
                return (w[i] + slope * (z - x[i])) / F.derivative(y);
            },
            a, b, 8);
    };
    // Suffix sums over input cells lying inside the range of F.
    std::vector<double> suffix(n, 0.0);
    suffix[n - 1] = integrate_beyond_grid(profile, weight);
    for (std::size_t i = n - 1; i-- > 0;) {
        if (x[i + 1] <= f0) { suffix[i] = suffix[i + 1]; continue; }
        suffix[i] = suffix[i + 1] + cell(i, std::max(x[i], f0), x[i + 1]);
    }
    BetaProfile out;
    out.x = image_grid;
    out.beta.resize(image_grid.size());
    out.c.assign(image_grid.size(), 0.0);
    for (std::size_t j = 0; j < image_grid.size(); ++j) {
        const double z0 = F(image_grid[j]);
        if (z0 >= x.back()) {
            // Inside the tail model: beta of the input is the tail constant.
            out.beta[j] = beta.beta.back() * F.derivative(image_grid[j]) *
                          integrate_beyond_grid(profile, weight, z0) /
                          std::max(tm.eval(z0), std::numeric_limits<double>::min());
            continue;
        }
        auto it = std::upper_bound(x.begin(), x.end(), z0);
        std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
        double num = suffix[i + 1] + cell(i, z0, x[i + 1]);
        double den = tm.eval(z0);
        out.beta[j] = den > 0.0 ? beta.eval(z0) * F.derivative(image_grid[j]) * num / den : 0.0;
    }
    out.low_confidence = profile.compact() ? std::min<std::size_t>(2, image_grid.size() - 1) : 0;
    return out;
}

Normalized normalize(const SurvivalProfile& profile, double rho, double K) {
    if (!(rho > 0.0 && rho <= 1.0)) throw DomainError("normalize needs 0 < rho <= 1");
    if (!(K > 0.0)) throw DomainError("normalize needs K > 0");
    Normalized out;
    out.lambda = K / std::pow(moment(profile, rho), 1.0 / rho);
    out.profile = dilate(profile, out.lambda);
    return out;
}

namespace {

IterationRecord record(std::size_t n, double lambda, const SurvivalProfile& p, const BetaProfile& b) {
    IterationRecord r;
    r.n = n;
    r.lambda = lambda;
    r.mean = mean(p);
    r.sup_beta = b.sup();
    r.inf_beta = b.inf();
    r.ratio_third = moment(p, 1.0 / 3.0) / std::pow(r.mean, 1.0 / 3.0);
    r.ratio_half = moment(p, 0.5) / std::pow(r.mean, 0.5);
    r.ratio_two_thirds = moment(p, 2.0 / 3.0) / std::pow(r.mean, 2.0 / 3.0);
    r.sup_X = p.support_end();
    return r;
}

}  // namespace

IterationState iterate(const SurvivalProfile& profile0, const MapF& F, const IterateOptions& options) {
    IterationState st;
    st.profile = profile0;
    st.beta = beta_from_profile(profile0);
    st.history.push_back(record(0, 1.0, st.profile, st.beta));
    for (std::size_t n = 0; n < options.steps; ++n) {
        Normalized nz = normalize(st.profile, options.rho, options.K);
        SurvivalProfile image;
        try {
            image = apply_map(nz.profile, F, options.grid);
        } catch (const DegenerateImage& e) {
            throw DegenerateImage("step " + std::to_string(n) + ": " + e.what());
        }
        BetaProfile input_beta = beta_from_profile(nz.profile);
        BetaProfile image_beta = beta_from_profile(image);
        IterationRecord rec = record(n + 1, nz.lambda, image, image_beta);
        double excess = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < image_beta.trusted(); ++i)
            excess = std::max(excess, image_beta.beta[i] - input_beta.eval(F(image.x[i])));
        rec.l2_excess = excess;
        if (options.check_formula) {
            BetaProfile formula = beta_transform(nz.profile, F, image.x);
            double fe = -std::numeric_limits<double>::infinity(), fd = fe, gap = 0.0;
            for (std::size_t i = 0; i < image_beta.trusted(); ++i) {
                fe = std::max(fe, formula.beta[i] - input_beta.eval(F(image.x[i])));
                fd = std::max(fd, input_beta.eval(F(image.x[i])) - formula.beta[i]);
                gap = std::max(gap, std::fabs(formula.beta[i] - image_beta.beta[i]));
            }
            rec.l2_excess_formula = fe;
            rec.l2_deficit_formula = fd;
            rec.formula_gap = gap;
        }
        st.history.push_back(rec);
        st.profile = std::move(image);
        st.beta = std::move(image_beta);
        st.lambda = nz.lambda;
        st.n = n + 1;
    }
    return st;
}

}  // namespace lsw
