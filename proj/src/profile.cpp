#include "lsw/profile.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lsw/kernels.hpp"
#include "lsw/quadrature.hpp"

namespace lsw {

const char* tail_name(TailKind k) {
    switch (k) {
        case TailKind::compact: return "compact";
        case TailKind::exponential: return "exponential";
        case TailKind::power: return "power";
    }
    return "?";
}

void SurvivalProfile::validate() const {
    if (x.size() < 2 || x.size() != w.size())
        throw InvalidProfile("profile needs at least two nodes and matching x/w sizes");
    if (x.front() != 0.0) throw InvalidProfile("profile grid must start at x = 0");
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(w[i]) || w[i] < 0.0)
            throw InvalidProfile("profile values must be finite and nonnegative (node " +
                                 std::to_string(i) + ")");
        if (i > 0 && !(x[i] > x[i - 1]))
            throw InvalidProfile("grid must be strictly increasing (node " + std::to_string(i) + ")");
        if (i > 0 && w[i] > w[i - 1])
            throw InvalidProfile("w must be nonincreasing (node " + std::to_string(i) + ")");
    }
    if (!(w.front() > 0.0)) throw InvalidProfile("w(0) must be positive");
    switch (tail.kind) {
        case TailKind::compact: break;
        case TailKind::exponential:
            if (!(tail.rate > 0.0)) throw NonIntegrableTail("exponential tail needs rate > 0");
            break;
        case TailKind::power:
            if (!(tail.p > 1.0)) throw NonIntegrableTail("power tail needs exponent p > 1");
            if (!(x.back() + tail.shift > 0.0)) throw InvalidProfile("power tail shift too negative");
            break;
    }
}

double SurvivalProfile::eval(double at) const {
    if (at <= 0.0) return w.front();
    if (at >= x.back()) {
        const double xm = x.back(), wm = w.back();
        switch (tail.kind) {
            case TailKind::compact: return at == xm ? wm : 0.0;
            case TailKind::exponential: return wm * std::exp(-tail.rate * (at - xm));
            case TailKind::power:
                return wm * std::pow((at + tail.shift) / (xm + tail.shift), -tail.p);
        }
    }
    auto it = std::upper_bound(x.begin(), x.end(), at);
    std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
    double t = (at - x[i]) / (x[i + 1] - x[i]);
    return w[i] + t * (w[i + 1] - w[i]);
}

double SurvivalProfile::eval_smooth(double at) const {
    if (at <= 0.0 || at >= x.back()) return eval(at);
    auto it = std::upper_bound(x.begin(), x.end(), at);
    std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
    if (i == 0 || i + 2 >= x.size()) return eval(at);
    double v = 0.0;
    for (std::size_t a = i - 1; a <= i + 2; ++a) {
        double l = 1.0;
        for (std::size_t b = i - 1; b <= i + 2; ++b)
            if (b != a) l *= (at - x[b]) / (x[a] - x[b]);
        v += l * w[a];
    }
    return std::clamp(v, w[i + 1], w[i]);
}

double SurvivalProfile::tail_density(double at) const {
    switch (tail.kind) {
        case TailKind::compact: return 0.0;
        case TailKind::exponential: return tail.rate * eval(at);
        case TailKind::power: return tail.p * eval(at) / (at + tail.shift);
    }
    return 0.0;
}

double SurvivalProfile::tail_mass() const {
    const double xm = x.back(), wm = w.back();
    switch (tail.kind) {
        case TailKind::compact: return 0.0;
        case TailKind::exponential: return wm / tail.rate;
        case TailKind::power: return wm * (xm + tail.shift) / (tail.p - 1.0);
    }
    return 0.0;
}

double SurvivalProfile::quantile(double level) const {
    if (level >= w.front()) return 0.0;
    const double wm = w.back();
    if (level < wm || (level == wm && !compact())) {
        const double xm = x.back();
        switch (tail.kind) {
            case TailKind::compact: return xm;
            case TailKind::exponential:
                if (level <= 0.0) return std::numeric_limits<double>::infinity();
                return xm + std::log(wm / level) / tail.rate;
            case TailKind::power:
                if (level <= 0.0) return std::numeric_limits<double>::infinity();
                return (xm + tail.shift) * std::pow(wm / level, 1.0 / tail.p) - tail.shift;
        }
    }
    // w is nonincreasing: find the last node with w >= level.
    std::size_t lo = 0, hi = w.size() - 1;
    while (hi - lo > 1) {
        std::size_t mid = (lo + hi) / 2;
        if (w[mid] >= level) lo = mid; else hi = mid;
    }
    if (w[hi] >= level) return x[hi];
    double t = (w[lo] - level) / (w[lo] - w[hi]);
    return x[lo] + t * (x[hi] - x[lo]);
}

double TailMass::eval(double at) const {
    const auto& x = profile.x;
    if (at <= 0.0) return h.front() + (-at) * profile.w.front();
    if (at >= x.back()) {
        switch (profile.tail.kind) {
            case TailKind::compact: return 0.0;
            case TailKind::exponential: return profile.eval(at) / profile.tail.rate;
            case TailKind::power:
                return profile.eval(at) * (at + profile.tail.shift) / (profile.tail.p - 1.0);
        }
    }
    auto it = std::upper_bound(x.begin(), x.end(), at);
    std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
    const std::size_t m = x.size() - 1;
    if (end_power != 1.0 && i + 1 == m) {
        double d1 = x[m] - x[m - 1], d = x[m] - at;
        return profile.w[m - 1] * std::pow(d / d1, end_power) * d / (1.0 + end_power);
    }
    double wa = profile.eval(at);
    return h[i + 1] + 0.5 * (x[i + 1] - at) * (wa + profile.w[i + 1]);
}

double BetaProfile::eval(double at) const {
    if (at <= x.front()) return beta.front();
    if (at >= x.back()) return beta.back();
    auto it = std::upper_bound(x.begin(), x.end(), at);
    std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
    double t = (at - x[i]) / (x[i + 1] - x[i]);
    return beta[i] + t * (beta[i + 1] - beta[i]);
}

double BetaProfile::sup() const {
    double s = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < trusted(); ++i) s = std::max(s, beta[i]);
    return s;
}

double BetaProfile::inf() const {
    double s = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < trusted(); ++i) s = std::min(s, beta[i]);
    return s;
}

TailMass integrate_tail(const SurvivalProfile& profile) {
    profile.validate();
    TailMass out{profile, std::vector<double>(profile.size())};
    const auto& x = profile.x;
    const auto& w = profile.w;
    std::size_t m = x.size() - 1;
    out.h[m] = profile.tail_mass();
    std::size_t last = m;
    if (profile.compact() && w[m] == 0.0 && m >= 3 && w[m - 2] > w[m - 1]) {
        double d1 = x[m] - x[m - 1], d2 = x[m] - x[m - 2];
        double p = std::log(w[m - 2] / w[m - 1]) / std::log(d2 / d1);
        if (std::isfinite(p) && p > 0.0 && p < 64.0) {
            out.end_power = p;
            out.h[m - 1] = w[m - 1] * d1 / (1.0 + p);
            last = m - 1;
        }
    }
    for (std::size_t i = last; i-- > 0;) out.h[i] = out.h[i + 1] + 0.5 * (w[i] + w[i + 1]) * (x[i + 1] - x[i]);
    return out;
}

namespace {

// -w' at node i from the three-point nonuniform formulas.
double slope_centered(const std::vector<double>& x, const std::vector<double>& w, std::size_t i) {
    double h1 = x[i] - x[i - 1], h2 = x[i + 1] - x[i];
    double d = -h2 / (h1 * (h1 + h2)) * w[i - 1] + (h2 - h1) / (h1 * h2) * w[i] +
               h1 / (h2 * (h1 + h2)) * w[i + 1];
    return -d;
}

double slope_forward(const std::vector<double>& x, const std::vector<double>& w) {
    double h1 = x[1] - x[0], h2 = x[2] - x[1];
    double d = -(2 * h1 + h2) / (h1 * (h1 + h2)) * w[0] + (h1 + h2) / (h1 * h2) * w[1] -
               h1 / (h2 * (h1 + h2)) * w[2];
    return -d;
}

double slope_backward(const std::vector<double>& x, const std::vector<double>& w) {
    std::size_t m = x.size() - 1;
    double h1 = x[m - 1] - x[m - 2], h2 = x[m] - x[m - 1];
    double d = h2 / (h1 * (h1 + h2)) * w[m - 2] - (h1 + h2) / (h1 * h2) * w[m - 1] +
               (h1 + 2 * h2) / (h2 * (h1 + h2)) * w[m];
    return -d;
}

}  // namespace

double integrate_beyond_grid(const SurvivalProfile& p, const std::function<double(double)>& phi,
                             double from) {
    if (p.w.back() == 0.0 || p.tail.kind == TailKind::compact) return 0.0;
    // Restart the tail at `from` so a cut inside it never lands mid-panel.
    const double xm = std::max(p.x.back(), from);
    const double wm = p.tail.kind == TailKind::exponential
                          ? p.w.back() * std::exp(-p.tail.rate * (xm - p.x.back()))
                          : p.w.back() * std::pow((xm + p.tail.shift) / (p.x.back() + p.tail.shift), -p.tail.p);
    switch (p.tail.kind) {
        case TailKind::compact: return 0.0;
        case TailKind::exponential: {
            const double lam = p.tail.rate;
            const int panels = 60;
            const double T = 60.0, dt = T / panels;
            double sum = 0.0;
            for (int k = 0; k < panels; ++k)
                sum += integrate_gl([&](double t) { return phi(xm + t / lam) * std::exp(-t); },
                                    k * dt, (k + 1) * dt, 12);
            return sum * wm / lam;
        }
        case TailKind::power: {
            const double ps = p.tail.p, s = p.tail.shift, base = xm + s;
            const double T = std::min(700.0, 60.0 / (ps - 1.0));
            const int panels = 120;
            const double dt = T / panels;
            double sum = 0.0;
            for (int k = 0; k < panels; ++k)
                sum += integrate_gl(
                    [&](double t) {
                        return phi(base * std::exp(t) - s) * std::exp((1.0 - ps) * t);
                    },
                    k * dt, (k + 1) * dt, 12);
            return sum * wm * base;
        }
    }
    return 0.0;
}

namespace {

// int_a^b x^{alpha-1} (linear w) dx.
double cell_power(double a, double b, double wa, double wb, double alpha) {
    double dx = b - a;
    if (dx <= 0.0) return 0.0;
    if (a > 0.0 && dx <= 0.25 * a) {
        double slope = (wb - wa) / dx;
        return integrate_gl([&](double x) { return std::pow(x, alpha - 1.0) * (wa + slope * (x - a)); },
                            a, b, 8);
    }
    double slope = (wb - wa) / dx;
    double pa = std::pow(a, alpha), pb = std::pow(b, alpha);
    double i0 = (pb - pa) / alpha;
    double i1 = (pb * b - pa * a) / (alpha + 1.0) - a * i0;
    return wa * i0 + slope * i1;
}

}  // namespace

BetaProfile beta_from_profile(const SurvivalProfile& profile) {
    TailMass tm = integrate_tail(profile);
    const auto& x = profile.x;
    const auto& w = profile.w;
    const std::size_t n = x.size(), m = n - 1;
    BetaProfile out;
    out.x = x;
    out.beta.resize(n);
    out.c.resize(n);

    for (std::size_t i = 0; i < m; ++i)
        if (!(w[i] > 0.0))
            throw DegenerateProfile("w vanishes inside the support at node " + std::to_string(i));

    if (n == 2) {
        double c = -(w[1] - w[0]) / (x[1] - x[0]);
        out.c = {c, profile.compact() ? c : profile.tail_density(x[1])};
    } else {
        out.c[0] = slope_forward(x, w);
        for (std::size_t i = 1; i < m; ++i) out.c[i] = slope_centered(x, w, i);
        out.c[m] = profile.compact() ? slope_backward(x, w) : profile.tail_density(x[m]);
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (w[i] > 0.0)
            out.beta[i] = out.c[i] * tm.h[i] / (w[i] * w[i]);
        else
            out.beta[i] = out.beta[i - 1];  // compact end with w = 0
    }
    if (profile.compact()) out.low_confidence = std::min<std::size_t>(2, n - 1);
    return out;
}

SurvivalProfile profile_from_beta(const BetaProfile& bp, double mean_value) {
    if (!(mean_value > 0.0)) throw InconsistentBeta("mean must be positive");
    const auto& x = bp.x;
    const std::size_t n = x.size();
    if (n < 2 || x.front() != 0.0) throw InconsistentBeta("beta grid must start at 0 with >= 2 nodes");
    for (double b : bp.beta)
        if (!(b >= 0.0) || !std::isfinite(b)) throw InconsistentBeta("beta must be finite and >= 0");

    std::vector<double> D(n);
    double B = 0.0;
    D[0] = mean_value;
    for (std::size_t i = 1; i < n; ++i) {
        B += 0.5 * (bp.beta[i - 1] + bp.beta[i]) * (x[i] - x[i - 1]);
        D[i] = mean_value - x[i] + B;
        if (i + 1 < n && D[i] <= 0.0)
            throw InconsistentBeta("denominator <X> - x + int beta vanishes at x = " +
                                   std::to_string(x[i]) + " before the end of the grid");
    }
    // Near a compact end D ~ (1 - beta)(end - x) while the trapezoid error in
    // int beta has been accumulating over the whole grid; pinning D(end) = 0
    // and spreading the residual linearly leaves only the local error there.
    const bool hits_end = D[n - 1] <= 1e-3 * std::max(mean_value, x[n - 1]);
    if (hits_end) {
        const double r = D[n - 1];
        for (std::size_t i = 1; i < n; ++i) D[i] -= r * x[i] / x[n - 1];
    }

    SurvivalProfile out;
    out.x = x;
    out.w.assign(n, 0.0);
    const double w0 = 1.0 / mean_value;
    double I = 0.0;  // int_0^x dz / D, D linear per cell
    out.w[0] = w0;
    for (std::size_t i = 1; i < n; ++i) {
        if (i == n - 1 && hits_end) {
            double kappa = (x[i] - x[i - 1]) / (D[i - 1] - D[i]);
            out.w[i] = kappa > 1.0 + 1e-9 ? 0.0 : out.w[i - 1];
            break;
        }
        double da = D[i - 1], db = D[i], dx = x[i] - x[i - 1];
        double r = (db - da) / da;
        double cell = std::fabs(r) < 1e-8 ? dx / da * (1.0 - 0.5 * r) : dx * std::log1p(r) / (db - da);
        I += cell;
        out.w[i] = w0 * (mean_value / db) * std::exp(-I);
    }
    for (std::size_t i = 1; i < n; ++i) out.w[i] = std::min(out.w[i], out.w[i - 1]);

    if (hits_end) {
        out.tail = TailModel::compact();
    } else {
        double bm = bp.beta.back(), dm = D[n - 1];
        if (std::fabs(bm - 1.0) < 1e-9)
            out.tail = TailModel::exponential(1.0 / dm);
        else if (bm > 1.0)
            out.tail = TailModel::power(bm / (bm - 1.0), dm / (bm - 1.0) - x[n - 1]);
        else
            out.tail = TailModel::compact();
    }
    out.validate();
    return out;
}

double mass(const SurvivalProfile& profile) {
    double s = profile.tail_mass();
    for (std::size_t i = 0; i + 1 < profile.size(); ++i)
        s += 0.5 * (profile.w[i] + profile.w[i + 1]) * (profile.x[i + 1] - profile.x[i]);
    return s;
}

double mean(const SurvivalProfile& profile) { return mass(profile) / profile.w0(); }

double moment(const SurvivalProfile& profile, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("moment: alpha must lie in (0, 1]");
    profile.validate();
    if (alpha == 1.0) return mean(profile);
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < profile.size(); ++i)
        s += cell_power(profile.x[i], profile.x[i + 1], profile.w[i], profile.w[i + 1], alpha);
    s += integrate_beyond_grid(profile, [&](double x) { return std::pow(x, alpha - 1.0); });
    return alpha * s / profile.w0();
}

double energy(const SurvivalProfile& profile) {
    const auto& k = kernels::active();
    double s = k.cells_xm13(profile.x.data(), profile.w.data(), profile.size());
    s += integrate_beyond_grid(profile, [](double x) { return 1.0 / std::cbrt(x); });
    return 2.0 / 3.0 * s;
}

double l_cbrt(const SurvivalProfile& profile) {
    const auto& k = kernels::active();
    double s = k.cells_xm23(profile.x.data(), profile.w.data(), profile.size());
    s += integrate_beyond_grid(profile, [](double x) { double c = std::cbrt(x); return 1.0 / (c * c); });
    return s / (3.0 * profile.w0());
}

RegularVariation regular_variation_exponent(const SurvivalProfile& profile) {
    profile.validate();
    if (!profile.compact())
        throw UnsupportedOperation("regular variation needs a compactly supported profile");
    RegularVariation rv;
    const std::size_t m = profile.size() - 1;
    if (profile.w[m] > 0.0) {
        // w stays bounded away from zero up to the end: exponent 0.
        return rv;
    }
    const double end = profile.x[m], w0 = profile.w0();
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < m; ++i)
        if (profile.w[i] > 0.0 && end - profile.x[i] > 0.0) idx.push_back(i);
    if (idx.size() < 30) throw UnsupportedOperation("regular variation needs >= 30 interior nodes");
    const double dmin = end - profile.x[idx.back()];
    std::size_t start = idx.size();
    while (start > 0 && end - profile.x[idx[start - 1]] <= 1000.0 * dmin) --start;
    if (idx.size() - start < 30) start = idx.size() - 30;

    std::vector<double> xi, k;
    for (std::size_t j = start; j < idx.size(); ++j) {
        xi.push_back(-std::log(end - profile.x[idx[j]]));
        k.push_back(-std::log(profile.w[idx[j]] / w0));
    }
    const double nn = static_cast<double>(xi.size());
    double mx = 0, mk = 0;
    for (std::size_t j = 0; j < xi.size(); ++j) { mx += xi[j]; mk += k[j]; }
    mx /= nn;
    mk /= nn;
    double sxx = 0, sxk = 0;
    for (std::size_t j = 0; j < xi.size(); ++j) {
        sxx += (xi[j] - mx) * (xi[j] - mx);
        sxk += (xi[j] - mx) * (k[j] - mk);
    }
    rv.p = sxk / sxx;
    double ss = 0.0;
    std::size_t cnt = 0;
    for (std::size_t j = 1; j < xi.size(); ++j) {
        double dxi = xi[j] - xi[j - 1];
        if (dxi <= 0.0) continue;
        double local = (k[j] - k[j - 1]) / dxi;
        ss += (local - rv.p) * (local - rv.p);
        ++cnt;
    }
    rv.residual = cnt ? std::sqrt(ss / cnt) : 0.0;
    rv.oscillating = rv.residual > 0.05;
    rv.nodes = xi.size();
    return rv;
}

FisherInformation fisher_information(const TailMass& tm) {
    const SurvivalProfile& p = tm.profile;
    BetaProfile bp = beta_from_profile(p);
    const std::size_t m = p.size() - 1;
    for (std::size_t i = 0; i < m; ++i)
        if (!(tm.h[i] > 0.0)) throw DegenerateProfile("h vanishes inside the support");
    FisherInformation fi;
    for (std::size_t i = 0; i < m; ++i) {
        double a = p.x[i], b = p.x[i + 1], wa = p.w[i], wb = p.w[i + 1], hb = tm.h[i + 1];
        double slope = (wb - wa) / (b - a);
        auto wx = [&](double x) { return wa + slope * (x - a); };
        auto hx = [&](double x) { return hb + 0.5 * (b - x) * (wx(x) + wb); };
        fi.direct += integrate_gl([&](double x) { double v = wx(x); return v * v / hx(x); }, a, b, 8);
        fi.beta_form += integrate_gl(
            [&](double x) { double v = wx(x); return v * v / hx(x) * (1.0 - bp.eval(x)); }, a, b, 8);
    }
    const double wm = p.w[m];
    switch (p.tail.kind) {
        case TailKind::compact:
            fi.boundary = p.w0() - wm;
            break;
        case TailKind::exponential:
            fi.direct += wm;  // w^2/h = rate * w
            fi.boundary = p.w0();
            break;
        case TailKind::power:
            fi.direct += wm * (p.tail.p - 1.0) / p.tail.p;
            fi.beta_form += -wm / p.tail.p;  // beta = p/(p-1) in the tail
            fi.boundary = p.w0();
            break;
    }
    fi.beta_form += fi.boundary;
    return fi;
}

double integrate_against_w(const SurvivalProfile& p, const std::function<double(double)>& phi) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        double a = p.x[i], b = p.x[i + 1], wa = p.w[i], slope = (p.w[i + 1] - wa) / (b - a);
        s += integrate_gl([&](double x) { return phi(x) * (wa + slope * (x - a)); }, a, b, 8);
    }
    return s + integrate_beyond_grid(p, phi);
}

namespace {

double cell_average(const std::function<double(double)>& phi, double a, double b,
                    const std::vector<double>& breaks) {
    std::vector<double> pts{a};
    for (double br : breaks)
        if (br > a && br < b) pts.push_back(br);
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());
    double s = 0.0;
    for (std::size_t j = 0; j + 1 < pts.size(); ++j) s += integrate_gl(phi, pts[j], pts[j + 1], 8);
    return s / (b - a);
}

}  // namespace

double expectation(const SurvivalProfile& p, const std::function<double(double)>& phi,
                   const std::vector<double>& breaks) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        double dm = p.w[i] - p.w[i + 1];
        if (dm > 0.0) s += dm * cell_average(phi, p.x[i], p.x[i + 1], breaks);
    }
    const double wm = p.w.back(), xm = p.x.back();
    switch (p.tail.kind) {
        case TailKind::compact: s += wm * phi(xm); break;
        case TailKind::exponential:
            s += integrate_beyond_grid(p, [&](double x) { return phi(x) * p.tail.rate; });
            break;
        case TailKind::power:
            s += integrate_beyond_grid(p, [&](double x) { return phi(x) * p.tail.p / (x + p.tail.shift); });
            break;
    }
    return s / p.w0();
}

double expectation_below(const SurvivalProfile& p, const std::function<double(double)>& phi, double a) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        double lo = p.x[i], hi = p.x[i + 1];
        if (lo >= a) break;
        double dm = p.w[i] - p.w[i + 1];
        if (dm <= 0.0) continue;
        double top = std::min(hi, a);
        s += dm / (hi - lo) * integrate_gl(phi, lo, top, 8);
    }
    const double xm = p.x.back(), wm = p.w.back();
    if (a > xm) {
        switch (p.tail.kind) {
            case TailKind::compact: s += wm * phi(xm); break;
            default: {
                // Tail part below a, by substitution on [x_M, a].
                s += integrate_adaptive([&](double x) { return phi(x) * p.tail_density(x); }, xm, a,
                                        1e-16, 1e-12);
            }
        }
    }
    return s / p.w0();
}

SurvivalProfile dilate(const SurvivalProfile& profile, double s) {
    if (!(s > 0.0)) throw DomainError("dilation factor must be positive");
    SurvivalProfile out = profile;
    for (double& v : out.x) v *= s;
    out.tail.rate /= s;
    out.tail.shift *= s;
    return out;
}

SurvivalProfile scale_values(const SurvivalProfile& profile, double k) {
    SurvivalProfile out = profile;
    for (double& v : out.w) v *= k;
    return out;
}

SurvivalProfile normalize_mass(const SurvivalProfile& profile) {
    return scale_values(profile, 1.0 / mass(profile));
}

SurvivalProfile truncate_to_compact(const SurvivalProfile& profile) {
    SurvivalProfile out = profile;
    out.tail = TailModel::compact();
    return normalize_mass(out);
}

SurvivalProfile sample_profile(const SampledFunction& f, const GridOptions& opts) {
    const double w0 = f.w(0.0);
    if (!(w0 > 0.0)) throw InvalidProfile("sampled function must have w(0) > 0");
    const bool compact = std::isfinite(f.support_end);
    std::vector<double> anchors{0.0};
    const double floor = w0 * opts.floor_ratio;
    const double gap = compact ? std::max(opts.end_gap, 1e-10 * f.support_end) : 0.0;
    for (int k = 1;; ++k) {
        double level = w0 * std::exp2(-static_cast<double>(k) / opts.levels_per_octave);
        if (level < floor) break;
        double xq = f.quantile(level);
        if (!std::isfinite(xq)) break;
        if (compact && f.support_end - xq <= gap) break;
        if (xq > anchors.back()) anchors.push_back(xq);
        if (k > 100000) break;
    }
    if (compact && f.support_end > anchors.back()) anchors.push_back(f.support_end);
    if (anchors.size() < 2) throw InvalidProfile("sampled function produced fewer than two nodes");

    if (opts.feature_dx) {
        std::vector<double> extra;
        double x = 0.0, last = anchors.back();
        while (true) {
            double dx = opts.feature_dx(x);
            if (!(dx > 0.0) || !std::isfinite(dx)) break;
            x += dx;
            if (x >= last) break;
            extra.push_back(x);
        }
        anchors.insert(anchors.end(), extra.begin(), extra.end());
        std::sort(anchors.begin(), anchors.end());
        anchors.erase(std::unique(anchors.begin(), anchors.end()), anchors.end());
    }

    // Half of the node budget splits every quantile cell evenly, which keeps the
    // relative spacing small where w decays geometrically; the rest is a
    // uniform fill that caps the absolute spacing.
    {
        const std::size_t cells = anchors.size() - 1;
        const std::size_t split = std::max<std::size_t>(1, opts.nodes / 2 / cells);
        if (split > 1) {
            std::vector<double> refined{anchors.front()};
            for (std::size_t i = 0; i < cells; ++i) {
                // A compact end cell stays whole: w may have a root singularity there.
                const bool end_cell = compact && i + 1 == cells;
                for (std::size_t j = 1; j < split && !end_cell; ++j)
                    refined.push_back(anchors[i] + (anchors[i + 1] - anchors[i]) * j / split);
                refined.push_back(anchors[i + 1]);
            }
            anchors = std::move(refined);
        }
    }
    auto count = [&](double dx) {
        std::size_t c = 1;
        for (std::size_t i = 0; i + 1 < anchors.size(); ++i)
            c += static_cast<std::size_t>(std::ceil((anchors[i + 1] - anchors[i]) / dx));
        return c;
    };
    std::vector<double> nodes;
    const double span = anchors.back();
    if (anchors.size() >= opts.nodes || count(span) >= opts.nodes) {
        nodes = anchors;
    } else {
        double lo = span * 1e-12, hi = span;  // count(lo) huge, count(hi) small
        for (int it = 0; it < 100; ++it) {
            double mid = std::sqrt(lo * hi);
            if (count(mid) > opts.nodes) lo = mid; else hi = mid;
        }
        const double dx = hi;
        nodes.push_back(0.0);
        for (std::size_t i = 0; i + 1 < anchors.size(); ++i) {
            double a = anchors[i], b = anchors[i + 1];
            auto parts = static_cast<std::size_t>(std::ceil((b - a) / dx));
            for (std::size_t j = 1; j < parts; ++j) nodes.push_back(a + (b - a) * j / parts);
            nodes.push_back(b);
        }
    }

    SurvivalProfile out;
    out.x = nodes;
    out.w.resize(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        out.w[i] = f.w(nodes[i]);
        if (i > 0) out.w[i] = std::min(out.w[i], out.w[i - 1]);
    }
    out.tail = compact ? TailModel::compact() : f.tail_at(out.x.back(), out.w.back());
    out.validate();
    return out;
}

double max_spacing(const SurvivalProfile& profile) {
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < profile.size(); ++i) m = std::max(m, profile.x[i + 1] - profile.x[i]);
    return m;
}

}  // namespace lsw
