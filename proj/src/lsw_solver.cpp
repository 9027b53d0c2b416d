#include "lsw/lsw_solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "kernels_impl.hpp"
#include "lsw/kernels.hpp"

namespace lsw {

namespace {

constexpr std::size_t kNodes = 8;  // Chebyshev-Lobatto sub-nodes per interval
constexpr std::size_t kSimdSubsteps = 4;

// Time for x to reach 0 under dx/ds = -1 + kappa x^{1/3} with kappa frozen.
// With v = kappa x^{1/3} it is x (1 + 3v/4 + 3v^2/5 + ...) = 3x sum_k v^{k-3}/k.
double exit_time(double x, double kappa) {
    if (x <= 0.0) return 0.0;
    const double v = kappa * std::cbrt(x);
    if (v >= 1.0) return std::numeric_limits<double>::infinity();
    if (v < 0.25) {
        double sum = 0.0, p = 1.0;
        for (int k = 3; k < 40; ++k) {
            sum += p / k;
            p *= v;
        }
        return 3.0 * x * sum;
    }
    const double k3 = kappa * kappa * kappa;
    return 3.0 / k3 * (-std::log1p(-v) - v - 0.5 * v * v);
}

double drift(double x, double kappa) { return -1.0 + kappa * std::cbrt(x); }

// Everything below works in stored units: x stored, L stored = L / scale,
// s stored = time / scale. w is scale free for L and beta.
struct Boundary {
    double label, w;
};

Boundary boundary_stored(const CharacteristicEnsemble& e, double Ls) {
    if (e.x.empty()) throw Extinction("no survivors");
    const double kappa = Ls > 0.0 ? std::pow(Ls, -1.0 / 3.0) : 0.0;
    const double tf = e.t + e.scale * exit_time(e.x[0], kappa);
    const double ye = e.last_exit.label, yf = e.label[0];
    double frac = 0.0;
    if (std::isfinite(tf) && tf > e.last_exit.time)
        frac = std::clamp((e.t - e.last_exit.time) / (tf - e.last_exit.time), 0.0, 1.0);
    const double F0 = ye + frac * (yf - ye);
    double w = e.initial->eval(F0);
    // The interpolant may dip a rounding error below the first survivor.
    w = std::max(w, e.w[0]);
    return {F0, w};
}

double l_stored_given(const CharacteristicEnsemble& e, const Boundary& b) {
    const double x0 = e.x[0];
    double I = kernels::detail::cell_xm23(0.0, x0, 0.0, std::cbrt(x0), b.w, e.w[0]);
    I += kernels::active().cells_xm23(e.x.data(), e.w.data(), e.x.size());
    const double c = I / (3.0 * b.w);
    return c * c * c;
}

// L in stored units; the hint feeds the predicted exit of the first survivor.
double l_stored(const CharacteristicEnsemble& e, double Ls_hint) {
    if (e.x.empty()) throw Extinction("no survivors");
    if (Ls_hint > 0.0) return l_stored_given(e, boundary_stored(e, Ls_hint));
    double L = l_stored_given(e, boundary_stored(e, 0.0));
    for (int k = 0; k < 4; ++k) L = l_stored_given(e, boundary_stored(e, L));
    return L;
}

double mass_stored(const CharacteristicEnsemble& e, const Boundary& b) {
    double m = 0.5 * e.x[0] * (b.w + e.w[0]);
    for (std::size_t i = 0; i + 1 < e.x.size(); ++i)
        m += 0.5 * (e.x[i + 1] - e.x[i]) * (e.w[i] + e.w[i + 1]);
    return m;
}

double stored_hint(const CharacteristicEnsemble& e, double L_hint) {
    return L_hint > 0.0 ? L_hint / e.scale : 0.0;
}

// Lagrange interpolation through the four nodes around s.
double interp4(const std::array<double, kNodes>& s, const std::array<double, kNodes>& v, double at) {
    std::size_t j = 0;
    while (j + 2 < kNodes && at > s[j + 1]) ++j;
    std::size_t lo = j == 0 ? 0 : std::min(j - 1, kNodes - 4);
    double sum = 0.0;
    for (std::size_t a = lo; a < lo + 4; ++a) {
        double term = v[a];
        for (std::size_t b = lo; b < lo + 4; ++b)
            if (b != a) term *= (at - s[b]) / (s[a] - s[b]);
        sum += term;
    }
    return sum;
}

// Advances stored positions over [s0, s0 + ds] in stored time.
template <class Kappa>
void advance_segment(CharacteristicEnsemble& e, double s0, double ds, const Kappa& kappa_at,
                     std::vector<ExitRecord>* exits) {
    if (ds <= 0.0) return;
    const std::size_t n = e.x.size();
    // Characteristics that might exit, or whose substeps would exceed x/2, are
    // integrated one by one with steps of at most x/8.
    std::size_t prefix = 0;
    while (prefix < n && e.x[prefix] <= 16.0 * ds) ++prefix;
    std::size_t exited = 0;
    for (std::size_t i = 0; i < prefix; ++i) {
        double xi = e.x[i], s = 0.0;
        bool gone = false;
        while (s < ds) {
            const double rem = ds - s;
            const double k0 = kappa_at(s0 + s);
            const double T = exit_time(xi, k0);
            if (T <= rem) {
                ExitRecord r{e.label[i], e.t + e.scale * (s + T)};
                e.last_exit = r;
                if (exits) exits->push_back(r);
                gone = true;
                break;
            }
            double h = std::min(rem, xi / 8.0);
            if (rem - h < 1e-3 * h) h = rem;
            const double km = kappa_at(s0 + s + 0.5 * h), kb = kappa_at(s0 + s + h);
            const double a1 = drift(xi, k0);
            const double a2 = drift(xi + 0.5 * h * a1, km);
            const double a3 = drift(xi + 0.5 * h * a2, km);
            const double a4 = drift(xi + h * a3, kb);
            const double next = xi + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
            if (next <= 0.0) {
                // Frozen-kappa estimate disagreed with the step; exit inside it.
                ExitRecord r{e.label[i], e.t + e.scale * (s + std::min(T, h))};
                e.last_exit = r;
                if (exits) exits->push_back(r);
                gone = true;
                break;
            }
            xi = next;
            s += h;
        }
        if (gone) {
            ++exited;
            continue;
        }
        e.x[i] = xi;
    }
    if (prefix < n) {
        std::array<double, 2 * kSimdSubsteps + 1> kappa{};
        for (std::size_t j = 0; j < kappa.size(); ++j)
            kappa[j] = kappa_at(s0 + ds * static_cast<double>(j) / (2.0 * kSimdSubsteps));
        kernels::active().rk4_drift(e.x.data() + prefix, n - prefix, kappa.data(), kSimdSubsteps,
                                    ds / kSimdSubsteps);
    }
    if (exited > 0) {
        // Exits come out in label order, so they form a prefix.
        e.x.erase(e.x.begin(), e.x.begin() + static_cast<std::ptrdiff_t>(exited));
        e.w.erase(e.w.begin(), e.w.begin() + static_cast<std::ptrdiff_t>(exited));
        e.label.erase(e.label.begin(), e.label.begin() + static_cast<std::ptrdiff_t>(exited));
    }
    e.t += e.scale * ds;
}

CharacteristicEnsemble light_copy(const CharacteristicEnsemble& e) {
    CharacteristicEnsemble c;
    c.label = e.label;
    c.w = e.w;
    c.x = e.x;
    c.scale = e.scale;
    c.t = e.t;
    c.mass0 = e.mass0;
    c.last_exit = e.last_exit;
    c.initial = e.initial;
    return c;
}

void rescale(CharacteristicEnsemble& e, double r) {
    for (double& v : e.x) v /= r;
    e.scale *= r;
}

}  // namespace

CharacteristicEnsemble CharacteristicEnsemble::from_profile(const SurvivalProfile& w0) {
    w0.validate();
    SurvivalProfile p = w0.compact() ? normalize_mass(w0) : truncate_to_compact(w0);
    CharacteristicEnsemble e;
    e.initial = std::make_shared<const SurvivalProfile>(p);
    e.mass0 = mass(p);
    // The node at x = 0 is the boundary label; it leaves at t = 0.
    e.last_exit = {p.x[0], 0.0};
    e.exits.push_back(e.last_exit);
    e.label.assign(p.x.begin() + 1, p.x.end());
    e.x = e.label;
    e.w.assign(p.w.begin() + 1, p.w.end());
    return e;
}

bool CharacteristicEnsemble::flat() const {
    return !w.empty() && std::all_of(w.begin(), w.end(), [&](double v) { return v == w.front(); });
}

BoundaryState boundary_state(const CharacteristicEnsemble& e, double L_hint) {
    double Ls = stored_hint(e, L_hint);
    if (Ls <= 0.0) Ls = l_stored(e, 0.0);
    Boundary b = boundary_stored(e, Ls);
    return {b.label, b.w};
}

double l_from_state(const CharacteristicEnsemble& e, double L_hint) {
    return e.scale * l_stored(e, stored_hint(e, L_hint));
}

double ensemble_mass(const CharacteristicEnsemble& e, double L_hint) {
    double Ls = stored_hint(e, L_hint);
    if (Ls <= 0.0) Ls = l_stored(e, 0.0);
    return e.scale * mass_stored(e, boundary_stored(e, Ls));
}

double ensemble_energy(const CharacteristicEnsemble& e, double L_hint) {
    double Ls = stored_hint(e, L_hint);
    if (Ls <= 0.0) Ls = l_stored(e, 0.0);
    Boundary b = boundary_stored(e, Ls);
    const double x0 = e.x[0];
    double I = kernels::detail::cell_xm13(0.0, x0, 0.0, std::cbrt(x0), b.w, e.w[0]);
    I += kernels::active().cells_xm13(e.x.data(), e.w.data(), e.x.size());
    return 2.0 / 3.0 * std::pow(e.scale, 2.0 / 3.0) * I;
}

double boundary_beta(const CharacteristicEnsemble& e, double L_hint) {
    double Ls = stored_hint(e, L_hint);
    if (Ls <= 0.0) Ls = l_stored(e, 0.0);
    Boundary b = boundary_stored(e, Ls);
    const double m = mass_stored(e, b);
    // Near x = 0 the flow makes w(x) = w(0) - c x - (3/4) c kappa x^{4/3} + ...,
    // so w is fitted as a quadratic in the frozen exit time T(x) instead, in
    // which it is smooth and dT/dx = 1 at the boundary.
    const double kappa = std::pow(Ls, -1.0 / 3.0);
    auto coord = [&](std::size_t i) {
        if (e.t == 0.0) return e.x[i];  // no flow yet: w is smooth in x itself
        double T = exit_time(e.x[i], kappa);
        return std::isfinite(T) ? T : e.x[i];
    };
    double slope;
    if (e.x.size() >= 3) {
        // The w values of survivors are exact, unlike the interpolated boundary.
        const double x0 = coord(0), x1 = coord(1), x2 = coord(2);
        const double f0 = e.w[0], f1 = e.w[1], f2 = e.w[2];
        slope = f0 * (-x1 - x2) / ((x0 - x1) * (x0 - x2)) +
                f1 * (-x0 - x2) / ((x1 - x0) * (x1 - x2)) +
                f2 * (-x0 - x1) / ((x2 - x0) * (x2 - x1));
    } else {
        slope = (e.w[0] - b.w) / coord(0);
    }
    return -slope * m / (b.w * b.w);
}

SurvivalProfile ensemble_profile(const CharacteristicEnsemble& e, double L_hint) {
    BoundaryState b = boundary_state(e, L_hint);
    SurvivalProfile p;
    p.x.reserve(e.x.size() + 1);
    p.w.reserve(e.x.size() + 1);
    p.x.push_back(0.0);
    p.w.push_back(b.w);
    for (std::size_t i = 0; i < e.x.size(); ++i) {
        p.x.push_back(e.position(i));
        p.w.push_back(e.w[i]);
    }
    p.tail = TailModel::compact();
    return p;
}

void step_characteristics(CharacteristicEnsemble& e, const std::function<double(double)>& L_path,
                          double dt) {
    const double S = e.scale;
    auto kappa = [&](double s) { return std::pow(L_path(S * s) / S, -1.0 / 3.0); };
    // Split so that no single call spans more than a tenth of the critical size.
    const double Ls = L_path(0.0) / S;
    const double ds_total = dt / S;
    const std::size_t pieces = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(ds_total / (0.01 * Ls))));
    for (std::size_t k = 0; k < pieces && !e.x.empty(); ++k) {
        double s0 = ds_total * static_cast<double>(k) / pieces;
        double s1 = ds_total * static_cast<double>(k + 1) / pieces;
        advance_segment(e, s0, s1 - s0, kappa, &e.exits);
    }
}

PicardResult picard_solve_interval(const CharacteristicEnsemble& e, double delta, double tol,
                                   std::size_t max_iter) {
    PicardResult out;
    const double L0 = l_stored(e, 0.0);
    const double h = delta * L0;
    std::array<double, kNodes> s{}, vals{}, next{};
    for (std::size_t k = 0; k < kNodes; ++k)
        s[k] = 0.5 * h * (1.0 - std::cos(std::numbers::pi * static_cast<double>(k) / (kNodes - 1)));
    vals.fill(L0);
    double prev = 0.0;
    for (std::size_t it = 0; it < max_iter; ++it) {
        CharacteristicEnsemble scratch = light_copy(e);
        auto kappa = [&](double at) { return std::pow(interp4(s, vals, at), -1.0 / 3.0); };
        next[0] = L0;
        bool extinct = false;
        for (std::size_t k = 1; k < kNodes; ++k) {
            advance_segment(scratch, s[k - 1], s[k] - s[k - 1], kappa, &scratch.exits);
            if (scratch.x.empty()) {
                extinct = true;
                break;
            }
            next[k] = l_stored(scratch, vals[k]);
        }
        if (extinct) throw Extinction("all characteristics exited within one interval");
        double d = 0.0;
        for (std::size_t k = 0; k < kNodes; ++k) d = std::max(d, std::fabs(next[k] - vals[k]) / L0);
        out.corrections.push_back(d);
        // Ratios near round-off carry no information about the contraction.
        if (it > 0 && prev > 1e-13) out.max_ratio = std::max(out.max_ratio, d / prev);
        prev = d;
        out.iterations = it + 1;
        vals = next;
        if (d < tol) {
            out.converged = true;
            out.end = std::move(scratch);
            break;
        }
    }
    for (std::size_t k = 0; k < kNodes; ++k) {
        out.s.push_back(e.scale * s[k]);
        out.L.push_back(e.scale * vals[k]);
    }
    return out;
}

std::size_t reseed_boundary(CharacteristicEnsemble& e, double L_hint, double gap,
                            std::size_t capacity) {
    double Ls = stored_hint(e, L_hint);
    if (Ls <= 0.0) Ls = l_stored(e, 0.0);
    const double target = gap * Ls;
    std::size_t inserted = 0;
    for (int pass = 0; pass < 8; ++pass) {
        const Boundary b = boundary_stored(e, Ls);
        std::size_t before = inserted;
        std::vector<double> nx, nw, ny;
        nx.reserve(e.x.size() + 64);
        nw.reserve(e.x.size() + 64);
        ny.reserve(e.x.size() + 64);
        // x is interpolated through the frozen exit time T(x), which is smooth
        // in the label near the boundary where x itself is not. The boundary
        // label sits at T = 0.
        const double kappa = std::pow(Ls, -1.0 / 3.0);
        auto lab = [&](std::ptrdiff_t j) { return j < 0 ? b.label : e.label[static_cast<std::size_t>(j)]; };
        auto pos = [&](std::ptrdiff_t j) { return j < 0 ? 0.0 : e.x[static_cast<std::size_t>(j)]; };
        const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(e.x.size());
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            nx.push_back(e.x[static_cast<std::size_t>(i)]);
            nw.push_back(e.w[static_cast<std::size_t>(i)]);
            ny.push_back(e.label[static_cast<std::size_t>(i)]);
            if (i + 1 >= n || e.x[static_cast<std::size_t>(i)] > 2.0 * Ls) continue;
            if (e.x.size() + inserted >= capacity) continue;
            const double xl = pos(i), xr = pos(i + 1);
            if (xr - xl <= target) continue;
            const double ym = 0.5 * (lab(i) + lab(i + 1));
            if (!(ym > lab(i) && ym < lab(i + 1))) continue;
            std::ptrdiff_t lo = std::max<std::ptrdiff_t>(-1, i - 1);
            if (lo + 3 >= n) lo = std::max<std::ptrdiff_t>(-1, n - 4);
            const bool use_T = lo + 3 < n && kappa * std::cbrt(pos(lo + 3)) < 0.9;
            auto coord = [&](std::ptrdiff_t j) { return use_T ? exit_time(pos(j), kappa) : pos(j); };
            double xm = 0.5 * (xl + xr);
            if (lo + 3 < n) {
                double cm = 0.0;
                for (std::ptrdiff_t a = lo; a < lo + 4; ++a) {
                    double term = coord(a);
                    for (std::ptrdiff_t c = lo; c < lo + 4; ++c)
                        if (c != a) term *= (ym - lab(c)) / (lab(a) - lab(c));
                    cm += term;
                }
                if (use_T) {
                    double a = xl, z = xr;
                    if (cm > exit_time(a, kappa) && cm < exit_time(z, kappa)) {
                        for (int it = 0; it < 100 && z - a > 1e-15 * z; ++it) {
                            const double mid = 0.5 * (a + z);
                            (exit_time(mid, kappa) < cm ? a : z) = mid;
                        }
                        xm = 0.5 * (a + z);
                    }
                } else {
                    xm = cm;
                }
            }
            if (!(xm > xl && xm < xr)) xm = 0.5 * (xl + xr);
            nx.push_back(xm);
            nw.push_back(e.initial->eval_smooth(ym));
            ny.push_back(ym);
            ++inserted;
        }
        e.x = std::move(nx);
        e.w = std::move(nw);
        e.label = std::move(ny);
        if (inserted == before) break;
    }
    return inserted;
}

namespace {

TraceSample make_sample(const CharacteristicEnsemble& e, double Ls) {
    TraceSample r;
    const Boundary b = boundary_stored(e, Ls);
    r.t = e.t;
    r.L = e.scale * Ls;
    r.Lambda = e.mass0 / b.w;
    r.mass = e.scale * mass_stored(e, b);
    r.E = ensemble_energy(e, r.L);
    r.beta0 = boundary_beta(e, r.L);
    r.gamma = r.Lambda / r.L;
    r.boundary_label = b.label;
    r.survivors = e.x.size();
    return r;
}

EnsembleSnapshot make_snapshot(const CharacteristicEnsemble& e, const TraceSample& s) {
    EnsembleSnapshot snap;
    snap.t = s.t;
    snap.tau = s.tau;
    snap.Lambda = s.Lambda;
    snap.L = s.L;
    snap.beta0 = s.beta0;
    snap.profile = ensemble_profile(e, s.L);
    snap.label.reserve(e.label.size() + 1);
    snap.label.push_back(s.boundary_label);
    snap.label.insert(snap.label.end(), e.label.begin(), e.label.end());
    return snap;
}

// Largest breach of 0 < F' <= 1 and of F' nondecreasing, relative.
double slope_violation(const CharacteristicEnsemble& e, const TraceSample& s) {
    double worst = 0.0, prev = 0.0;
    auto check = [&](double slope, bool first) {
        if (!(slope > 0.0)) worst = std::max(worst, 1.0);
        worst = std::max(worst, slope - 1.0 - 1e-12);
        if (!first) worst = std::max(worst, (prev - slope) / prev);
        prev = slope;
    };
    if (e.x.empty()) return 0.0;
    check((e.label[0] - s.boundary_label) / e.position(0), true);
    for (std::size_t i = 0; i + 1 < e.x.size(); ++i)
        check((e.label[i + 1] - e.label[i]) / (e.scale * (e.x[i + 1] - e.x[i])), false);
    return worst;
}

std::string at_time(const char* what, double t, double value) {
    std::ostringstream os;
    os << what << " at t=" << t << ": " << value;
    return os.str();
}

}  // namespace

CoarseningTrace advance_global(CharacteristicEnsemble& e, const SolverOptions& opt) {
    CoarseningTrace trace;
    std::vector<double> snaps = opt.snapshot_times;
    std::sort(snaps.begin(), snaps.end());
    std::size_t next_snap = 0;
    while (next_snap < snaps.size() && snaps[next_snap] <= e.t) ++next_snap;
    const std::size_t capacity = 4 * e.x.size() + 4096;

    double Ls = l_stored(e, 0.0);
    TraceSample cur = make_sample(e, Ls);
    trace.samples.push_back(cur);
    trace.snapshots.push_back(make_snapshot(e, cur));
    bool mass_flagged = false, gamma_flagged = false, energy_flagged = false, ratio_flagged = false;

    auto finish = [&](const std::string& why) {
        trace.stop_reason = why;
        if (trace.snapshots.back().t != cur.t) trace.snapshots.push_back(make_snapshot(e, cur));
    };

    while (true) {
        if (e.t >= opt.T_final * (1.0 - 1e-14)) { finish("T_final"); return trace; }
        if (cur.tau >= opt.tau_final * (1.0 - 1e-9)) { finish("tau_final"); return trace; }
        if (trace.steps >= opt.max_steps) { finish("max_steps"); return trace; }
        if (e.x.size() < opt.survivor_floor && !e.flat()) { finish("extinction"); return trace; }

        if (Ls < 0.5 || Ls > 2.0) {
            rescale(e, Ls);
            Ls = l_stored(e, 1.0);
        }
        if (opt.reseed && reseed_boundary(e, e.scale * Ls, opt.reseed_gap, capacity) > 0)
            Ls = l_stored(e, Ls);

        const double L = e.scale * Ls;
        double dt = opt.delta * L;
        dt = std::min(dt, opt.T_final - e.t);
        bool hits_snap = false;
        if (next_snap < snaps.size() && snaps[next_snap] - e.t <= dt) {
            dt = snaps[next_snap] - e.t;
            hits_snap = true;
        }
        if (std::isfinite(opt.tau_final)) {
            // Invert the trapezoid rule with Lambda extrapolated by beta(0, t).
            const double need = opt.tau_final - cur.tau;
            double guess = need * cur.Lambda;
            for (int k = 0; k < 4; ++k) {
                double lam1 = cur.Lambda + cur.beta0 * guess;
                guess = 2.0 * need / (1.0 / cur.Lambda + 1.0 / lam1);
            }
            if (guess <= dt) {
                dt = guess;
                hits_snap = false;
            }
        }
        if (!(dt > 0.0)) { finish("T_final"); return trace; }

        PicardResult pr;
        double delta = dt / L;
        bool ok = false;
        for (int halving = 0; halving <= 8; ++halving) {
            try {
                pr = picard_solve_interval(e, delta, opt.tol, opt.max_picard);
            } catch (const Extinction&) {
                { finish("extinction"); return trace; }
            }
            if (pr.converged) {
                ok = true;
                break;
            }
            delta *= 0.5;
            hits_snap = false;
            ++trace.delta_halvings;
        }
        if (!ok) {
            trace.violations.push_back(at_time("Picard failed to converge", e.t, pr.corrections.back()));
            { finish("picard"); return trace; }
        }
        std::vector<ExitRecord> fresh = std::move(pr.end.exits);
        pr.end.exits = std::move(e.exits);
        pr.end.exits.insert(pr.end.exits.end(), fresh.begin(), fresh.end());
        e = std::move(pr.end);
        if (e.x.empty()) { finish("extinction"); return trace; }

        Ls = l_stored(e, pr.L.back() / e.scale);
        TraceSample nxt = make_sample(e, Ls);
        nxt.tau = cur.tau + 0.5 * (nxt.t - cur.t) * (1.0 / cur.Lambda + 1.0 / nxt.Lambda);
        nxt.picard_iters = pr.iterations;
        nxt.contraction = pr.max_ratio;
        nxt.first_correction = pr.corrections.front();
        ++trace.steps;
        trace.picard_iters_total += pr.iterations;
        trace.max_contraction = std::max(trace.max_contraction, pr.max_ratio);

        const double drift_mass = std::fabs(nxt.mass - e.mass0);
        trace.max_mass_drift = std::max(trace.max_mass_drift, drift_mass);
        if (drift_mass > opt.mass_tol && !mass_flagged) {
            trace.violations.push_back(at_time("mass drift", nxt.t, drift_mass));
            mass_flagged = true;
        }
        if (nxt.gamma < 1.0 - 1e-9 && !gamma_flagged) {
            trace.violations.push_back(at_time("gamma below 1", nxt.t, nxt.gamma));
            gamma_flagged = true;
        }
        if (nxt.E > std::pow(nxt.Lambda, -1.0 / 3.0) * (1.0 + 1e-12) && !energy_flagged) {
            trace.violations.push_back(at_time("energy above Lambda^{-1/3}", nxt.t, nxt.E));
            energy_flagged = true;
        }
        if (pr.max_ratio >= 1.0 && !ratio_flagged) {
            trace.violations.push_back(at_time("Picard ratio not below 1", nxt.t, pr.max_ratio));
            ratio_flagged = true;
        }
        trace.max_slope_violation = std::max(trace.max_slope_violation, slope_violation(e, nxt));

        cur = nxt;
        trace.samples.push_back(cur);
        if (hits_snap) {
            trace.snapshots.push_back(make_snapshot(e, cur));
            ++next_snap;
        }
    }
}

IdentityReport coarsening_identity_check(const CoarseningTrace& trace, double sup_beta0,
                                         double tolerance) {
    IdentityReport r;
    r.tolerance = tolerance;
    const auto& s = trace.samples;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        const double h0 = s[i].t - s[i - 1].t, h1 = s[i + 1].t - s[i].t;
        if (!(h0 > 0.0 && h1 > 0.0)) continue;
        // Three-point derivative on a nonuniform grid.
        const double d = -h1 / (h0 * (h0 + h1)) * s[i - 1].Lambda +
                         (h1 - h0) / (h0 * h1) * s[i].Lambda +
                         h0 / (h1 * (h0 + h1)) * s[i + 1].Lambda;
        const double b = s[i].beta0;
        const double err = std::fabs(d - b) <= 1e-10 ? 0.0 : std::fabs(d - b) / std::max(std::fabs(b), 1e-8);
        ++r.samples;
        if (err <= tolerance) ++r.within;
        r.max_rel_error = std::max(r.max_rel_error, err);
    }
    r.fraction_within = r.samples ? static_cast<double>(r.within) / r.samples : 1.0;
    if (!s.empty()) {
        r.worst_upper_margin = std::numeric_limits<double>::infinity();
        r.worst_energy_margin = std::numeric_limits<double>::infinity();
        for (const auto& x : s) {
            const double up = s.front().Lambda + sup_beta0 * (x.t - s.front().t) - x.Lambda;
            const double en = std::pow(x.Lambda, -1.0 / 3.0) - x.E;
            r.worst_upper_margin = std::min(r.worst_upper_margin, up);
            r.worst_energy_margin = std::min(r.worst_energy_margin, en);
            if (up < -1e-9 * x.Lambda) r.upper_bound_ok = false;
            if (en < -1e-12) r.energy_bound_ok = false;
        }
    }
    return r;
}

namespace {

FlowBeta flow_beta(const SurvivalProfile& now, const std::vector<double>& label,
                   const SurvivalProfile& initial) {
    FlowBeta out;
    const BetaProfile direct = beta_from_profile(now);
    const TailMass h = integrate_tail(now);
    const TailMass h0 = integrate_tail(initial);
    const BetaProfile b0 = beta_from_profile(initial);
    const std::size_t n = now.size();
    out.x = now.x;
    out.direct = direct.beta;
    out.transported.assign(n, std::numeric_limits<double>::quiet_NaN());
    out.grid_spacing = max_spacing(now);
    // Stay clear of the end, where both routes lean on one-sided data.
    const std::size_t stop = n > 4 ? std::min(direct.trusted(), n - 2) : 0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double slope = (label[i + 1] - label[i - 1]) / (now.x[i + 1] - now.x[i - 1]);
        const double h0y = h0.eval(label[i]);
        if (!(h0y > 0.0)) continue;
        out.transported[i] = b0.eval(label[i]) * slope * h.h[i] / h0y;
        if (i < stop && std::isfinite(direct.beta[i]))
            out.discrepancy = std::max(out.discrepancy, std::fabs(out.transported[i] - direct.beta[i]));
    }
    return out;
}

}  // namespace

FlowBeta beta_along_flow(const CharacteristicEnsemble& e, double L_hint) {
    if (e.x.size() < 3) throw Extinction("beta_along_flow needs three survivors");
    SurvivalProfile now = ensemble_profile(e, L_hint);
    std::vector<double> label{boundary_state(e, L_hint).label};
    label.insert(label.end(), e.label.begin(), e.label.end());
    return flow_beta(now, label, *e.initial);
}

FlowBeta beta_along_flow(const EnsembleSnapshot& snap, const SurvivalProfile& initial) {
    return flow_beta(snap.profile, snap.label, initial);
}

std::vector<double> g_function(const SurvivalProfile& p, double L) {
    const std::size_t n = p.size();
    std::vector<double> g(n, std::numeric_limits<double>::quiet_NaN());
    double H = 0.0, S = 0.0;
    const double k = 1.0 / (3.0 * std::cbrt(L));
    for (std::size_t i = n - 1; i-- > 0;) {
        const double a = p.x[i], b = p.x[i + 1];
        H += 0.5 * (b - a) * (p.w[i] + p.w[i + 1]);
        S += kernels::detail::cell_xm23(a, b, std::cbrt(a), std::cbrt(b), p.w[i], p.w[i + 1]);
        if (i == 0 || !(H > 0.0)) continue;
        g[i] = k * (std::pow(a, -2.0 / 3.0) - S / H);
    }
    return g;
}

BetaEvolutionReport beta_evolution_diagnostics(const CoarseningTrace& trace, double beta_tol,
                                               double g_tol) {
    BetaEvolutionReport rep;
    double prev_sup = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < trace.snapshots.size(); ++k) {
        const auto& snap = trace.snapshots[k];
        SnapshotDiagnostics d;
        d.t = snap.t;
        const BetaProfile b = beta_from_profile(snap.profile);
        d.x = snap.profile.x;
        d.beta = b.beta;
        d.g = g_function(snap.profile, snap.L);
        d.sup_beta = b.sup();
        d.min_g = std::numeric_limits<double>::infinity();
        const std::size_t n = d.x.size();
        const std::size_t trusted = b.trusted();
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (!std::isfinite(d.g[i])) continue;
            d.min_g = std::min(d.min_g, d.g[i]);
            if (i + 2 < n && std::isfinite(d.g[i + 1]))
                d.max_g_increase = std::max(d.max_g_increase, (d.g[i + 1] - d.g[i]) / std::fabs(d.g[i]));
        }
        for (std::size_t i = 0; i + 1 < trusted; ++i)
            d.max_beta_decrease = std::max(d.max_beta_decrease, d.beta[i] - d.beta[i + 1]);
        if (k == 0) {
            rep.monotone_hypothesis = d.sup_beta <= 1.0 + beta_tol;
            rep.increasing_hypothesis = rep.monotone_hypothesis && d.max_beta_decrease <= beta_tol;
        }
        if (d.min_g < -g_tol) {
            rep.g_nonnegative = false;
            rep.violations.push_back(at_time("g negative", d.t, d.min_g));
        }
        if (d.sup_beta > prev_sup + beta_tol) {
            rep.sup_beta_nonincreasing = false;
            rep.violations.push_back(at_time("sup beta increased", d.t, d.sup_beta - prev_sup));
        }
        prev_sup = std::min(prev_sup, d.sup_beta);
        if (rep.monotone_hypothesis && d.max_g_increase > g_tol) {
            rep.g_monotone = false;
            rep.violations.push_back(at_time("g increased", d.t, d.max_g_increase));
        }
        if (rep.increasing_hypothesis && d.max_beta_decrease > beta_tol) {
            rep.beta_monotone = false;
            rep.violations.push_back(at_time("beta decreased", d.t, d.max_beta_decrease));
        }
        rep.snapshots.push_back(std::move(d));
    }
    return rep;
}

NormalizedView normalized_view(const EnsembleSnapshot& snap) {
    NormalizedView v;
    v.tau = snap.tau;
    v.Lambda = snap.Lambda;
    v.gamma = snap.Lambda / snap.L;
    const auto& p = snap.profile;
    v.y.resize(p.size());
    v.w.resize(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        v.y[i] = p.x[i] / snap.Lambda;
        v.w[i] = p.w[i] * snap.Lambda;
    }
    v.beta = beta_from_profile(p).beta;
    // The one-sided grid estimate at x = 0 misses the x^{4/3} term of w there.
    if (std::isfinite(snap.beta0)) v.beta.front() = snap.beta0;
    v.w_at_zero = v.w.front();
    for (std::size_t i = 0; i + 1 < v.y.size(); ++i) v.mass += 0.5 * (v.y[i + 1] - v.y[i]) * (v.w[i] + v.w[i + 1]);
    return v;
}

StationarityReport stationarity(const EnsembleSnapshot& earlier, const EnsembleSnapshot& later,
                                double interior_fraction) {
    const NormalizedView a = normalized_view(earlier), b = normalized_view(later);
    StationarityReport r;
    r.interior_fraction = interior_fraction;
    r.beta_earlier = a.beta.front();
    r.beta_later = b.beta.front();
    auto as_profile = [](const NormalizedView& v) {
        SurvivalProfile p;
        p.x = v.y;
        p.w = v.w;
        return p;
    };
    const SurvivalProfile pa = as_profile(a), pb = as_profile(b);
    const double end = std::max(pa.x.back(), pb.x.back());
    auto scan = [&](const SurvivalProfile& nodes, const SurvivalProfile& other) {
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const double y = nodes.x[i];
            const double d = std::fabs(nodes.w[i] - other.eval(y));
            if (d > r.sup_diff) {
                r.sup_diff = d;
                r.at_y = y;
            }
            if (y <= interior_fraction * end) r.sup_diff_interior = std::max(r.sup_diff_interior, d);
        }
    };
    scan(pa, pb);
    scan(pb, pa);
    return r;
}

DyadicReport dyadic_diagnostics(const CoarseningTrace& trace, int max_level, double ratio_tol) {
    DyadicReport rep;
    if (trace.snapshots.empty()) {
        rep.insufficient_resolution = true;
        return rep;
    }
    const double top = trace.snapshots.front().profile.w0();
    // beta1 from the regular variation exponent at the end of the initial data.
    const SurvivalProfile& p0 = trace.snapshots.front().profile;
    RegularVariation rv = regular_variation_exponent(p0);
    rep.beta1 = rv.p / (1.0 + rv.p);
    rep.predicted_ratio = std::exp2(1.0 / rep.beta1 - 1.0);
    std::vector<std::vector<double>> lengths;  // [snapshot][N], NaN when exited
    for (const auto& snap : trace.snapshots) {
        DyadicLevels lv;
        lv.tau = snap.tau;
        std::vector<double> y(max_level + 2, std::numeric_limits<double>::quiet_NaN());
        for (int N = 0; N <= max_level + 1; ++N) {
            const double level = top * std::exp2(-N);
            if (level > snap.profile.w0() * (1.0 + 1e-12)) continue;  // already gone through x = 0
            y[N] = snap.profile.quantile(level) / snap.Lambda;
        }
        std::vector<double> len(max_level + 1, std::numeric_limits<double>::quiet_NaN());
        for (int N = 0; N <= max_level; ++N) {
            if (std::isnan(y[N]) || std::isnan(y[N + 1])) continue;
            len[N] = y[N + 1] - y[N];
            lv.N.push_back(N);
            lv.length.push_back(len[N]);
        }
        lengths.push_back(len);
        rep.per_snapshot.push_back(std::move(lv));
    }
    const auto& first = lengths.front();
    for (int N = 0; N < max_level; ++N) {
        if (std::isnan(first[N]) || std::isnan(first[N + 1]) || !(first[N + 1] > 0.0)) break;
        rep.ratio_at_zero.push_back(first[N] / first[N + 1]);
    }
    if (rep.per_snapshot.front().N.size() < 4) rep.insufficient_resolution = true;
    for (std::size_t k = 1; k < lengths.size(); ++k) {
        for (int N = 0; N < max_level; ++N) {
            const double a0 = lengths[k - 1][N], b0 = lengths[k - 1][N + 1];
            const double a1 = lengths[k][N], b1 = lengths[k][N + 1];
            if (std::isnan(a0) || std::isnan(b0) || std::isnan(a1) || std::isnan(b1)) continue;
            const double drop = a0 / b0 - a1 / b1;
            rep.worst_ratio_drop = std::max(rep.worst_ratio_drop, drop / (a0 / b0));
            if (drop > ratio_tol * (a0 / b0)) rep.ratio_nondecreasing = false;
        }
    }
    return rep;
}

}  // namespace lsw
