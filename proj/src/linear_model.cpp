#include "lsw/linear_model.hpp"

#include <algorithm>
#include <cmath>

namespace lsw {

namespace {

struct Anchors {
    double ya = 0.0, yb = 0.0;  // labels of the two anchors
};

struct AffineState {
    double F0 = 0.0, k = 1.0;
};

AffineState affine(const Anchors& a, double xa, double xb) {
    AffineState s;
    s.k = (a.yb - a.ya) / (xb - xa);
    s.F0 = a.ya - xa * s.k;
    return s;
}

// L = mass / w(0) with w(x) = w0(F0 + k x).
double critical_size(const TailMass& tm, const AffineState& s) {
    const double w = tm.profile.eval(s.F0);
    if (!(w > 0.0)) throw Extinction("linear model: boundary value reached zero");
    return tm.eval(s.F0) / (s.k * w);
}

// The current w on the nodes of the initial grid still ahead of F0.
SurvivalProfile reconstruct(const SurvivalProfile& w0, const AffineState& s) {
    SurvivalProfile out;
    out.tail = TailModel::compact();
    out.x.push_back(0.0);
    out.w.push_back(w0.eval(s.F0));
    auto it = std::upper_bound(w0.x.begin(), w0.x.end(), s.F0);
    for (; it != w0.x.end(); ++it) {
        const std::size_t i = static_cast<std::size_t>(it - w0.x.begin());
        const double x = (w0.x[i] - s.F0) / s.k;
        if (x <= out.x.back()) continue;
        out.x.push_back(x);
        out.w.push_back(w0.w[i]);
    }
    return out;
}

bool all_equal(const SurvivalProfile& p) {
    for (double v : p.w)
        if (v != p.w.front()) return false;
    return true;
}

}  // namespace

LinearRun advance_linear(const LinearRunConfig& cfg) {
    cfg.initial.validate();
    LinearRun run;
    run.compact_input = cfg.initial.compact();
    const SurvivalProfile w0 =
        run.compact_input ? normalize_mass(cfg.initial) : truncate_to_compact(cfg.initial);
    const TailMass tm = integrate_tail(w0);
    const BetaProfile beta0 = beta_from_profile(w0);
    const double mass0 = tm.h.front();

    const Anchors anchors{0.0, w0.x.back()};
    // State: the two anchors, then the probes.
    std::vector<double> labels{anchors.ya, anchors.yb};
    for (double f : cfg.probes) labels.push_back(f * anchors.yb);
    std::vector<double> x = labels;  // F(., 0) is the identity
    double t = 0.0;

    auto rhs = [&](const std::vector<double>& s, std::vector<double>& out) {
        const double L = critical_size(tm, affine(anchors, s[0], s[1]));
        out.resize(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) out[i] = -1.0 + s[i] / L;
        return L;
    };

    CoarseningTrace& trace = run.trace;
    TraceSample prev;
    auto record = [&](std::size_t picard_like) {
        const AffineState s = affine(anchors, x[0], x[1]);
        const SurvivalProfile cur = reconstruct(w0, s);
        TraceSample r;
        r.t = t;
        r.L = critical_size(tm, s);
        const double wb = cur.w.front();
        r.Lambda = mass0 / wb;
        r.mass = tm.eval(s.F0) / s.k;
        r.gamma = r.Lambda / r.L;
        r.boundary_label = s.F0;
        r.survivors = cur.size() - 1;
        r.picard_iters = picard_like;
        r.E = energy(cur);
        if (cur.size() >= 3) {
            const BetaProfile b = beta_from_profile(cur);
            r.beta0 = b.beta.front();
            run.beta_grid_spacing = std::max(run.beta_grid_spacing, cur.x[1] - cur.x[0]);
        }
        r.tau = trace.samples.empty()
                    ? 0.0
                    : prev.tau + 0.5 * (r.t - prev.t) * (1.0 / prev.Lambda + 1.0 / r.Lambda);
        const double expected = beta0.eval(s.F0);
        run.beta_initial.push_back(expected);
        if (cur.size() >= 3 && !all_equal(cur))
            run.max_beta_gap = std::max(run.max_beta_gap, std::fabs(r.beta0 - expected));
        for (std::size_t i = 2; i < x.size(); ++i) {
            const double mapped = s.F0 + s.k * x[i];
            run.max_affine_error =
                std::max(run.max_affine_error, std::fabs(mapped - labels[i]) / anchors.yb);
        }
        const double drift = std::fabs(r.mass - mass0);
        trace.max_mass_drift = std::max(trace.max_mass_drift, drift);
        run.F0.push_back(s.F0);
        run.k.push_back(s.k);
        trace.samples.push_back(r);
        prev = r;
        return cur;
    };

    auto stop = [&](const char* why) {
        trace.stop_reason = why;
        EnsembleSnapshot snap;
        snap.t = prev.t;
        snap.tau = prev.tau;
        snap.Lambda = prev.Lambda;
        snap.L = prev.L;
        snap.beta0 = prev.beta0;
        snap.profile = reconstruct(w0, affine(anchors, x[0], x[1]));
        trace.snapshots.push_back(std::move(snap));
    };

    {
        EnsembleSnapshot snap;
        snap.profile = record(0);
        snap.Lambda = prev.Lambda;
        snap.L = prev.L;
        snap.beta0 = prev.beta0;
        trace.snapshots.push_back(std::move(snap));
    }

    std::vector<double> k1, k2, k3, k4, tmp(x.size());
    bool mass_flagged = false;
    while (true) {
        if (t >= cfg.T_final * (1.0 - 1e-14)) { stop("T_final"); return run; }
        try {
            const double L = rhs(x, k1);
            const double dt = std::min(cfg.delta * L, cfg.T_final - t);
            for (std::size_t i = 0; i < x.size(); ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
            rhs(tmp, k2);
            for (std::size_t i = 0; i < x.size(); ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
            rhs(tmp, k3);
            for (std::size_t i = 0; i < x.size(); ++i) tmp[i] = x[i] + dt * k3[i];
            rhs(tmp, k4);
            for (std::size_t i = 0; i < x.size(); ++i)
                x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            t += dt;
            ++trace.steps;
        } catch (const Extinction&) {
            stop("extinction");
            return run;
        }
        const AffineState s = affine(anchors, x[0], x[1]);
        // Past this point h0(F0) is mostly rounding.
        if (anchors.yb - s.F0 < 1e-9 * anchors.yb) { stop("support exhausted"); return run; }
        const SurvivalProfile cur = reconstruct(w0, s);
        if (!(s.F0 < anchors.yb) || !(cur.w.front() > 0.0) ||
            (cur.size() - 1 < 16 && !all_equal(cur))) {
            stop("extinction");
            return run;
        }
        const bool last = t >= cfg.T_final * (1.0 - 1e-14);
        if (last || trace.steps % std::max<std::size_t>(cfg.sample_every, 1) == 0) {
            record(0);
            if (trace.max_mass_drift > 1e-4 && !mass_flagged) {
                trace.violations.push_back("mass drift at t=" + std::to_string(t));
                mass_flagged = true;
            }
        }
    }
}

LimitingBeta limiting_beta(const SurvivalProfile& profile) {
    LimitingBeta out;
    if (!profile.compact()) {
        out.note = "support is not compact";
        return out;
    }
    if (profile.w.back() > 0.0) {
        out.applicable = true;
        out.note = "w jumps to zero at the end";
        return out;
    }
    try {
        const RegularVariation rv = regular_variation_exponent(profile);
        if (rv.oscillating) {
            out.note = "end exponent does not settle";
            return out;
        }
        out.applicable = true;
        out.value = rv.p / (1.0 + rv.p);
    } catch (const UnsupportedOperation& e) {
        out.note = e.what();
    }
    return out;
}

StabilityReport stability_check(const LinearRun& run, const LimitingBeta& limit, double tolerance) {
    StabilityReport r;
    r.tolerance = tolerance;
    r.beta_limit = limit.value;
    r.max_beta_gap = run.max_beta_gap;
    r.note = limit.note;
    if (!limit.applicable || !run.compact_input) {
        r.applicable = false;
        if (r.note.empty()) r.note = "support is not compact";
        return r;
    }
    const auto& s = run.trace.samples;
    if (s.size() < 3) {
        r.applicable = false;
        r.note = "trace too short";
        return r;
    }
    r.T = s.back().t;
    r.ratio_final = s.back().Lambda / r.T;
    double n = 0, st = 0, sl = 0, stt = 0, stl = 0;
    for (const auto& q : s) {
        if (q.t < 2.0 * r.T / 3.0) continue;
        n += 1;
        st += q.t;
        sl += q.Lambda;
        stt += q.t * q.t;
        stl += q.t * q.Lambda;
    }
    const double den = n * stt - st * st;
    r.ratio_fit = n >= 2 && den > 0.0 ? (n * stl - st * sl) / den : r.ratio_final;
    r.pass = std::fabs(r.ratio_final - r.beta_limit) <= tolerance;
    return r;
}

}  // namespace lsw
