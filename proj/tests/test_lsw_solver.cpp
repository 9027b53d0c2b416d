#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "lsw/families.hpp"
#include "lsw/lsw_solver.hpp"

using namespace lsw;

namespace {

GridOptions small_grid() {
    GridOptions g;
    g.nodes = 1024;
    return g;
}

}  // namespace

TEST_SUITE("lsw_solver") {

TEST_CASE("seeding keeps the grid and unit mass") {
    const SurvivalProfile p = exponential_profile(small_grid());
    const CharacteristicEnsemble e = CharacteristicEnsemble::from_profile(p);
    // the node at x = 0 is the boundary, not a survivor
    CHECK(e.survivors() == p.size() - 1);
    CHECK(e.label.front() == p.x[1]);
    CHECK(ensemble_mass(e, 0.0) == doctest::Approx(1.0).epsilon(1e-9));
    const double L = l_from_state(e);
    CHECK(std::cbrt(L) == doctest::Approx(l_cbrt(truncate_to_compact(p))).epsilon(1e-9));
}

TEST_CASE("block data is stationary") {
    CharacteristicEnsemble e = CharacteristicEnsemble::from_profile(indicator_profile());
    SolverOptions o;
    o.T_final = 5.0;
    const CoarseningTrace tr = advance_global(e, o);
    CHECK(tr.stop_reason == "T_final");
    for (const auto& s : tr.samples) {
        CHECK(s.Lambda == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(s.L == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(s.mass == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("exponential data: conservation, identity, bounds, Picard") {
    CharacteristicEnsemble e = CharacteristicEnsemble::from_profile(exponential_profile(small_grid()));
    SolverOptions o;
    o.T_final = 2.0;
    o.snapshot_times = {1.0};
    const CoarseningTrace tr = advance_global(e, o);
    CHECK(tr.stop_reason == "T_final");
    CHECK(tr.max_mass_drift <= 1e-4);
    CHECK(tr.violations.empty());
    CHECK(tr.max_contraction < 1.0);
    for (const auto& s : tr.samples) {
        CHECK(s.picard_iters <= 10);
        CHECK(s.gamma >= 1.0 - 1e-9);
    }
    const IdentityReport r = coarsening_identity_check(tr, 1.0);
    CHECK(r.fraction_within >= 0.95);
    CHECK(r.upper_bound_ok);
    CHECK(r.energy_bound_ok);
    CHECK(tr.snapshots.size() == 3);
    CHECK(tr.snapshots[1].t == doctest::Approx(1.0));
    CHECK(tr.samples.back().Lambda > tr.samples.front().Lambda);
}

TEST_CASE("values ride the characteristics unchanged") {
    CharacteristicEnsemble e = CharacteristicEnsemble::from_profile(exponential_profile(small_grid()));
    const std::vector<double> y0 = e.label, w0 = e.w;
    SolverOptions o;
    o.T_final = 1.0;
    advance_global(e, o);
    std::size_t matched = 0;
    for (std::size_t i = 0; i < e.survivors(); ++i) {
        auto it = std::lower_bound(y0.begin(), y0.end(), e.label[i]);
        if (it == y0.end() || *it != e.label[i]) continue;
        CHECK(e.w[i] == w0[static_cast<std::size_t>(it - y0.begin())]);
        ++matched;
    }
    CHECK(matched > 100);
    for (std::size_t i = 1; i < e.survivors(); ++i) {
        CHECK(e.label[i] > e.label[i - 1]);
        CHECK(e.x[i] > e.x[i - 1]);
    }
}

TEST_CASE("boundary label sits between the last exit and the first survivor") {
    CharacteristicEnsemble e = CharacteristicEnsemble::from_profile(exponential_profile(small_grid()));
    SolverOptions o;
    o.T_final = 0.5;
    o.reseed = false;
    advance_global(e, o);
    const double L = l_from_state(e);
    const BoundaryState b = boundary_state(e, L);
    CHECK(b.label >= e.last_exit.label);
    CHECK(b.label <= e.label.front());
    CHECK(b.w <= 1.0);
    CHECK(b.w >= e.w.front());
}

TEST_CASE("Picard iteration contracts on one interval") {
    const CharacteristicEnsemble e = CharacteristicEnsemble::from_profile(exponential_profile(small_grid()));
    const PicardResult r = picard_solve_interval(e, 0.05);
    CHECK(r.converged);
    CHECK(r.iterations <= 10);
    CHECK(r.max_ratio < 1.0);
    for (std::size_t i = 1; i < r.corrections.size(); ++i) CHECK(r.corrections[i] < r.corrections[i - 1]);
    const PicardResult h = picard_solve_interval(e, 0.025);
    const double ratio = r.corrections.front() / h.corrections.front();
    CHECK(ratio >= std::cbrt(2.0) / 2.0);
    CHECK(ratio <= std::cbrt(2.0) * 2.0);
}

TEST_CASE("reseeding refines the boundary region") {
    CharacteristicEnsemble e = CharacteristicEnsemble::from_profile(exponential_profile(small_grid()));
    const double L = l_from_state(e);
    const std::size_t before = e.survivors();
    const std::size_t added = reseed_boundary(e, L, 1e-4, before + 200);
    CHECK(added > 0);
    CHECK(added <= 200);
    CHECK(e.survivors() == before + added);
    for (std::size_t i = 1; i < e.survivors(); ++i) {
        CHECK(e.label[i] > e.label[i - 1]);
        CHECK(e.w[i] <= e.w[i - 1]);
    }
}

TEST_CASE("current profile and g function") {
    CharacteristicEnsemble e = CharacteristicEnsemble::from_profile(constant_beta_profile(0.5, small_grid()));
    SolverOptions o;
    o.T_final = 1.0;
    const CoarseningTrace tr = advance_global(e, o);
    const SurvivalProfile cur = ensemble_profile(e, tr.samples.back().L);
    CHECK_NOTHROW(cur.validate());
    CHECK(mass(cur) == doctest::Approx(1.0).epsilon(1e-4));
    const std::vector<double> g = g_function(cur, tr.samples.back().L);
    CHECK(std::isnan(g.front()));  // undefined at x = 0 and at the end
    CHECK(std::isnan(g.back()));
    for (std::size_t i = 1; i + 1 < g.size(); ++i) CHECK(g[i] >= -1e-6);

    const NormalizedView v = normalized_view(tr.snapshots.back());
    CHECK(v.mass == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(v.w_at_zero == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("half-beta data: dyadic ratios start at two") {
    CharacteristicEnsemble e = CharacteristicEnsemble::from_profile(constant_beta_profile(0.5));
    SolverOptions o;
    o.T_final = 1.0;
    const CoarseningTrace tr = advance_global(e, o);
    const DyadicReport d = dyadic_diagnostics(tr);
    REQUIRE(d.ratio_at_zero.size() >= 10);
    CHECK(d.predicted_ratio == doctest::Approx(2.0));
    CHECK(d.ratio_at_zero[9] == doctest::Approx(2.0).epsilon(0.05));
    CHECK(d.ratio_nondecreasing);
}

TEST_CASE("few survivors end the run") {
    SurvivalProfile p;
    for (int i = 0; i <= 20; ++i) {
        p.x.push_back(i / 20.0);
        p.w.push_back(1.0 - 0.5 * i / 20.0);
    }
    CharacteristicEnsemble e = CharacteristicEnsemble::from_profile(p);
    SolverOptions o;
    o.T_final = 100.0;
    o.reseed = false;
    const CoarseningTrace tr = advance_global(e, o);
    CHECK(tr.stop_reason == "extinction");
    CHECK(tr.samples.back().t < 100.0);
}

}
