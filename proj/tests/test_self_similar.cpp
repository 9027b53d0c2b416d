#include <doctest.h>

#include <cmath>

#include "lsw/errors.hpp"
#include "lsw/profile.hpp"
#include "lsw/self_similar.hpp"
#include "oracles.hpp"

using namespace lsw;

TEST_SUITE("self_similar") {

TEST_CASE("oracle reproduces its frozen values") {
    CHECK(static_cast<double>(oracle::f_alpha_root(0.1L)) == doctest::Approx(1.534673051457626).epsilon(1e-15));
    CHECK(static_cast<double>(oracle::Gamma(0.1L, 1.534673051457626L / 2)) ==
          doctest::Approx(2.5987512961474649).epsilon(1e-12));
}

TEST_CASE("roots of f") {
    const FAlphaRoots r = f_alpha_roots(0.1);
    CHECK(r.a == doctest::Approx(1.534673051457626).epsilon(1e-13));
    CHECK(r.upper > r.a);
    const double u = std::cbrt(r.upper);
    CHECK(1.0 - u + 0.1 * r.upper == doctest::Approx(0.0).epsilon(1e-12));

    const FAlphaRoots d = f_alpha_roots(4.0 / 27.0);
    CHECK(d.a == doctest::Approx(27.0 / 8.0).epsilon(1e-5));
    CHECK(d.upper == doctest::Approx(27.0 / 8.0).epsilon(1e-5));

    // a = 1 + 3 alpha + O(alpha^2)
    CHECK(f_alpha_roots(1e-6).a == doctest::Approx(1.0 + 3e-6).epsilon(1e-10));

    CHECK_THROWS_AS(f_alpha_roots(0.0), DomainError);
    CHECK_THROWS_AS(f_alpha_roots(0.2), DomainError);
}

TEST_CASE("Gamma against the substituted Simpson oracle") {
    const SelfSimilarProfile p(0.1);
    CHECK(p.Gamma(p.a() / 2) == doctest::Approx(2.5987512961474649).epsilon(1e-10));
    for (double f : {0.1, 0.9, 0.999}) {
        const double z = f * p.a();
        CHECK(p.Gamma(z) == doctest::Approx(static_cast<double>(oracle::Gamma(0.1L, z))).epsilon(1e-8));
    }
}

TEST_CASE("identities across alpha") {
    for (double alpha : {0.02, 0.05, 0.10, 0.14}) {
        CAPTURE(alpha);
        const SelfSimilarProfile p = build_self_similar(alpha);
        CHECK(std::fabs(p.z4_residual()) <= 1e-5);
        const GAlphaReport g = g_alpha_report(p, 512);
        CHECK(g.g0 == doctest::Approx(alpha * p.gamma()).epsilon(1e-4));
        CHECK(std::fabs(g.g_end - g.g_end_expected) <= 1e-4);
        CHECK(g.g_end_expected == doctest::Approx(3.0 * alpha * std::pow(p.a(), 2.0 / 3.0)));
        CHECK(g.max_decrease <= 1e-8);
        CHECK(g.min_lower_margin >= -1e-10);
        CHECK(g.ode_residual <= 1e-6);
        CHECK(g.ac4_residual_zero <= 1e-6);
        CHECK(g.ac4_residual_half <= 1e-6);
        CHECK(std::isfinite(g.log_total_variation));
    }
}

TEST_CASE("batch g agrees with single evaluations") {
    const SelfSimilarProfile p(0.05);
    std::vector<double> z;
    for (int i = 0; i < 20; ++i) z.push_back(p.a() * i / 20.0);
    const std::vector<double> g = p.g_alpha(z);
    for (std::size_t i = 0; i < z.size(); ++i) CHECK(g[i] == doctest::Approx(p.g_alpha(z[i])).epsilon(1e-10));
}

TEST_CASE("endpoint value approaches one near the double root") {
    const double alpha = 4.0 / 27.0 - 1e-4;
    const SelfSimilarProfile p(alpha, 5e-5);
    CHECK(3.0 * alpha * std::pow(p.a(), 2.0 / 3.0) == doctest::Approx(1.0).epsilon(2e-2));
}

TEST_CASE("alpha too close to 4/27 is refused") {
    CHECK_THROWS_AS(build_self_similar(4.0 / 27.0 - 1e-4), DomainError);
}

TEST_CASE("solver seed is a unit-mass profile") {
    const SelfSimilarProfile p(0.05);
    const SurvivalProfile w = seed_solver(p);
    CHECK_NOTHROW(w.validate());
    CHECK(w.compact());
    CHECK(w.w0() == doctest::Approx(1.0));
    CHECK(mass(w) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(w.support_end() <= p.support_end());
    CHECK(w.support_end() >= p.support_end() * (1.0 - 1e-6));
    // beta of w* at y is g_alpha(gamma y)
    const BetaProfile b = beta_from_profile(w);
    for (double f : {0.1, 0.5, 0.9}) {
        const double y = f * w.support_end();
        CHECK(b.eval(y) == doctest::Approx(p.g_alpha(p.gamma() * y)).epsilon(1e-3));
    }
}

}
