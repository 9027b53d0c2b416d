#include <doctest.h>

#include <cmath>

#include "lsw/families.hpp"
#include "lsw/map_iteration.hpp"

using namespace lsw;

TEST_SUITE("map_iteration") {

TEST_CASE("built-in maps are valid and invert") {
    const MapF c = MapF::cube_root(), l = MapF::linear(0.5);
    CHECK_NOTHROW(c.validate());
    CHECK_NOTHROW(l.validate());
    CHECK(c(0.0) == doctest::Approx(std::cbrt(2.0) - 1.0));
    for (double y : {0.3, 1.0, 4.0, 50.0}) {
        CHECK(c(c.inverse(y)) == doctest::Approx(y).epsilon(1e-12));
        CHECK(c(c.inverse(y, 0.0, 100.0)) == doctest::Approx(y).epsilon(1e-12));
        if (y >= l(0.0)) CHECK(l(l.inverse(y)) == doctest::Approx(y).epsilon(1e-12));
    }
    CHECK_THROWS(l.inverse(0.3));
    // F(x) = x at x = 1 for both: (1 + x)^{1/3} = 2^{1/3}
    CHECK(fixed_point_and_gamma(c).a_F == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(fixed_point_and_gamma(l).a_F == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("maps outside the class are rejected") {
    CHECK_THROWS_AS(MapF::linear(1.5).validate(), InvalidMap);
    CHECK_THROWS_AS(MapF::tabulated({0.0, 1.0, 2.0}, {0.5, 1.0, 1.2}).validate(), InvalidMap);  // concave
    CHECK_THROWS_AS(MapF::tabulated({0.0, 1.0}, {0.0, 0.5}).validate(), InvalidMap);            // F(0) = 0
    CHECK_NOTHROW(MapF::tabulated({0.0, 1.0, 2.0}, {0.5, 0.7, 1.1}).validate());
}

TEST_CASE("cube-root map never raises beta pointwise") {
    for (const SurvivalProfile& p : {exponential_profile(), constant_beta_profile(0.5)}) {
        IterateOptions o;
        o.steps = 20;
        const IterationState s = iterate(p, MapF::cube_root(), o);
        double prev = s.history.front().sup_beta;
        for (const auto& r : s.history) {
            CHECK(r.l2_excess_formula <= 1e-5);
            CHECK(r.sup_beta <= prev + 1e-3);
            prev = r.sup_beta;
        }
    }
}

TEST_CASE("linear map transports beta exactly") {
    IterateOptions o;
    o.steps = 10;
    const IterationState s = iterate(example1_profile(0.3), MapF::linear(0.5), o);
    for (const auto& r : s.history) {
        CHECK(r.l2_excess_formula <= 1e-6);
        CHECK(r.l2_deficit_formula <= 1e-6);
    }
}

TEST_CASE("the indicator stays an indicator") {
    IterateOptions o;
    o.steps = 10;
    const IterationState s = iterate(indicator_profile(), MapF::cube_root(), o);
    for (const auto& r : s.history) {
        CHECK(r.ratio_third == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.ratio_half == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("iteration does not see the initial scale") {
    IterateOptions o;
    o.steps = 5;
    const SurvivalProfile p = exponential_profile();
    const IterationState a = iterate(p, MapF::cube_root(), o);
    const IterationState b = iterate(dilate(p, 3.0), MapF::cube_root(), o);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t i = 1; i < a.history.size(); ++i) {
        CHECK(a.history[i].ratio_third == doctest::Approx(b.history[i].ratio_third).epsilon(1e-6));
        CHECK(a.history[i].sup_beta == doctest::Approx(b.history[i].sup_beta).epsilon(1e-4));
    }
}

TEST_CASE("normalization fixes the rho-moment") {
    const Normalized n = normalize(exponential_profile(), 1.0 / 3.0, 2.0);
    CHECK(std::pow(moment(n.profile, 1.0 / 3.0), 3.0) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("image below F(0) is reported") {
    IterateOptions o;
    o.K = 0.1;  // lambda ||X|| = 0.1 < F(0) = 2^{1/3} - 1
    o.steps = 3;
    CHECK_THROWS_AS(iterate(indicator_profile(), MapF::cube_root(), o), DegenerateImage);
}

}
