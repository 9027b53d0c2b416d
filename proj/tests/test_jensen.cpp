#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "lsw/families.hpp"
#include "lsw/jensen.hpp"
#include "oracles.hpp"

using namespace lsw;

namespace {

std::vector<std::pair<std::string, SurvivalProfile>> all_families() {
    return {{"beta 0.25", constant_beta_profile(0.25)}, {"beta 0.5", constant_beta_profile(0.5)},
            {"beta 1", constant_beta_profile(1.0)},     {"beta 2", constant_beta_profile(2.0)},
            {"exponential", exponential_profile()},     {"indicator", indicator_profile()},
            {"example1", example1_profile(0.3)},        {"example2", example2_profile(0.3, 2.0)},
            {"power tail", power_tail_profile(1.0)}};
}

}  // namespace

TEST_SUITE("jensen") {

TEST_CASE("moment ratio never exceeds one, with equality only for the indicator") {
    for (const auto& [name, p] : all_families()) {
        CAPTURE(name);
        const double m = mean(p);
        for (int k = 1; k <= 9; ++k) {
            const double a = 0.1 * k;
            const double r = moment(p, a) / std::pow(m, a);
            CHECK(r <= 1.0 + 1e-12);
            if (name == "indicator") CHECK(r == doctest::Approx(1.0).epsilon(1e-12));
            else CHECK(r < 1.0 - 1e-6);
        }
    }
}

TEST_CASE("reverse certificate for the exponential") {
    const JensenCertificate c = reverse_jensen(exponential_profile(), 0.5);
    REQUIRE(c.applicable);
    CHECK(c.C_used == doctest::Approx(std::sqrt(std::log(2.0)) / 2.0).epsilon(1e-6));
    CHECK(c.lhs == doctest::Approx(std::sqrt(M_PI) / 2.0).epsilon(1e-5));
    CHECK(c.pass);
}

TEST_CASE("reverse certificate for the indicator uses C = 1/2") {
    for (double a : {0.2, 0.5, 0.8}) {
        const JensenCertificate c = reverse_jensen(indicator_profile(), a);
        CHECK(c.C_used == doctest::Approx(0.5));
        CHECK(c.pass);
    }
}

TEST_CASE("reverse certificate passes on constant beta data and both examples") {
    std::vector<SurvivalProfile> ps{constant_beta_profile(0.25), constant_beta_profile(0.5),
                                    constant_beta_profile(0.75), constant_beta_profile(1.0),
                                    example1_profile(0.3), example2_profile(0.3, 2.0)};
    for (const auto& p : ps)
        for (int k = 1; k <= 9; ++k) {
            const JensenCertificate c = reverse_jensen(p, 0.1 * k);
            CHECK(c.applicable);
            CHECK(c.pass);
        }
}

TEST_CASE("sharp certificate") {
    const JensenCertificate e = sharp_jensen(exponential_profile(), 0.5);
    CHECK(e.eta_observed == doctest::Approx(1.0 - std::sqrt(M_PI) / 2.0).epsilon(1e-4));
    CHECK(e.eta_used > 0.0);
    CHECK(e.eta_used <= e.eta_observed);
    CHECK(e.pass);

    // beta = 1/2: X is uniform on [0, 2], so <X^{1/2}> = 2 sqrt(2) / 3
    const JensenCertificate h = sharp_jensen(constant_beta_profile(0.5), 0.5);
    CHECK(h.eta_observed == doctest::Approx(1.0 - 2.0 * std::sqrt(2.0) / 3.0).epsilon(1e-6));
    CHECK(h.pass);

    const JensenCertificate i = sharp_jensen(indicator_profile(), 0.5);
    CHECK_FALSE(i.applicable);
}

TEST_CASE("sharp bound grows with inf beta") {
    for (double a : {0.25, 0.5, 0.75}) {
        double prev = 0.0;
        for (double b0 : {0.25, 0.5, 0.75, 1.0}) {
            const double eta = sharp_eta_bound(a, b0);
            CHECK(eta > 0.0);
            CHECK(eta >= prev);
            prev = eta;
        }
    }
}

TEST_CASE("tail and conditional mean bounds") {
    const TailBoundReport e = tail_and_conditional_bounds(exponential_profile());
    CHECK(e.beta0 == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(e.pass);
    for (double lam : {0.5, 1.0, 2.0, 5.0}) CHECK(std::exp(-lam) <= 1.0 / (1.0 + lam));

    const SurvivalProfile half = constant_beta_profile(0.5);
    CHECK(tail_and_conditional_bounds(half).pass);
    // oracle: uniform law on [0, 2] has E[X | X > x] = 1 + x/2, the bound itself
    for (double x : {0.0, 0.5, 1.0, 1.5}) {
        const double cond = expectation(half, [x](double y) { return y > x ? y : 0.0; }, {x}) / (1.0 - x / 2.0);
        CHECK(cond == doctest::Approx(1.0 + x / 2.0).epsilon(1e-6));
    }
}

TEST_CASE("quantitative gap") {
    const JensenGapReport e = quantitative_jensen_gap(exponential_profile(), 0.5);
    // at alpha = 1/2 the two sides coincide: both are 2 - sqrt(pi)
    CHECK(e.lhs == doctest::Approx(2.0 - std::sqrt(M_PI)).epsilon(1e-4));
    CHECK(e.rhs == doctest::Approx(2.0 - std::sqrt(M_PI)).epsilon(1e-4));
    CHECK(e.asserted);
    CHECK(e.pass);

    // oracle: X uniform on [0, 2]; E|1 - X^{1/4}|^4 and E X^{1/4} by Simpson
    const double lhs = 0.007293662395343778, ex14 = 0.95136567152532591;
    const JensenGapReport h = quantitative_jensen_gap(constant_beta_profile(0.5), 0.25);
    CHECK(h.lhs == doctest::Approx(lhs).epsilon(1e-5));
    CHECK(h.rhs == doctest::Approx(4.0 * (1.0 - ex14)).epsilon(1e-6));
    CHECK(h.pass);

    const JensenGapReport i = quantitative_jensen_gap(indicator_profile(), 0.5);
    CHECK(i.lhs == doctest::Approx(0.0));
    CHECK(i.pass);

    const JensenGapReport big = quantitative_jensen_gap(exponential_profile(), 0.75);
    CHECK_FALSE(big.asserted);
}

}
