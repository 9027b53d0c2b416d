#include <doctest.h>

#include <cmath>

#include "lsw/families.hpp"
#include "lsw/profile.hpp"
#include "oracles.hpp"

using namespace lsw;

namespace {

double sup_beta_error(const BetaProfile& b, double expected) {
    double err = 0.0;
    for (std::size_t i = 0; i < b.trusted(); ++i) err = std::max(err, std::fabs(b.beta[i] - expected));
    return err;
}

}  // namespace

TEST_SUITE("profiles") {

TEST_CASE("constant-beta tail mass matches the closed form") {
    for (double b : {0.25, 0.5, 1.0, 2.0}) {
        CAPTURE(b);
        const SurvivalProfile p = constant_beta_profile(b);
        const TailMass tm = integrate_tail(p);
        double worst = 0.0;
        for (std::size_t i = 0; i + 1 < p.size(); i += 7) {
            // w ~ d^{b/(1-b)} near a compact end amplifies the rounding of x
            CHECK(p.w[i] == doctest::Approx(static_cast<double>(oracle::w_const_beta(b, p.x[i]))).epsilon(1e-9));
            worst = std::max(worst, std::fabs(tm.h[i] - static_cast<double>(oracle::h_const_beta(b, p.x[i]))));
        }
        // linear interpolation of w costs O(dx^2) in h
        CHECK(worst <= 1e-4);
        CHECK(mass(p) == doctest::Approx(1.0).epsilon(1e-4));
    }
}

TEST_CASE("beta of constant-beta data is the constant, and survives the round trip") {
    for (double b : {0.25, 0.5, 1.0, 2.0}) {
        CAPTURE(b);
        const SurvivalProfile p = constant_beta_profile(b);
        const BetaProfile beta = beta_from_profile(p);
        const double spacing = max_spacing(p);
        CHECK(sup_beta_error(beta, b) <= 10.0 * spacing);

        const SurvivalProfile back = profile_from_beta(beta, mean(p));
        const BetaProfile again = beta_from_profile(back);
        double err = 0.0;
        for (std::size_t i = 0; i < std::min(beta.trusted(), again.trusted()); ++i)
            err = std::max(err, std::fabs(again.eval(beta.x[i]) - beta.beta[i]));
        CHECK(err <= 10.0 * spacing);
        CHECK(mass(back) == doctest::Approx(1.0).epsilon(1e-4));
        CHECK(back.w0() == doctest::Approx(1.0 / mean(p)).epsilon(1e-9));
    }
}

TEST_CASE("example 1 beta follows the hand-derived formula") {
    const double eps = 0.3;
    CHECK(example1_beta(eps, 0.7) == doctest::Approx(static_cast<double>(oracle::example1_beta(eps, 0.7L))));
    const SurvivalProfile p = example1_profile(eps);
    const BetaProfile b = beta_from_profile(p);
    double err = 0.0;
    for (std::size_t i = 0; i < b.trusted(); ++i)
        err = std::max(err, std::fabs(b.beta[i] - static_cast<double>(oracle::example1_beta(eps, b.x[i]))));
    CHECK(err <= 10.0 * max_spacing(p));
    // both one-sided limits of beta are finite and positive
    CHECK(b.inf() > 0.0);
    CHECK(b.sup() < 2.0);
}

TEST_CASE("moments match quadrature oracles") {
    const SurvivalProfile e = exponential_profile();
    // the linear representative of a convex w overshoots by O(dx^2)
    CHECK(moment(e, 0.5) == doctest::Approx(std::sqrt(M_PI) / 2).epsilon(1e-5));
    CHECK(mean(e) == doctest::Approx(1.0).epsilon(1e-4));
    // oracle: beta = 1/4 profile, <X^{1/3}> by Simpson in u = x^{1/3}
    const double frozen = 0.9722187528493235;
    CHECK(moment(constant_beta_profile(0.25), 1.0 / 3.0) == doctest::Approx(frozen).epsilon(1e-6));
}

TEST_CASE("support bounds for compact data with sup beta below one") {
    for (double b : {0.25, 0.5, 0.75}) {
        CAPTURE(b);
        const SurvivalProfile p = constant_beta_profile(b);
        const double m = mean(p), end = p.support_end(), sb = beta_from_profile(p).sup();
        CHECK(m <= end);
        CHECK(end <= m / (1.0 - sb) * (1.0 + 1e-9));
    }
}

TEST_CASE("regular variation at the support end") {
    CHECK(regular_variation_exponent(constant_beta_profile(0.5)).p == doctest::Approx(1.0).epsilon(0.05));
    CHECK(regular_variation_exponent(constant_beta_profile(0.25)).p == doctest::Approx(1.0 / 3.0).epsilon(0.05));
    const RegularVariation ex2 = regular_variation_exponent(example2_profile(0.0, 2.0));
    CHECK(ex2.p == doctest::Approx(2.0).epsilon(0.05));
    CHECK_FALSE(ex2.oscillating);
    CHECK_THROWS_AS(regular_variation_exponent(exponential_profile()), UnsupportedOperation);
}

TEST_CASE("fisher information in both forms") {
    for (const SurvivalProfile& p : {constant_beta_profile(0.5), exponential_profile(), example1_profile(0.3)}) {
        const FisherInformation f = fisher_information(integrate_tail(p));
        CHECK(std::fabs(f.direct - f.beta_form) <= 1e-3 * f.direct);
    }
}

TEST_CASE("indicator: energy and critical size are exact") {
    const SurvivalProfile p = indicator_profile();
    CHECK(energy(p) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(l_cbrt(p) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(mass(p) == doctest::Approx(1.0).epsilon(1e-14));
    const BetaProfile b = beta_from_profile(p);
    CHECK(b.sup() == doctest::Approx(0.0));
}

TEST_CASE("power tail has unit mass and rejects eps <= 0") {
    for (double eps : {0.5, 1.0, 2.0}) {
        CAPTURE(eps);
        const SurvivalProfile p = power_tail_profile(eps);
        CHECK(mass(p) == doctest::Approx(1.0).epsilon(1e-4));
        CHECK(p.w0() == doctest::Approx(eps));
    }
    CHECK_THROWS_AS(make_family("power-tail", {{"eps", 0.0}}), DomainError);
    CHECK_THROWS_AS(make_family("no-such-family", {}), DomainError);
    CHECK_THROWS_AS(make_family("constant-beta", {{"bogus", 1.0}}), DomainError);
}

TEST_CASE("invalid profiles are rejected") {
    SurvivalProfile p;
    p.x = {0.0, 1.0, 2.0};
    p.w = {1.0, 1.5, 0.5};
    CHECK_THROWS_AS(p.validate(), InvalidProfile);
    p.w = {1.0, 0.5, 0.2};
    p.x = {0.0, 2.0, 1.0};
    CHECK_THROWS_AS(p.validate(), InvalidProfile);
    p.x = {0.0, 1.0, 2.0};
    p.tail = TailModel::power(0.8, 1.0);
    CHECK_THROWS_AS(p.validate(), NonIntegrableTail);
    p.tail = TailModel::power(2.0, 1.0);
    CHECK_NOTHROW(p.validate());
}

TEST_CASE("beta is invariant under dilation") {
    const SurvivalProfile p = example1_profile(0.3);
    const SurvivalProfile q = dilate(p, 2.5);
    const BetaProfile bp = beta_from_profile(p), bq = beta_from_profile(q);
    double err = 0.0;
    for (std::size_t i = 0; i < bp.trusted(); ++i) err = std::max(err, std::fabs(bq.eval(2.5 * bp.x[i]) - bp.beta[i]));
    CHECK(err <= 1e-6);
    CHECK(mean(q) == doctest::Approx(2.5 * mean(p)).epsilon(1e-12));
}

TEST_CASE("quantile inverts w") {
    const SurvivalProfile p = exponential_profile();
    for (double level : {0.9, 0.5, 0.1, 1e-3}) CHECK(p.eval(p.quantile(level)) == doctest::Approx(level).epsilon(1e-12));
    CHECK(p.quantile(2.0) == 0.0);
}

}
