#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "ustat/normal.hpp"
#include "ustat/rng.hpp"
#include "ustat/stein.hpp"

using namespace ustat;

TEST_CASE("erfcx and normal routines") {
    CHECK(static_cast<double>(erfcx_ld(0.0L)) == 1.0);
    CHECK(static_cast<double>(erfcx_ld(1.0L)) ==
          doctest::Approx(0.427583576155807).epsilon(1e-14));
    CHECK(static_cast<double>(erfcx_ld(5.0L)) ==
          doctest::Approx(0.11070463773306861).epsilon(1e-14));
    CHECK(norm_cdf(0.0) == 0.5);
    CHECK(norm_sf(0.0) == 0.5);
    CHECK(norm_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-13));
    CHECK(inverse_normal_cdf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
    for (double p = 0.001; p < 1.0; p += 0.013)
        CHECK(norm_cdf(inverse_normal_cdf(p)) == doctest::Approx(p).epsilon(1e-12));
    CHECK_THROWS_AS(inverse_normal_cdf(0.0), std::domain_error);
}

TEST_CASE("stein_f: closed-form anchor at (0,0)") {
    const auto e = stein_f(0.0, 0.0);
    CHECK(static_cast<double>(e.f) ==
          doctest::Approx(0.62665706865775006).epsilon(1e-14));  // sqrt(2 pi)/4
    CHECK(static_cast<double>(e.f) <= 0.63);
    // Stein equation at w = 0: f' = I(0 <= 0) - Phi(0) + 0 = 1/2
    CHECK(static_cast<double>(e.fprime) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("stein_f: decay, continuity at the threshold") {
    // Mills ratio: f_z(w) ~ Phi-bar(z)/|w| as w -> -inf
    const double f30 = static_cast<double>(stein_f(0.0, -30.0).f);
    CHECK(f30 == doctest::Approx(0.5 / 30.0).epsilon(2e-3));
    CHECK(static_cast<double>(stein_f(0.0, -40.0).f) < f30);
    CHECK(stein_f(0.0, -30.0).f > 0.0L);
    for (double z = -5.0; z <= 5.0; z += 0.25) {
        const auto left = stein_f(z, z);
        const auto right = stein_f(z, std::nextafter(z, 1e9));
        CHECK(std::abs(static_cast<double>(left.f - right.f)) <= 1e-12);
    }
}

TEST_CASE("stein_f stays finite and positive over |w|,|z| <= 40") {
    for (const double z : {-40.0, -10.0, 0.0, 10.0, 40.0}) {
        for (const double w : {-40.0, -10.0, 0.0, 10.0, 40.0}) {
            const auto e = stein_f(z, w);
            CHECK(e.f > 0.0L);
            CHECK(std::isfinite(static_cast<double>(e.fprime)));
        }
    }
    rng_stream rng(444, 0, 0);
    for (int i = 0; i < 10'000; ++i) {
        const double z = (rng.next_unit() - 0.5) * 80.0;
        const double w = (rng.next_unit() - 0.5) * 80.0;
        const auto e = stein_f(z, w);
        CHECK(e.f > 0.0L);
        CHECK(std::isfinite(static_cast<double>(e.fprime)));
    }
}

TEST_CASE("lemma A.2 suite: every regional bound holds with positive slack") {
    // coarser grid here; the acceptance suite runs the full 0.01 grid
    const auto rep = lemma_a2_suite(0.05, 20'000, 99);
    REQUIRE(rep.checks.size() == 8);
    for (const auto& c : rep.checks) {
        INFO(c.label, " worst slack ", c.worst_slack, " at z=", c.at_z, " w=", c.at_w);
        CHECK(c.pass);
        CHECK(c.worst_slack > 0.0);
    }
    CHECK(rep.all_pass);
}

TEST_CASE("bennett: scaled rademacher matches cosh(1/10)^100 and clears 8.15") {
    const auto r = bennett_mc_check(100, 150'000, 12);
    CHECK(std::abs(r.estimate - 1.647351558321556) <= 4.0 * r.se);
    CHECK(r.estimate + 5.0 * r.se <= kBennettBound);
}

TEST_CASE("bennett: single rademacher variable gives cosh(1)") {
    const auto r = bennett_mc_check(1, 200'000, 5);
    CHECK(std::abs(r.estimate - 1.5430806348152437) <= 4.0 * r.se);
}

TEST_CASE("bennett: centered exponential family stays under the bound") {
    const auto r = bennett_mc_check(50, 150'000, 31, bennett_family::scaled_centered_exponential);
    CHECK(r.estimate + 5.0 * r.se <= kBennettBound);
}

TEST_CASE("bennett: zero family is exactly 1") {
    const auto r = bennett_mc_check(10, 10'000, 3, bennett_family::zero);
    CHECK(r.estimate == 1.0);
    CHECK(r.se == 0.0);
}
