#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "ustat/hoeffding.hpp"
#include "ustat/moments.hpp"

using namespace ustat;

TEST_CASE("psi_tilde_r anchors") {
    const auto& rad = law_registry("rademacher");
    const auto& u3 = law_registry("uniform3");
    const kernel xy = kernel_registry("product", 2);
    const kernel sv = kernel_registry("sample_variance", 2);

    for (const double x : {-1.0, 1.0}) {
        CHECK(psi_tilde_r(xy, rad, 1, std::span<const double>(&x, 1)) ==
              doctest::Approx(0.0).epsilon(1e-15));
    }
    // r = m: h~^2(args) - sigma_h^2
    const std::vector<double> pair{1.0, -1.0};
    CHECK(psi_tilde_r(xy, rad, 2, pair) == doctest::Approx(0.0).epsilon(1e-15));  // 1 - 1
    // uniform3 sample variance at x = 1: Psi_1(1) - sigma_h^2 = 1/6 - 5/9
    const double one = 1.0;
    CHECK(psi_tilde_r(sv, u3, 1, std::span<const double>(&one, 1)) ==
          doctest::Approx(1.0 / 6 - 5.0 / 9).epsilon(1e-13));
    CHECK_THROWS_AS(psi_tilde_r(xy, rad, 3, pair), std::invalid_argument);
}

TEST_CASE("pi_1 is psi_tilde_1 verbatim") {
    const auto& u3 = law_registry("uniform3");
    const kernel sv = kernel_registry("sample_variance", 2);
    for (const double x : {0.0, 1.0, 2.0, 0.5}) {
        const std::span<const double> arg(&x, 1);
        CHECK(pi_r_h2(sv, u3, 1, arg) == psi_tilde_r(sv, u3, 1, arg));
    }
}

TEST_CASE("pi_r has exact mean zero and complete degeneracy") {
    struct case_t {
        const char* law;
        const char* kern;
    };
    for (const auto& [law_name, kname] : {case_t{"rademacher", "product"},
                                          case_t{"uniform3", "sample_variance"},
                                          case_t{"uniform3", "mean_pow3"}}) {
        const auto& law = law_registry(law_name);
        const kernel k = kernel_registry(kname, 2);
        const auto support = law.support();
        const auto probs = law.probs();

        // E[pi_2] = 0 over the product law
        double mean = 0;
        for (std::size_t i = 0; i < support.size(); ++i)
            for (std::size_t j = 0; j < support.size(); ++j) {
                const std::vector<double> args{support[i], support[j]};
                mean += probs[i] * probs[j] * pi_r_h2(k, law, 2, args);
            }
        CHECK(std::abs(mean) <= 1e-12);

        // complete degeneracy: E[pi_2(x, Y)] = 0 for each fixed x
        for (std::size_t i = 0; i < support.size(); ++i) {
            double cond = 0;
            for (std::size_t j = 0; j < support.size(); ++j) {
                const std::vector<double> args{support[i], support[j]};
                cond += probs[j] * pi_r_h2(k, law, 2, args);
            }
            CHECK(std::abs(cond) <= 1e-12);
        }
    }
}

TEST_CASE("decompose_uh2: rademacher product has R = lhs (leading terms cancel)") {
    const auto& rad = law_registry("rademacher");
    const kernel xy = kernel_registry("product", 2);
    const auto prof = exact_moments(xy, rad);
    const auto data = make_dataset(rad, 10, 3);
    const auto dec = decompose_uh2(data, xy, prof);
    REQUIRE(dec.eta.size() == 10);
    for (const double e : dec.eta) CHECK(e == doctest::Approx(0.2).epsilon(1e-14));  // m/n
    // sum eta - m == 0, so lhs must equal R
    CHECK(dec.lhs == doctest::Approx(dec.remainder_r).epsilon(1e-12));
}

TEST_CASE("decompose_uh2 identity across seeded instances") {
    int instances = 0;
    for (const char* law_name : {"rademacher", "uniform3"}) {
        const auto& law = law_registry(law_name);
        for (const char* kname : {"product", "sample_variance"}) {
            const kernel k = kernel_registry(kname, 2);
            const auto prof = exact_moments(k, law);
            if (!(prof.var_h > 0)) continue;
            for (int n = 6; n <= 12; ++n) {
                rng_stream rng(static_cast<std::uint64_t>(n), 8, 0);
                const auto data = make_dataset(law, n, 0, rng);
                const auto dec = decompose_uh2(data, k, prof);
                double eta_sum = 0;
                for (const double e : dec.eta) eta_sum += e;
                CHECK(std::abs(dec.lhs - (eta_sum - k.degree + dec.remainder_r)) <= 1e-10);
                ++instances;
            }
        }
    }
    CHECK(instances == 28);
}

TEST_CASE("decompose_uh2 refuses non-exact profiles") {
    const auto& u3 = law_registry("uniform3");
    const kernel sv = kernel_registry("sample_variance", 2);
    const auto data = make_dataset(u3, 8, 1);
    mc_options opt{20'000, 3, 512, true};
    const auto mc_prof = mc_moments(sv, u3, opt);
    CHECK_THROWS_AS(decompose_uh2(data, sv, mc_prof), std::invalid_argument);
}

TEST_CASE("r_norm32_bound values and scaling") {
    const auto& rad = law_registry("rademacher");
    const auto& u3 = law_registry("uniform3");
    const auto prof_xy = exact_moments(kernel_registry("product", 2), rad);
    CHECK(r_norm32_bound(prof_xy, 100) == doctest::Approx(0.0).epsilon(1e-14));

    const auto prof_sv = exact_moments(kernel_registry("sample_variance", 2), u3);
    const double at100 = r_norm32_bound(prof_sv, 100);
    CHECK(at100 == doctest::Approx(0.02702257707962118).epsilon(1e-12));
    const double at400 = r_norm32_bound(prof_sv, 400);
    CHECK(at400 / at100 <= 0.5 + 1e-9);  // single m=2 term scales like C(n,2)^{-1/2}

    // monotone decreasing in n
    double prev = r_norm32_bound(prof_sv, 10);
    for (int n = 20; n <= 200; n += 10) {
        const double cur = r_norm32_bound(prof_sv, n);
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("r_norm32_bound refuses profiles without pi_r moments") {
    const auto& u3 = law_registry("uniform3");
    mc_options opt{20'000, 3, 512, true};
    const auto mc_prof = mc_moments(kernel_registry("sample_variance", 2), u3, opt);
    CHECK_THROWS_AS(r_norm32_bound(mc_prof, 100), std::invalid_argument);
}

TEST_CASE("psi_tilde_r_mc tracks the exact value") {
    const auto& u3 = law_registry("uniform3");
    const kernel sv = kernel_registry("sample_variance", 2);
    rng_stream rng(13, 0, 0);
    const double one = 1.0;
    const std::span<const double> arg(&one, 1);
    const double mc = psi_tilde_r_mc(sv, u3, 1, arg, 200'000, rng);
    CHECK(std::abs(mc - (1.0 / 6 - 5.0 / 9)) <= 0.01);
}

TEST_CASE("r_norm32_mc: replicated ||R||_{3/2} sits below the moment bound") {
    const auto& u3 = law_registry("uniform3");
    const kernel sv = kernel_registry("sample_variance", 2);
    const auto prof = exact_moments(sv, u3);
    for (const int n : {12, 24}) {
        const auto est = r_norm32_mc(sv, u3, prof, n, 2'000, 77);
        CHECK(est.value > 0.0);
        CHECK(est.value + 4.0 * est.se <= r_norm32_bound(prof, n));
    }
}

TEST_CASE("degree-3 decomposition identity (pi_2 and pi_3 sums)") {
    const auto& u3 = law_registry("uniform3");
    const kernel prod3 = kernel_registry("product", 3);
    const auto prof = exact_moments(prod3, u3);
    REQUIRE(prof.var_h > 0);
    rng_stream rng(21, 0, 0);
    const auto data = make_dataset(u3, 9, 0, rng);
    const auto dec = decompose_uh2(data, prod3, prof);
    double eta_sum = 0;
    for (const double e : dec.eta) eta_sum += e;
    CHECK(std::abs(dec.lhs - (eta_sum - 3 + dec.remainder_r)) <= 1e-10);
}
