#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ustat/kernel.hpp"
#include "ustat/moments.hpp"
#include "ustat/rng.hpp"
#include "ustat/source_law.hpp"

using namespace ustat;

namespace {
double constant_three(const double*, int) { return 3.0; }
}

TEST_CASE("law registry and finite-law invariants") {
    for (const auto& name : law_names()) CHECK_NOTHROW(law_registry(name));
    CHECK_THROWS_AS(law_registry("cauchy"), std::invalid_argument);

    CHECK_THROWS_AS(source_law::finite({0.0}, {1.0}), std::invalid_argument);  // size < 2
    CHECK_THROWS_AS(source_law::finite({0.0, 1.0}, {0.6, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(source_law::finite({1.0, 0.0}, {0.5, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(source_law::finite({0.0, 1.0}, {1.0, -0.0}), std::invalid_argument);
    CHECK_NOTHROW(source_law::finite({-1.0, 2.5}, {0.25, 0.75}));
}

TEST_CASE("sampling: finite laws hit their support with the right frequencies") {
    const auto& u3 = law_registry("uniform3");
    rng_stream rng(17, 0, 0);
    int counts[3] = {0, 0, 0};
    const int reps = 90'000;
    for (int i = 0; i < reps; ++i) {
        const double v = u3.sample(rng);
        CHECK((v == 0.0 || v == 1.0 || v == 2.0));
        counts[static_cast<int>(v)]++;
    }
    for (const int c : counts)
        CHECK(std::abs(c / static_cast<double>(reps) - 1.0 / 3) <= 4.0 * std::sqrt(2.0 / 9 / reps));
}

TEST_CASE("sampling: continuous-law moments") {
    rng_stream rng(29, 0, 0);
    struct case_t {
        const char* name;
        double mean, var;
    };
    for (const auto& [name, mean, var] :
         {case_t{"uniform01", 0.5, 1.0 / 12}, case_t{"exp1", 1.0, 1.0},
          case_t{"stdnormal", 0.0, 1.0}}) {
        const auto& law = law_registry(name);
        const int reps = 200'000;
        double s = 0, s2 = 0;
        for (int i = 0; i < reps; ++i) {
            const double v = law.sample(rng);
            s += v;
            s2 += v * v;
        }
        const double m = s / reps;
        const double v = s2 / reps - m * m;
        CHECK(std::abs(m - mean) <= 5.0 * std::sqrt(var / reps));
        CHECK(std::abs(v - var) <= 0.05 * std::max(var, 0.1));
    }
}

TEST_CASE("dataset: determinism and provenance") {
    const auto& law = law_registry("stdnormal");
    const auto a = make_dataset(law, 50, 123);
    const auto b = make_dataset(law, 50, 123);
    CHECK(a.values == b.values);
    CHECK(a.law == &law);
    CHECK(a.seed == 123);
    const auto c = make_dataset(law, 50, 124);
    CHECK(a.values != c.values);
}

TEST_CASE("kernel symmetry fuzz: permutation-invariant bit for bit") {
    rng_stream rng(7, 0, 0);
    struct case_t {
        kernel k;
        bool packed;
    };
    std::vector<case_t> cases;
    cases.push_back({kernel_registry("product", 2), false});
    cases.push_back({kernel_registry("product", 4), false});
    cases.push_back({kernel_registry("sample_variance", 2), false});
    cases.push_back({kernel_registry("mean_pow3", 2), false});
    cases.push_back({kernel_registry("kendall_sign", 2), true});
    for (const auto& [k, packed] : cases) {
        std::vector<double> args(static_cast<std::size_t>(k.degree));
        for (int t = 0; t < 20'000; ++t) {
            for (auto& a : args) {
                if (packed)
                    a = pack_pair(static_cast<float>(rng.normal()),
                                  static_cast<float>(rng.normal()));
                else
                    a = rng.normal();
            }
            const double base = k(args);
            auto shuffled = args;
            for (std::size_t i = shuffled.size(); i > 1; --i)
                std::swap(shuffled[i - 1], shuffled[rng.bounded(i)]);
            CHECK(k(shuffled) == base);
        }
    }
}

TEST_CASE("pack_pair round-trips") {
    float x = 0, y = 0;
    unpack_pair(pack_pair(1.5f, -2.25f), x, y);
    CHECK(x == 1.5f);
    CHECK(y == -2.25f);
}

TEST_CASE("kendall_sign: concordant/discordant pairs") {
    const kernel k = kernel_registry("kendall_sign", 2);
    const double a = pack_pair(0.0f, 0.0f);
    const double b = pack_pair(1.0f, 2.0f);
    const double c = pack_pair(1.0f, -1.0f);
    CHECK(k(std::vector<double>{a, b}) == 1.0);   // concordant
    CHECK(k(std::vector<double>{a, c}) == -1.0);  // discordant
    CHECK(k(std::vector<double>{b, b}) == 0.0);   // tie
}

TEST_CASE("center_kernel") {
    const auto& rad = law_registry("rademacher");
    const kernel xy = kernel_registry("product", 2);

    SUBCASE("mu = 0 leaves values unchanged") {
        const kernel same = center_kernel(xy, 0.0);
        const std::vector<double> args{0.7, -1.3};
        CHECK(same(args) == xy(args));
        CHECK(same.name == "product_centered");
        CHECK(same.degree == 2);
    }
    SUBCASE("sample variance on uniform3 centers to exact mean zero") {
        const auto& u3 = law_registry("uniform3");
        const kernel sv = kernel_registry("sample_variance", 2);
        const auto prof_raw = exact_moments(sv, u3);
        CHECK(prof_raw.mean_h == doctest::Approx(2.0 / 3).epsilon(1e-15));
        const kernel centered = center_kernel(sv, prof_raw.mean_h);
        const auto prof_c = exact_moments(centered, u3);
        CHECK(std::abs(prof_c.mean_h) <= 1e-15);
        // higher moments are centering-invariant
        CHECK(prof_c.var_h == doctest::Approx(prof_raw.var_h).epsilon(1e-14));
    }
    SUBCASE("constant kernel centered by its value is identically zero") {
        kernel c3;
        c3.degree = 2;
        c3.name = "const3";
        c3.fn = constant_three;
        const kernel zero = center_kernel(c3, 3.0);
        CHECK(zero(std::vector<double>{5.0, -2.0}) == 0.0);
        const auto prof = exact_moments(zero, rad);
        CHECK(prof.var_h == 0.0);
    }
}

TEST_CASE("projection_h_r: exact anchors") {
    const auto& rad = law_registry("rademacher");
    const auto& u3 = law_registry("uniform3");
    const kernel xy = kernel_registry("product", 2);
    const kernel sv = kernel_registry("sample_variance", 2);

    const double one = 1.0;
    CHECK(projection_h_r(xy, rad, 1, std::span<const double>(&one, 1)) == 0.0);
    CHECK(projection_h_r(sv, u3, 1, std::span<const double>(&one, 1)) ==
          doctest::Approx(1.0 / 3).epsilon(1e-14));
    const std::vector<double> pair{0.25, -0.5};
    CHECK(projection_h_r(xy, rad, 2, pair) == xy(pair));  // r = m: verbatim
    CHECK_THROWS_AS(projection_h_r(xy, rad, 0, pair), std::invalid_argument);
    CHECK_THROWS_AS(projection_h_r(xy, rad, 3, pair), std::invalid_argument);
}

TEST_CASE("exact_moments: product kernel on rademacher (degenerate)") {
    const auto prof = exact_moments(kernel_registry("product", 2), law_registry("rademacher"));
    CHECK(prof.mean_h == 0.0);
    CHECK(prof.var_h == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(prof.var_g == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(prof.rank_d == 2);
    CHECK(prof.psi1_pow32 == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(prof.var_h2 == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(prof.prov == provenance::exact);
    // pi_2(h^2) vanishes identically here
    REQUIRE(prof.pi_r_abs32.size() == 1);
    CHECK(prof.pi_r_abs32[0] == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("exact_moments: sample variance on uniform3 (rank 1)") {
    const auto prof =
        exact_moments(kernel_registry("sample_variance", 2), law_registry("uniform3"));
    CHECK(prof.mean_h == doctest::Approx(2.0 / 3).epsilon(1e-15));
    CHECK(prof.var_h == doctest::Approx(5.0 / 9).epsilon(1e-14));
    CHECK(prof.var_g == doctest::Approx(1.0 / 18).epsilon(1e-14));
    CHECK(prof.abs3_g == doctest::Approx(10.0 / 648).epsilon(1e-13));
    CHECK(prof.abs3_h == doctest::Approx(0.62757201646090535).epsilon(1e-13));
    CHECK(prof.psi1_pow32 == doctest::Approx(0.45569316247354513).epsilon(1e-13));
    CHECK(prof.var_h2 == doctest::Approx(149.0 / 324).epsilon(1e-13));
    CHECK(prof.rank_d == 1);
    REQUIRE(prof.pi_r_abs32.size() == 1);
    CHECK(prof.pi_r_abs32[0] == doctest::Approx(0.39363219363148087).epsilon(1e-12));
}

TEST_CASE("exact_moments: zero kernel gives var_h = 0") {
    kernel zero;
    zero.degree = 2;
    zero.name = "zero";
    zero.fn = +[](const double*, int) { return 0.0; };
    const auto prof = exact_moments(zero, law_registry("rademacher"));
    CHECK(prof.var_h == 0.0);
    CHECK(prof.mean_h == 0.0);
}

TEST_CASE("exact_moments: enumeration budget is enforced with the count") {
    const kernel k = kernel_registry("product", 8);
    try {
        exact_moments(k, law_registry("uniform3"), 1000);
        CHECK(false);
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("6561") != std::string::npos);
    }
}

TEST_CASE("jensen inequalities hold on exact profiles") {
    for (const char* law_name : {"rademacher", "uniform3"}) {
        for (const char* kname : {"product", "sample_variance", "mean_pow3"}) {
            const auto prof = exact_moments(kernel_registry(kname, 2), law_registry(law_name));
            const double s32 = prof.var_h * std::sqrt(prof.var_h);
            CHECK(prof.abs3_h >= s32 - 1e-12);
            CHECK(prof.psi1_pow32 >= s32 - 1e-12);
        }
    }
}

TEST_CASE("mc_moments: precondition on reps") {
    CHECK_THROWS_AS(
        mc_moments(kernel_registry("product", 2), law_registry("rademacher"), {1000, 1, 512, true}),
        std::invalid_argument);
}

TEST_CASE("mc_moments agrees with exact_moments within 4 SE on finite laws") {
    for (const char* law_name : {"rademacher", "uniform3"}) {
        const auto& law = law_registry(law_name);
        for (const char* kname : {"product", "sample_variance"}) {
            const kernel k = kernel_registry(kname, 2);
            const auto ex = exact_moments(k, law);
            mc_options opt;
            opt.reps = 60'000;
            opt.seed = 2024;
            const auto mc = mc_moments(k, law, opt);
            CHECK(std::abs(mc.mean_h - ex.mean_h) <= 4.0 * mc.se.mean_h + 1e-12);
            CHECK(std::abs(mc.var_h - ex.var_h) <= 4.0 * mc.se.var_h + 1e-12);
            CHECK(std::abs(mc.abs3_h - ex.abs3_h) <= 4.0 * mc.se.abs3_h + 1e-12);
            CHECK(std::abs(mc.var_g - ex.var_g) <= 4.0 * mc.se.var_g + 1e-12);
            CHECK(std::abs(mc.abs3_g - ex.abs3_g) <= 4.0 * mc.se.abs3_g + 2e-3);
            CHECK(std::abs(mc.psi1_pow32 - ex.psi1_pow32) <= 4.0 * mc.se.psi1_pow32 + 2e-3);
            // plug-in centering contributes O(var_h/R) even when the sampling
            // SE degenerates (var_h2 = 0 exactly); allow for it explicitly
            CHECK(std::abs(mc.var_h2 - ex.var_h2) <=
                  4.0 * mc.se.var_h2 + 50.0 * ex.var_h / static_cast<double>(opt.reps));
            CHECK(mc.rank_d == ex.rank_d);
            CHECK(mc.prov == provenance::monte_carlo);
            CHECK(mc.pi_r_abs32.empty());
        }
    }
}

TEST_CASE("mc_moments: two-seed oracle agreement on a continuous law") {
    const kernel sv = kernel_registry("sample_variance", 2);
    const auto& normal = law_registry("stdnormal");
    mc_options a{120'000, 11, 512, true};
    mc_options b{120'000, 77, 512, true};
    const auto pa = mc_moments(sv, normal, a);
    const auto pb = mc_moments(sv, normal, b);
    CHECK(std::abs(pa.var_h - pb.var_h) <= 4.0 * (pa.se.var_h + pb.se.var_h));
    CHECK(std::abs(pa.mean_h - pb.mean_h) <= 4.0 * (pa.se.mean_h + pb.se.mean_h));
    CHECK(std::abs(pa.var_g - pb.var_g) <= 4.0 * (pa.se.var_g + pb.se.var_g));
    CHECK(pa.rank_d == 1);  // sample variance is non-degenerate under N(0,1)
}

TEST_CASE("rank detection: product is rank 2 under mean-zero laws only") {
    CHECK(exact_moments(kernel_registry("product", 2), law_registry("rademacher")).rank_d == 2);
    // under uniform3 the mean is 1, so g(x) = x - 1 varies: rank 1
    CHECK(exact_moments(kernel_registry("product", 2), law_registry("uniform3")).rank_d == 1);
    mc_options opt{60'000, 5, 512, true};
    const auto mc = mc_moments(kernel_registry("product", 2), law_registry("stdnormal"), opt);
    CHECK(mc.rank_d == 2);
}

TEST_CASE("projection_h_r_mc tracks the exact projection") {
    const kernel sv = kernel_registry("sample_variance", 2);
    const auto& u3 = law_registry("uniform3");
    rng_stream rng(31, 0, 0);
    const double one = 1.0;
    const double mc =
        projection_h_r_mc(sv, u3, 1, std::span<const double>(&one, 1), 200'000, rng);
    CHECK(std::abs(mc - 1.0 / 3) <= 0.01);
}
