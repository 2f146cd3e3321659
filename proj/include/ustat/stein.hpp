#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ustat {

/// The bounded solution of the normal Stein equation at threshold z, and its
/// derivative from the equation itself: f' = I(w <= z) - Phi(z) + w f.
/// Values are carried in long double: the product e^{w^2/2} Phi(w) Phi~(z) is
/// evaluated through the scaled complementary error function, which keeps f
/// finite and positive for |w|, |z| up to 40 even where a double would
/// underflow.
struct stein_eval {
    double z = 0;
    double w = 0;
    long double f = 0;
    long double fprime = 0;
};

stein_eval stein_f(double z, double w);

/// Verification of the regional bounds on f_z and f_z': 0 < f <= 0.63,
/// |f'| <= 1, |z f| <= 1, the three-piece envelopes for |z| >= 1 (and their
/// mirror for z <= -1), the symmetry f_z(w) = f_{-z}(-w), and a
/// finite-difference check of f'. Grids cover [-10,10] at `step` plus random
/// pairs. Reports the worst slack per bound (negative slack = violation).
struct a2_check {
    std::string label;
    double worst_slack = 0;
    double at_z = 0;
    double at_w = 0;
    bool pass = false;
};

struct a2_report {
    std::vector<a2_check> checks;
    bool all_pass = false;
};

a2_report lemma_a2_suite(double step = 0.01, std::uint64_t random_pairs = 100'000,
                         std::uint64_t seed = 20240901);

/// Monte Carlo estimate of E[exp(sum of unit-censored xi_i)] for a registry
/// family with mean zero and total variance <= 1. The Bennett-type bound for
/// this quantity is exp((e^2+1)/4) <= 8.15.
enum class bennett_family { scaled_rademacher, scaled_centered_exponential, zero };

struct bennett_result {
    double estimate = 0;
    double se = 0;
};

bennett_result bennett_mc_check(int n_vars, std::uint64_t reps, std::uint64_t seed,
                                bennett_family family = bennett_family::scaled_rademacher);

inline constexpr double kBennettBound = 8.15;

}  // namespace ustat
