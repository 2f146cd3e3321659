#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ustat/kernel.hpp"
#include "ustat/rng.hpp"
#include "ustat/source_law.hpp"

namespace ustat {

enum class provenance { exact, monte_carlo };

/// Standard errors for Monte Carlo profiles; all zero for exact ones.
struct moment_errors {
    double mean_h = 0, var_h = 0, var_g = 0, abs3_g = 0, abs3_h = 0, psi1_pow32 = 0, var_h2 = 0;
};

/// Population quantities of a (kernel, law) pair. All moments beyond mean_h
/// refer to the centered kernel h - E[h]; estimators and bound evaluators
/// center internally through mean_h, so raw kernels can be passed around.
struct moment_profile {
    double mean_h = 0;      // E[h] of the kernel as given
    double var_h = 0;       // sigma_h^2
    double var_g = 0;       // sigma_g^2, variance of the first projection
    double abs3_g = 0;      // E|g|^3 (centered)
    double abs3_h = 0;      // E|h|^3 (centered)
    double psi1_pow32 = 0;  // E[Psi_1^{3/2}]
    double var_h2 = 0;      // E[(h^2 - sigma_h^2)^2]
    bool has_var_h2 = false;
    std::vector<double> pi_r_abs32;  // E|pi_r(h^2)|^{3/2}, r = 2..m (index r-2); exact only
    int rank_d = 0;
    provenance prov = provenance::exact;
    std::uint64_t mc_reps = 0;
    moment_errors se;
};

inline constexpr double kRankTolerance = 1e-12;
inline constexpr std::uint64_t kDefaultTupleBudget = 10'000'000;

/// h_r(args) = E[k(args, X_{r+1}, ..., X_m)], uncentered, by exact enumeration
/// over the finite law. r = m returns k(args) verbatim.
double projection_h_r(const kernel& k, const source_law& law, int r,
                      std::span<const double> args);

/// Monte Carlo variant for samplable laws; `reps` inner draws.
double projection_h_r_mc(const kernel& k, const source_law& law, int r,
                         std::span<const double> args, std::uint64_t reps, rng_stream& rng);

/// Full profile by weighted enumeration over support^m. Throws when the tuple
/// count exceeds `tuple_budget` (the message names the count). rank_d uses the
/// Var[h_r] > 1e-12 rule.
moment_profile exact_moments(const kernel& k, const source_law& law,
                             std::uint64_t tuple_budget = kDefaultTupleBudget);

struct mc_options {
    std::uint64_t reps = 0;
    std::uint64_t seed = 0;
    std::uint64_t inner_reps = 512;  // inner expectation size for projections
    bool want_var_h2 = true;
};

/// Monte Carlo profile: reps >= 10^4 required. Projection moments use
/// plug-in inner expectations; variances of projections are corrected for the
/// inner-sampling noise, and rank_d is a 5-standard-error z-test. pi_r moments
/// are only available on the exact path and stay empty here.
moment_profile mc_moments(const kernel& k, const source_law& law, const mc_options& opt);

}  // namespace ustat
