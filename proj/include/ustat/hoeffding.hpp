#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ustat/kernel.hpp"
#include "ustat/moments.hpp"
#include "ustat/source_law.hpp"

namespace ustat {

/// Psi~_r(x_1..x_r) = E[(h - E h)^2(x_1..x_r, X_{r+1}..X_m)] - sigma_h^2,
/// exactly over a finite law. Centering constants are derived from the law.
double psi_tilde_r(const kernel& k, const source_law& law, int r, std::span<const double> args);
double psi_tilde_r_mc(const kernel& k, const source_law& law, int r, std::span<const double> args,
                      std::uint64_t reps, rng_stream& rng);

/// Hoeffding projection kernel of h^2: pi_1 = Psi~_1, and
/// pi_r = Psi~_r - sum over proper nonempty argument subsets of lower pi_s.
/// Fully degenerate by construction. Exact path only.
double pi_r_h2(const kernel& k, const source_law& law, int r, std::span<const double> args);

/// Decomposition of (U_{h^2} - sigma_h^2)/sigma_h^2 into leading terms
/// eta_i = m Psi_1(X_i) / (n sigma_h^2) and the degenerate remainder R,
/// computed directly from its defining pi_r sums (m <= 3).
struct h2_decomposition {
    std::vector<double> eta;
    double remainder_r = 0.0;
    double lhs = 0.0;  // (U_{h^2} - sigma_h^2) / sigma_h^2
};

h2_decomposition decompose_uh2(const dataset& data, const kernel& k, const moment_profile& prof,
                               std::uint64_t tuple_budget = kDefaultTupleBudget);

/// The moment bound for ||R||_{3/2}:
///   sum_{r=2}^m C(m,r)^{3/2} C(n,r)^{-1/2} 2^{r/2} E|pi_r(h^2)|^{3/2} / sigma_h^3.
/// O(n^{-2/3}); requires the exact pi_r moments in the profile.
double r_norm32_bound(const moment_profile& prof, int n);

/// E|pi_r(h^2)|^{3/2} by enumeration; helper for exact_moments.
double exact_pi_r_abs32(const kernel& k, const source_law& law, int r, double mean_h, double var_h,
                        std::uint64_t tuple_budget);

/// Cross-check for r_norm32_bound: estimates ||R||_{3/2} = (E|R|^{3/2})^{2/3}
/// by replicating R over fresh datasets of size n. The estimate plus a few
/// standard errors should sit below the moment bound.
struct r_norm_estimate {
    double value = 0;  // (E|R|^{3/2})^{2/3}
    double se = 0;     // delta-method SE of value
};

r_norm_estimate r_norm32_mc(const kernel& k, const source_law& law, const moment_profile& prof,
                            int n, std::uint64_t reps, std::uint64_t seed);

}  // namespace ustat
