#pragma once

#include <cstdint>

#include "ustat/combinatorics.hpp"
#include "ustat/kernel.hpp"
#include "ustat/moments.hpp"
#include "ustat/source_law.hpp"

namespace ustat {

/// All estimates for one (data, kernel, sampled design) triple. u_complete,
/// b_n, u_h2 and u_abs_h3 refer to the centered kernel k - mu. When C(n,m)
/// exceeds the tuple budget those full-index-set quantities are estimated from
/// a uniform auxiliary subsample and full_set_exact flips to false; evaluators
/// that need exact values refuse such bundles.
struct estimate_bundle {
    double u_complete = 0;       // U_n of the centered kernel
    double u_incomplete = 0;     // U', N_hat-normalized; 0 when N_hat = 0
    double u_incomplete_det = 0; // U-breve, N-normalized
    double b_n = 0;
    double u_h2 = 0;
    double u_abs_h3 = 0;
    std::uint64_t n_hat = 0;
    double p = 0;
    bool full_set_exact = true;
};

inline constexpr std::uint64_t kAuxSubsampleSize = 1'000'000;

/// Average of the kernel as given over all C(n,m) increasing tuples, by
/// iterative colex enumeration with compensated summation. O(C(n,m)).
double complete_u(const dataset& data, const kernel& k,
                  std::uint64_t tuple_budget = kDefaultTupleBudget);

estimate_bundle incomplete_u(const dataset& data, const kernel& k, const sampled_design& sd,
                             double mu, std::uint64_t tuple_budget = kDefaultTupleBudget);

/// Conditional-on-data moments of sqrt(N) B_n / sqrt(U_{h^2}): mean (0 by
/// construction), variance (1 by construction, returned as computed), and the
/// Lyapunov sum U_{|h|^3}(1-2p+2p^2) / (U_{h^2}^{3/2} sqrt(N(1-p))). Analytic
/// in the data; no Bernoulli sampling involved.
struct bn_conditional {
    double mean = 0;
    double variance = 0;
    double lyapunov_sum = 0;
};

bn_conditional conditional_bn_moments(const dataset& data, const kernel& k,
                                      const bernoulli_design& d, double mu,
                                      std::uint64_t tuple_budget = kDefaultTupleBudget);

}  // namespace ustat
