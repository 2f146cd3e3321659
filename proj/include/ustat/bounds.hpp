#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ustat/estimators.hpp"
#include "ustat/moments.hpp"

namespace ustat {

/// thm31: "N >> n"; thm32: "N << n^d"; thm33: "N ~ n". The two explicit
/// regimes are the only ones whose leading constants are certified.
enum class bound_regime { thm31, thm32, thm33, complete_explicit, conditional_explicit };

std::string regime_name(bound_regime r);
bound_regime parse_regime(const std::string& s);

struct bound_term {
    std::string label;
    double value = 0;
};

struct bound_report {
    bound_regime regime{};
    std::vector<bound_term> terms;
    double total = 0;
    bool constant_known = false;
    std::string inputs_digest;
};

/// K_{n,m,d} = C(n,m)^{-1} sum_{r=d}^m C(m-1,r-1) C(n-m,m-r), exact in 128-bit
/// integers, converted to double at the end. K_{n,m,1} = m/n; K_{n,m,m} = 1/C(n,m).
double k_nmd(int n, int m, int d);

/// B1 = E|h|^3 (1-2p+2p^2) / (sqrt(N(1-p)) sigma_h^3)
///      + exp(-n sigma_h^6 / (24 m E|h|^3 ^2)).
double b_frak1(const moment_profile& prof, int n, int m, std::uint64_t N, double p);
std::pair<double, double> b_frak1_terms(const moment_profile& prof, int n, int m, std::uint64_t N,
                                        double p);

/// The two B2 terms: E|g|^3/(sqrt(n) sigma_g^3) and
/// sqrt((m/n)(sigma_h^2/(m sigma_g^2) - 1)).
std::pair<double, double> b_frak2_terms(const moment_profile& prof, int n, int m);

/// Theorem-shaped term breakdowns (constant_known = false). Regimes thm31 and
/// thm33 require sigma_g^2 > 0; use_4th_moment selects the fourth-moment
/// variant of thm32/thm33, otherwise the Psi/R route is used (exact profile
/// required for the R-norm surrogate). Designs with p > 0.99 are refused.
bound_report thm_bound(bound_regime regime, const moment_profile& prof, int n, int m,
                       std::uint64_t N, bool use_4th_moment);

/// Eq.-level complete-statistic bound with certified constants 6.1 and 1+sqrt(2).
bound_report explicit_complete_bound(const moment_profile& prof, int n, int m);

/// 0.56 U_{|h|^3} (1-2p+2p^2) / (U_{h^2}^{3/2} sqrt(N(1-p))). Requires exact
/// full-set moments in the bundle; refuses p > 0.99.
double explicit_conditional_bound(const estimate_bundle& bundle, std::uint64_t N, double p);

/// Exponential lower tail for a non-negative-kernel U-statistic:
///   exp(-floor(n/m) (l-1) (E[kappa]-t)^{l/(l-1)} / (l (E[kappa^l])^{1/(l-1)})).
double lower_tail_bound(double mean_kappa, double mom_l, double l, double t, int n, int m);

/// The 1.05-specialized form for kappa = h^2, l = 3/2, t = sigma_h^2/2:
///   1.05 exp(-n sigma_h^6 / (24 m (E|h|^3)^2)); needs 2m < n.
double lower_tail_bound_h2(const moment_profile& prof, int n, int m);

/// Clamp y into [a, b]; a and b may be +-infinity. 1-Lipschitz.
double censor(double y, double a, double b);

}  // namespace ustat
