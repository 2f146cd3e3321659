#include "ustat/bounds.hpp"

#include <cmath>
#include <stdexcept>

#include "ustat/hoeffding.hpp"
#include "ustat/numeric.hpp"

namespace ustat {

namespace {

constexpr double kMaxBoundP = 0.99;

void require_var_h(const moment_profile& prof, const char* what) {
    if (!(prof.var_h > 0))
        throw std::invalid_argument(std::string(what) + ": profile has sigma_h^2 = 0");
}

void require_var_g(const moment_profile& prof, const char* what) {
    if (!(prof.var_g > kRankTolerance))
        throw std::invalid_argument(std::string(what) +
                                    ": sigma_g^2 = 0 (degenerate kernel, regime needs d = 1)");
}

double design_p(int n, int m, std::uint64_t N) {
    const u128 total = binom_u128(n, m);
    if (u128{N} >= total) throw std::invalid_argument("bound: N must satisfy N < C(n,m)");
    return static_cast<double>(static_cast<long double>(N) / static_cast<long double>(total));
}

void require_p_sane(double p, const char* what) {
    if (p > kMaxBoundP)
        throw std::invalid_argument(std::string(what) +
                                    ": p > 0.99 refused (the (1-2p+2p^2)/sqrt(1-p) factor blows up)");
}

std::string digest(const moment_profile& prof, int n, int m, std::uint64_t N) {
    return "n=" + std::to_string(n) + ";m=" + std::to_string(m) + ";N=" + std::to_string(N) +
           ";var_h=" + fmt17(prof.var_h) + ";var_g=" + fmt17(prof.var_g) +
           ";d=" + std::to_string(prof.rank_d) +
           ";prov=" + (prof.prov == provenance::exact ? "exact" : "mc");
}

void finish(bound_report& rep) {
    kahan_sum total;
    for (const auto& t : rep.terms) {
        if (!(t.value >= 0.0))
            throw std::logic_error("bound term '" + t.label + "' is negative: " + fmt17(t.value));
        total.add(t.value);
    }
    rep.total = total.value();
}

// sigma_h^2 / (m sigma_g^2) - 1, clamped for roundoff; negative beyond
// tolerance means the profile is inconsistent (the ratio is >= 1 in theory).
double variance_gap(const moment_profile& prof, int m, const char* what) {
    const double gap = prof.var_h / (static_cast<double>(m) * prof.var_g) - 1.0;
    if (gap < -1e-9)
        throw std::invalid_argument(std::string(what) + ": sigma_h^2 < m sigma_g^2 in profile");
    return std::max(0.0, gap);
}

}  // namespace

std::string regime_name(bound_regime r) {
    switch (r) {
        case bound_regime::thm31: return "thm31";
        case bound_regime::thm32: return "thm32";
        case bound_regime::thm33: return "thm33";
        case bound_regime::complete_explicit: return "complete";
        case bound_regime::conditional_explicit: return "conditional";
    }
    return "?";
}

bound_regime parse_regime(const std::string& s) {
    if (s == "thm31") return bound_regime::thm31;
    if (s == "thm32") return bound_regime::thm32;
    if (s == "thm33") return bound_regime::thm33;
    if (s == "complete") return bound_regime::complete_explicit;
    if (s == "conditional") return bound_regime::conditional_explicit;
    throw std::invalid_argument("unknown bound regime: " + s);
}

double k_nmd(int n, int m, int d) {
    if (d < 1 || d > m || 2 * m > n)
        throw std::invalid_argument("k_nmd: need 1 <= d <= m and 2m <= n");
    const u128 total = binom_u128(n, m);
    u128 sum = 0;
    for (int r = d; r <= m; ++r) {
        u128 prod;
        if (__builtin_mul_overflow(binom_u128(m - 1, r - 1), binom_u128(n - m, m - r), &prod) ||
            __builtin_add_overflow(sum, prod, &sum))
            throw std::overflow_error("k_nmd: summand overflows 128 bits");
    }
    return static_cast<double>(static_cast<long double>(sum) / static_cast<long double>(total));
}

std::pair<double, double> b_frak1_terms(const moment_profile& prof, int n, int m, std::uint64_t N,
                                        double p) {
    require_var_h(prof, "b_frak1");
    if (!(p < 1.0)) throw std::invalid_argument("b_frak1: requires p < 1");
    const double sig3 = prof.var_h * std::sqrt(prof.var_h);
    const double lyap = prof.abs3_h * (1.0 - 2.0 * p + 2.0 * p * p) /
                        (std::sqrt(static_cast<double>(N) * (1.0 - p)) * sig3);
    const double tail = std::exp(-static_cast<double>(n) * std::pow(prof.var_h, 3.0) /
                                 (24.0 * static_cast<double>(m) * prof.abs3_h * prof.abs3_h));
    return {lyap, tail};
}

double b_frak1(const moment_profile& prof, int n, int m, std::uint64_t N, double p) {
    const auto [lyap, tail] = b_frak1_terms(prof, n, m, N, p);
    return lyap + tail;
}

std::pair<double, double> b_frak2_terms(const moment_profile& prof, int n, int m) {
    require_var_g(prof, "b_frak2");
    const double sg3 = prof.var_g * std::sqrt(prof.var_g);
    const double t1 = prof.abs3_g / (std::sqrt(static_cast<double>(n)) * sg3);
    const double t2 =
        std::sqrt(static_cast<double>(m) / static_cast<double>(n) * variance_gap(prof, m, "b_frak2"));
    return {t1, t2};
}

bound_report thm_bound(bound_regime regime, const moment_profile& prof, int n, int m,
                       std::uint64_t N, bool use_4th_moment) {
    if (m < 2 || 2 * m >= n) throw std::invalid_argument("thm_bound: need 2 <= m < n/2");
    require_var_h(prof, "thm_bound");
    const double p = design_p(n, m, N);
    // thm32/thm33 carry the (1-2p+2p^2)/sqrt(1-p) factor through B1, which
    // blows up as p -> 1; thm31 has (1-p) only in numerators and stays benign.
    if (regime != bound_regime::thm31) require_p_sane(p, "thm_bound");

    bound_report rep;
    rep.regime = regime;
    rep.constant_known = false;
    rep.inputs_digest = digest(prof, n, m, N);
    const double nd = static_cast<double>(n);
    const double Nd = static_cast<double>(N);
    const double md = static_cast<double>(m);
    const double sig3 = prof.var_h * std::sqrt(prof.var_h);

    switch (regime) {
        case bound_regime::thm31: {
            require_var_g(prof, "thm_bound(thm31)");
            const auto [g3, gap] = b_frak2_terms(prof, n, m);
            rep.terms.push_back({"B2.g3", g3});
            rep.terms.push_back({"B2.var_gap", gap});
            rep.terms.push_back({"budget_term", std::sqrt(nd * (1.0 - p) * prof.var_h /
                                                          (Nd * md * prof.var_g))});
            rep.terms.push_back({"nhat_term", 1.0 / std::sqrt(Nd)});
            break;
        }
        case bound_regime::thm32: {
            const auto [lyap, tail] = b_frak1_terms(prof, n, m, N, p);
            rep.terms.push_back({"B1.lyapunov", lyap});
            rep.terms.push_back({"B1.lower_tail", tail});
            rep.terms.push_back(
                {"K_term", std::sqrt(Nd * k_nmd(n, m, prof.rank_d)) / std::sqrt(1.0 - p)});
            if (use_4th_moment) {
                if (!prof.has_var_h2)
                    throw std::invalid_argument("thm_bound: profile lacks E[(h^2-sigma^2)^2]");
                rep.terms.push_back(
                    {"h4_term", std::sqrt(md * prof.var_h2) / (std::sqrt(nd) * prof.var_h)});
            } else {
                rep.terms.push_back(
                    {"psi_term", std::pow(md, 1.5) * prof.psi1_pow32 / (std::sqrt(nd) * sig3)});
                rep.terms.push_back({"R_term", r_norm32_bound(prof, n)});
            }
            break;
        }
        case bound_regime::thm33: {
            require_var_g(prof, "thm_bound(thm33)");
            const auto [lyap, tail] = b_frak1_terms(prof, n, m, N, p);
            rep.terms.push_back({"B1.lyapunov", lyap});
            rep.terms.push_back({"B1.lower_tail", tail});
            const auto [g3, gap] = b_frak2_terms(prof, n, m);
            rep.terms.push_back({"B2.g3", g3});
            rep.terms.push_back({"B2.var_gap", gap});
            rep.terms.push_back({"sqrt_m_term", std::sqrt(md) / std::sqrt(nd * (1.0 - p))});
            if (use_4th_moment) {
                if (!prof.has_var_h2)
                    throw std::invalid_argument("thm_bound: profile lacks E[(h^2-sigma^2)^2]");
                rep.terms.push_back({"eps_term", Nd / (nd * nd * (1.0 - p))});
                rep.terms.push_back(
                    {"h4_term", std::sqrt(md * prof.var_h2) / (std::sqrt(nd) * prof.var_h)});
            } else {
                const double amp = 1.0 + std::sqrt(md * Nd) / std::sqrt(nd * (1.0 - p));
                rep.terms.push_back(
                    {"psi_term", amp * std::pow(md, 1.5) * prof.psi1_pow32 / (std::sqrt(nd) * sig3)});
                rep.terms.push_back({"R_term", r_norm32_bound(prof, n)});
            }
            break;
        }
        default:
            throw std::invalid_argument("thm_bound: regime must be thm31, thm32 or thm33");
    }
    finish(rep);
    return rep;
}

bound_report explicit_complete_bound(const moment_profile& prof, int n, int m) {
    require_var_h(prof, "explicit_complete_bound");
    require_var_g(prof, "explicit_complete_bound");
    const auto [g3, gap] = b_frak2_terms(prof, n, m);
    bound_report rep;
    rep.regime = bound_regime::complete_explicit;
    rep.constant_known = true;
    rep.inputs_digest = digest(prof, n, m, 0);
    rep.terms.push_back({"B2.g3", 6.1 * g3});
    rep.terms.push_back({"B2.var_gap", (1.0 + std::sqrt(2.0)) * gap});
    finish(rep);
    return rep;
}

double explicit_conditional_bound(const estimate_bundle& bundle, std::uint64_t N, double p) {
    if (!bundle.full_set_exact)
        throw std::invalid_argument(
            "explicit_conditional_bound: bundle carries approximate U_{h^2}/U_{|h|^3}");
    if (!(bundle.u_h2 > 0))
        throw std::domain_error("explicit_conditional_bound: U_{h^2} = 0");
    require_p_sane(p, "explicit_conditional_bound");
    return 0.56 * bundle.u_abs_h3 * (1.0 - 2.0 * p + 2.0 * p * p) /
           (bundle.u_h2 * std::sqrt(bundle.u_h2) * std::sqrt(static_cast<double>(N) * (1.0 - p)));
}

double lower_tail_bound(double mean_kappa, double mom_l, double l, double t, int n, int m) {
    if (!(t > 0.0) || t > mean_kappa)
        throw std::invalid_argument("lower_tail_bound: need 0 < t <= E[kappa]");
    if (!(l > 1.0) || l > 2.0) throw std::invalid_argument("lower_tail_bound: need 1 < l <= 2");
    if (!(mom_l > 0.0)) throw std::invalid_argument("lower_tail_bound: need E[kappa^l] > 0");
    if (m < 1 || n < m) throw std::invalid_argument("lower_tail_bound: need 1 <= m <= n");
    const double floor_nm = std::floor(static_cast<double>(n) / static_cast<double>(m));
    const double expo = -floor_nm * (l - 1.0) * std::pow(mean_kappa - t, l / (l - 1.0)) /
                        (l * std::pow(mom_l, 1.0 / (l - 1.0)));
    return std::exp(expo);
}

double lower_tail_bound_h2(const moment_profile& prof, int n, int m) {
    require_var_h(prof, "lower_tail_bound_h2");
    if (2 * m >= n) throw std::invalid_argument("lower_tail_bound_h2: needs 2m < n");
    return 1.05 * std::exp(-static_cast<double>(n) * std::pow(prof.var_h, 3.0) /
                           (24.0 * static_cast<double>(m) * prof.abs3_h * prof.abs3_h));
}

double censor(double y, double a, double b) {
    if (a > b) throw std::invalid_argument("censor: need a <= b");
    if (y < a) return a;
    if (y > b) return b;
    return y;
}

}  // namespace ustat
