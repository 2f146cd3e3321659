#include "ustat/estimators.hpp"

#include <cmath>
#include <stdexcept>

#include "ustat/numeric.hpp"

namespace ustat {

namespace {

struct full_set_sums {
    double sum_c = 0;     // sum of (k - mu)
    double sum_sq = 0;    // sum of (k - mu)^2
    double sum_abs3 = 0;  // sum of |k - mu|^3
};

// One colex pass over all C(n,m) tuples.
full_set_sums full_scan(const dataset& data, const kernel& k, double mu) {
    const int n = static_cast<int>(data.values.size());
    const int m = k.degree;
    std::vector<int> c(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) c[static_cast<std::size_t>(j)] = j;
    double args[32];
    kahan_sum sc, sq, s3;
    do {
        for (int j = 0; j < m; ++j) args[j] = data.values[static_cast<std::size_t>(c[static_cast<std::size_t>(j)])];
        const double v = k.eval_ptr(args) - mu;
        sc.add(v);
        const double v2 = v * v;
        sq.add(v2);
        s3.add(std::abs(v) * v2);
    } while (next_combination_colex(c, n));
    return {sc.value(), sq.value(), s3.value()};
}

// Subsampled surrogate for the full-index-set sums: `draws` uniform ranks with
// replacement, scaled up to the full count.
full_set_sums subsampled_scan(const dataset& data, const kernel& k, double mu, u128 total,
                              std::uint64_t draws, rng_stream& rng) {
    const int n = static_cast<int>(data.values.size());
    const int m = k.degree;
    const binom_table tbl(n, m);
    std::vector<int> c(static_cast<std::size_t>(m));
    double args[32];
    kahan_sum sc, sq, s3;
    for (std::uint64_t i = 0; i < draws; ++i) {
        unrank_colex_into(rng.bounded128(total), n, m, tbl, c);
        for (int j = 0; j < m; ++j) args[j] = data.values[static_cast<std::size_t>(c[static_cast<std::size_t>(j)])];
        const double v = k.eval_ptr(args) - mu;
        sc.add(v);
        const double v2 = v * v;
        sq.add(v2);
        s3.add(std::abs(v) * v2);
    }
    const double scale = static_cast<double>(static_cast<long double>(total) / draws);
    return {sc.value() * scale, sq.value() * scale, s3.value() * scale};
}

void check_kernel_data(const dataset& data, const kernel& k) {
    if (k.degree > 32) throw std::invalid_argument("kernel degree > 32 not supported");
    if (static_cast<int>(data.values.size()) < k.degree)
        throw std::invalid_argument("need n >= m");
}

}  // namespace

double complete_u(const dataset& data, const kernel& k, std::uint64_t tuple_budget) {
    check_kernel_data(data, k);
    const int n = static_cast<int>(data.values.size());
    const u128 total = binom_u128(n, k.degree);
    if (total > u128{tuple_budget})
        throw std::runtime_error("complete_u: enumeration too large (" + to_string(total) +
                                 " tuples, budget " + std::to_string(tuple_budget) + ")");
    const full_set_sums sums = full_scan(data, k, 0.0);
    return sums.sum_c / static_cast<double>(static_cast<long double>(total));
}

estimate_bundle incomplete_u(const dataset& data, const kernel& k, const sampled_design& sd,
                             double mu, std::uint64_t tuple_budget) {
    check_kernel_data(data, k);
    const bernoulli_design& d = sd.design;
    const int n = static_cast<int>(data.values.size());
    if (n != d.n || k.degree != d.m)
        throw std::invalid_argument("incomplete_u: design does not match (n, m)");

    estimate_bundle out;
    out.n_hat = sd.n_hat;
    out.p = d.p;

    // Selected-tuple sum of the centered kernel.
    const binom_table tbl(n, d.m);
    std::vector<int> c(static_cast<std::size_t>(d.m));
    double args[32];
    kahan_sum sel;
    for (const u128 rank : sd.ranks) {
        unrank_colex_into(rank, n, d.m, tbl, c);
        for (int j = 0; j < d.m; ++j) args[j] = data.values[static_cast<std::size_t>(c[static_cast<std::size_t>(j)])];
        sel.add(k.eval_ptr(args) - mu);
    }
    const double s_sel = sel.value();
    out.u_incomplete = (sd.n_hat == 0) ? 0.0 : s_sel / static_cast<double>(sd.n_hat);
    out.u_incomplete_det = s_sel / static_cast<double>(d.budget);

    // Full-index-set quantities.
    full_set_sums sums;
    if (d.total <= u128{tuple_budget}) {
        sums = full_scan(data, k, mu);
        out.full_set_exact = true;
    } else {
        rng_stream aux(d.seed, 0x41555853 /* "AUXS" */, 0);
        sums = subsampled_scan(data, k, mu, d.total, kAuxSubsampleSize, aux);
        out.full_set_exact = false;
    }
    const double total_d = static_cast<double>(static_cast<long double>(d.total));
    out.u_complete = sums.sum_c / total_d;
    out.u_h2 = sums.sum_sq / total_d;
    out.u_abs_h3 = sums.sum_abs3 / total_d;
    out.b_n = (s_sel - d.p * sums.sum_c) /
              (static_cast<double>(d.budget) * std::sqrt(1.0 - d.p));
    return out;
}

bn_conditional conditional_bn_moments(const dataset& data, const kernel& k,
                                      const bernoulli_design& d, double mu,
                                      std::uint64_t tuple_budget) {
    check_kernel_data(data, k);
    if (static_cast<int>(data.values.size()) != d.n || k.degree != d.m)
        throw std::invalid_argument("conditional_bn_moments: design does not match (n, m)");
    if (d.total > u128{tuple_budget})
        throw std::runtime_error("conditional_bn_moments: enumeration too large (" +
                                 to_string(d.total) + " tuples)");
    const full_set_sums sums = full_scan(data, k, mu);
    const double total_d = static_cast<double>(static_cast<long double>(d.total));
    const double u_h2 = sums.sum_sq / total_d;
    const double u_abs3 = sums.sum_abs3 / total_d;
    if (!(u_h2 > 0))
        throw std::domain_error("conditional_bn_moments: degenerate conditional law (U_{h^2} = 0)");

    bn_conditional out;
    // E[zeta_i | X] = 0 for every summand, hence the sum is exactly zero.
    out.mean = 0.0;
    // sum_i h^2_i / (U_{h^2} C(n,m)) -- algebraically 1; return as computed.
    out.variance = sums.sum_sq / (u_h2 * total_d);
    const double p = d.p;
    out.lyapunov_sum = u_abs3 * (1.0 - 2.0 * p + 2.0 * p * p) /
                       (u_h2 * std::sqrt(u_h2) * std::sqrt(static_cast<double>(d.budget) * (1.0 - p)));
    return out;
}

}  // namespace ustat
