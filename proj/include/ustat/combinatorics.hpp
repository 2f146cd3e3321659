#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ustat/int128.hpp"
#include "ustat/rng.hpp"

namespace ustat {

/// Exact C(n, k) in 128 bits. Throws std::overflow_error (naming n and k) when
/// the value, or an intermediate product, does not fit.
u128 binom_u128(int n, int k);

/// C(n, k) as a double, via the 128-bit exact value.
double binom_d(int n, int k);

/// Read-only table of C(x, i) for 0 <= x <= n, 0 <= i <= m, built once by
/// Pascal's rule with overflow checks. Backs rank/unrank and colex walks.
class binom_table {
public:
    binom_table(int n, int m);
    u128 at(int x, int i) const { return t_[static_cast<std::size_t>(x) * (m_ + 1) + i]; }
    int n() const { return n_; }
    int m() const { return m_; }

private:
    int n_, m_;
    std::vector<u128> t_;
};

/// Combinatorial number system (colex): subset {c_1 < ... < c_m} of [0, n)
/// has rank sum_i C(c_i, i). unrank is the inverse, O(m log n).
std::vector<int> unrank_colex(u128 rank, int n, int m, const binom_table& tbl);
void unrank_colex_into(u128 rank, int n, int m, const binom_table& tbl, std::span<int> out);
u128 rank_colex(std::span<const int> subset, const binom_table& tbl);

/// In-place successor in colex order; `c` must hold a strictly increasing
/// m-subset of [0, n). Returns false when `c` was the last subset.
bool next_combination_colex(std::span<int> c, int n);

/// The Bernoulli sampling design (n, m, N) with p = N / C(n,m) and
/// alpha = n / N. Construction enforces 2 <= m < n/2 and 0 < N < C(n,m).
struct bernoulli_design {
    int n = 0;
    int m = 0;
    std::uint64_t budget = 0;  // N
    u128 total = 0;            // C(n, m)
    double p = 0.0;
    double alpha = 0.0;
    std::uint64_t seed = 0;
};

bernoulli_design make_design(int n, int m, std::uint64_t budget, std::uint64_t seed);

/// A realized design: n_hat = |ranks| inclusion draws, ranks sorted ascending.
struct sampled_design {
    bernoulli_design design;
    std::uint64_t n_hat = 0;
    std::vector<u128> ranks;
};

/// Exact Binomial(trials, p) count by inversion. trials beyond 2^62 are split
/// into <= 2^62-sized chunks (binomials add across disjoint index blocks), so
/// every integer entering the pmf recurrence is exactly representable.
std::uint64_t sample_binomial(u128 trials, double p, rng_stream& rng);

/// Draw n_hat ~ Binomial(C(n,m), p), then n_hat distinct uniform ranks; this
/// equals i.i.d. Bernoulli(p) inclusion per index in law, at O(n_hat) cost.
sampled_design sample_design(const bernoulli_design& d, rng_stream& rng);

/// "n,m,N,n_hat,rank0,rank1,..." reproducibility dump.
std::string design_csv_line(const sampled_design& sd);

}  // namespace ustat
