#include "ustat/combinatorics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace ustat {

namespace {

[[noreturn]] void throw_binom_overflow(int n, int k) {
    throw std::overflow_error("binomial coefficient overflows 128 bits: C(" + std::to_string(n) +
                              "," + std::to_string(k) + ")");
}

constexpr std::uint64_t kChunkLimit = std::uint64_t{1} << 62;

}  // namespace

u128 binom_u128(int n, int k) {
    if (n < 0 || k < 0 || k > n) throw std::invalid_argument("binom: need 0 <= k <= n");
    k = std::min(k, n - k);
    u128 result = 1;
    for (int i = 1; i <= k; ++i) {
        u128 prod;
        if (__builtin_mul_overflow(result, static_cast<u128>(n - k + i), &prod))
            throw_binom_overflow(n, k);
        result = prod / static_cast<u128>(i);  // divisibility holds at each step
    }
    return result;
}

double binom_d(int n, int k) {
    return static_cast<double>(static_cast<long double>(binom_u128(n, k)));
}

binom_table::binom_table(int n, int m) : n_(n), m_(m) {
    if (n < 0 || m < 0) throw std::invalid_argument("binom_table: negative bounds");
    t_.assign(static_cast<std::size_t>(n + 1) * (m + 1), 0);
    for (int x = 0; x <= n; ++x) {
        t_[static_cast<std::size_t>(x) * (m_ + 1)] = 1;
        for (int i = 1; i <= std::min(x, m); ++i) {
            const u128 a = at(x - 1, i - 1);
            const u128 b = at(x - 1, i);
            u128 s;
            if (__builtin_add_overflow(a, b, &s)) throw_binom_overflow(x, i);
            t_[static_cast<std::size_t>(x) * (m_ + 1) + i] = s;
        }
    }
}

void unrank_colex_into(u128 rank, int n, int m, const binom_table& tbl, std::span<int> out) {
    if (m > tbl.m() || n > tbl.n() + 1) throw std::invalid_argument("unrank: table too small");
    if (rank >= binom_u128(n, m)) throw std::out_of_range("unrank: rank >= C(n,m)");
    u128 rem = rank;
    int hi = n - 1;
    for (int i = m; i >= 1; --i) {
        // largest c with C(c, i) <= rem
        int lo = i - 1, best = i - 1;
        int a = lo, b = hi;
        while (a <= b) {
            const int mid = a + (b - a) / 2;
            if (tbl.at(mid, i) <= rem) {
                best = mid;
                a = mid + 1;
            } else {
                b = mid - 1;
            }
        }
        out[i - 1] = best;
        rem -= tbl.at(best, i);
        hi = best - 1;
    }
}

std::vector<int> unrank_colex(u128 rank, int n, int m, const binom_table& tbl) {
    std::vector<int> out(static_cast<std::size_t>(m));
    unrank_colex_into(rank, n, m, tbl, out);
    return out;
}

u128 rank_colex(std::span<const int> subset, const binom_table& tbl) {
    u128 r = 0;
    for (std::size_t i = 0; i < subset.size(); ++i)
        r += tbl.at(subset[i], static_cast<int>(i) + 1);
    return r;
}

bool next_combination_colex(std::span<int> c, int n) {
    const int m = static_cast<int>(c.size());
    for (int j = 0; j < m; ++j) {
        const int limit = (j + 1 < m) ? c[j + 1] - 1 : n - 1;
        if (c[j] < limit) {
            ++c[j];
            for (int i = 0; i < j; ++i) c[i] = i;
            return true;
        }
    }
    return false;
}

bernoulli_design make_design(int n, int m, std::uint64_t budget, std::uint64_t seed) {
    // Sampler-level validity only; the theorem hypothesis m < n/2 is enforced
    // where the bounds that assume it are evaluated.
    if (m < 2 || n <= m)
        throw std::invalid_argument("design: need 2 <= m < n (got n=" + std::to_string(n) +
                                    ", m=" + std::to_string(m) + ")");
    const u128 total = binom_u128(n, m);
    if (budget == 0 || u128{budget} >= total)
        throw std::invalid_argument("design: need 0 < N < C(n,m); N=" + std::to_string(budget) +
                                    ", C(n,m)=" + to_string(total));
    bernoulli_design d;
    d.n = n;
    d.m = m;
    d.budget = budget;
    d.total = total;
    d.p = static_cast<double>(static_cast<long double>(budget) / static_cast<long double>(total));
    d.alpha = static_cast<double>(n) / static_cast<double>(budget);
    d.seed = seed;
    return d;
}

namespace {

// Inversion for trials <= 2^62 (every integer exact in long double).
std::uint64_t binomial_inversion(std::uint64_t trials, long double p, rng_stream& rng) {
    if (trials == 0 || p <= 0.0L) return 0;
    if (p > 0.5L) return trials - binomial_inversion(trials, 1.0L - p, rng);
    const long double mean = p * static_cast<long double>(trials);
    if (mean > 2e8L)
        throw std::runtime_error("sample_binomial: expected count too large for exact inversion");
    const long double ratio = p / (1.0L - p);
    const long double u = static_cast<long double>(rng.next_unit());
    long double pmf = expl(static_cast<long double>(trials) * log1pl(-p));
    long double cdf = pmf;
    std::uint64_t k = 0;
    while (u >= cdf && k < trials) {
        ++k;
        pmf *= ratio * static_cast<long double>(trials - k + 1) / static_cast<long double>(k);
        cdf += pmf;
        // guard against stalling once pmf underflows in the far right tail
        if (pmf <= 0.0L) break;
    }
    return k;
}

}  // namespace

std::uint64_t sample_binomial(u128 trials, double p, rng_stream& rng) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("sample_binomial: p outside [0,1]");
    const long double pl = static_cast<long double>(p);
    if (trials <= u128{kChunkLimit})
        return binomial_inversion(static_cast<std::uint64_t>(trials), pl, rng);
    // Binomial counts add over disjoint blocks of the index space, so chunking
    // by <= 2^62 is exact in law. Chunk counts stay tiny for any design this
    // artifact can evaluate; refuse rather than approximate beyond that.
    const u128 chunks = (trials + (kChunkLimit - 1)) / kChunkLimit;
    if (chunks > (u128{1} << 20))
        throw std::runtime_error("sample_binomial: index space too large to sample exactly");
    std::uint64_t count = 0;
    u128 remaining = trials;
    while (remaining > 0) {
        const std::uint64_t chunk =
            remaining >= u128{kChunkLimit} ? kChunkLimit : static_cast<std::uint64_t>(remaining);
        count += binomial_inversion(chunk, pl, rng);
        remaining -= chunk;
    }
    return count;
}

sampled_design sample_design(const bernoulli_design& d, rng_stream& rng) {
    sampled_design sd;
    sd.design = d;
    sd.n_hat = sample_binomial(d.total, d.p, rng);
    if (sd.n_hat == 0) return sd;

    const bool dense = u128{sd.n_hat} * 2 > d.total;
    if (!dense) {
        std::unordered_set<u128, u128_hash> seen;
        seen.reserve(static_cast<std::size_t>(sd.n_hat) * 2);
        sd.ranks.reserve(static_cast<std::size_t>(sd.n_hat));
        while (sd.ranks.size() < sd.n_hat) {
            const u128 r = rng.bounded128(d.total);
            if (seen.insert(r).second) sd.ranks.push_back(r);
        }
        std::sort(sd.ranks.begin(), sd.ranks.end());
    } else {
        // n_hat > total/2 implies total < 2^65; draw the complement instead.
        const std::uint64_t excl_count = static_cast<std::uint64_t>(d.total - sd.n_hat);
        std::unordered_set<u128, u128_hash> excluded;
        excluded.reserve(static_cast<std::size_t>(excl_count) * 2);
        while (excluded.size() < excl_count) excluded.insert(rng.bounded128(d.total));
        sd.ranks.reserve(static_cast<std::size_t>(sd.n_hat));
        for (u128 r = 0; r < d.total; ++r)
            if (!excluded.contains(r)) sd.ranks.push_back(r);
    }
    return sd;
}

std::string design_csv_line(const sampled_design& sd) {
    std::string line = std::to_string(sd.design.n) + "," + std::to_string(sd.design.m) + "," +
                       std::to_string(sd.design.budget) + "," + std::to_string(sd.n_hat);
    for (const u128 r : sd.ranks) {
        line += ",";
        line += to_string(r);
    }
    return line;
}

}  // namespace ustat
