#include "ustat/montecarlo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "ustat/combinatorics.hpp"
#include "ustat/estimators.hpp"
#include "ustat/normal.hpp"
#include "ustat/numeric.hpp"

namespace ustat {

std::string sim_regime_name(sim_regime r) {
    switch (r) {
        case sim_regime::regime1: return "regime1";
        case sim_regime::regime2: return "regime2";
        case sim_regime::regime3: return "regime3";
        case sim_regime::complete_only: return "complete";
        case sim_regime::conditional_only: return "conditional";
    }
    return "?";
}

sim_regime parse_sim_regime(const std::string& s) {
    if (s == "regime1") return sim_regime::regime1;
    if (s == "regime2") return sim_regime::regime2;
    if (s == "regime3") return sim_regime::regime3;
    if (s == "complete") return sim_regime::complete_only;
    if (s == "conditional") return sim_regime::conditional_only;
    throw std::invalid_argument("unknown simulation regime: " + s);
}

budget_rule budget_rule::parse(const std::string& s) {
    budget_rule r;
    if (s == "n^2") {
        r.k = kind::n_squared;
    } else if (s == "sqrt_n") {
        r.k = kind::sqrt_n;
    } else if (s.size() > 1 && s[0] == 'c' && s[1] == 'n' && s.size() > 3 && s[2] == ':') {
        r.k = kind::linear;
        r.value = std::stod(s.substr(3));
    } else {
        r.k = kind::literal;
        r.value = std::stod(s);
        if (!(r.value > 0)) throw std::invalid_argument("budget rule: literal N must be positive");
    }
    return r;
}

std::string budget_rule::str() const {
    switch (k) {
        case kind::literal: return fmt17(value);
        case kind::n_squared: return "n^2";
        case kind::sqrt_n: return "sqrt_n";
        case kind::linear: return "cn:" + fmt17(value);
    }
    return "?";
}

std::uint64_t budget_rule::resolve(int n, u128 total) const {
    double raw = 0;
    const double nd = static_cast<double>(n);
    switch (k) {
        case kind::literal: raw = value; break;
        case kind::n_squared: raw = nd * nd; break;
        case kind::sqrt_n: raw = std::floor(std::sqrt(nd)); break;
        case kind::linear: raw = std::floor(value * nd); break;
    }
    if (!(raw >= 1.0)) raw = 1.0;
    // Rules like n^2 can exceed C(n,m); clamp into the valid open range.
    const long double cap = static_cast<long double>(total) - 1.0L;
    if (static_cast<long double>(raw) > cap) raw = static_cast<double>(cap);
    return static_cast<std::uint64_t>(raw);
}

double ks_to_normal(std::vector<double> sample) {
    if (sample.empty()) throw std::invalid_argument("ks_to_normal: empty sample");
    std::sort(sample.begin(), sample.end());
    const double R = static_cast<double>(sample.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double cdf = norm_cdf(sample[i]);
        const double hi = static_cast<double>(i + 1) / R - cdf;
        const double lo = cdf - static_cast<double>(i) / R;
        worst = std::max({worst, hi, lo});
    }
    return worst;
}

double dkw_band(std::uint64_t reps, double alpha) {
    return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(reps)));
}

void parallel_for(std::uint64_t count, int workers,
                  const std::function<void(std::uint64_t)>& body) {
    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    workers = static_cast<int>(std::min<std::uint64_t>(workers, std::max<std::uint64_t>(count, 1)));
    if (workers == 1) {
        for (std::uint64_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    const std::uint64_t chunk = (count + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const std::uint64_t lo = chunk * static_cast<std::uint64_t>(w);
        const std::uint64_t hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (std::uint64_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

namespace {

// Sum of the centered kernel over the selected ranks. Sparse selections are
// unranked one by one; dense ones ride a single colex walk so the cost stays
// O(C(n,m)) rather than O(n_hat log n).
double selected_sum(const dataset& data, const kernel& k, double mu, const sampled_design& sd,
                    const binom_table& tbl) {
    const int n = static_cast<int>(data.values.size());
    const int m = k.degree;
    double args[32];
    kahan_sum acc;
    if (sd.n_hat == 0) return 0.0;
    if (u128{sd.n_hat} * 8 < sd.design.total) {
        std::vector<int> c(static_cast<std::size_t>(m));
        for (const u128 rank : sd.ranks) {
            unrank_colex_into(rank, n, m, tbl, c);
            for (int j = 0; j < m; ++j) args[j] = data.values[static_cast<std::size_t>(c[static_cast<std::size_t>(j)])];
            acc.add(k.eval_ptr(args) - mu);
        }
        return acc.value();
    }
    std::vector<int> c(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) c[static_cast<std::size_t>(j)] = j;
    u128 rank = 0;
    std::size_t next = 0;
    do {
        if (next < sd.ranks.size() && sd.ranks[next] == rank) {
            for (int j = 0; j < m; ++j) args[j] = data.values[static_cast<std::size_t>(c[static_cast<std::size_t>(j)])];
            acc.add(k.eval_ptr(args) - mu);
            ++next;
        }
        ++rank;
    } while (next_combination_colex(c, n));
    return acc.value();
}

double full_centered_sum(const dataset& data, const kernel& k, double mu) {
    const int n = static_cast<int>(data.values.size());
    const int m = k.degree;
    std::vector<int> c(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) c[static_cast<std::size_t>(j)] = j;
    double args[32];
    kahan_sum acc;
    do {
        for (int j = 0; j < m; ++j) args[j] = data.values[static_cast<std::size_t>(c[static_cast<std::size_t>(j)])];
        acc.add(k.eval_ptr(args) - mu);
    } while (next_combination_colex(c, n));
    return acc.value();
}

}  // namespace

simulation_result run_experiment(const experiment_spec& spec, const moment_profile& prof) {
    const auto t0 = std::chrono::steady_clock::now();
    if (spec.reps == 0) throw std::invalid_argument("run_experiment: reps must be positive");
    const source_law& law = law_registry(spec.law_name);
    const kernel k = kernel_registry(spec.kernel_name, spec.m);
    const double mu = std::isnan(spec.mu) ? prof.mean_h : spec.mu;
    const int n = spec.n;
    const int m = spec.m;
    if (n <= m) throw std::invalid_argument("run_experiment: need n > m");

    const bool needs_design = spec.regime != sim_regime::complete_only;
    u128 total = 0;
    std::uint64_t N = 0;
    double p = 0;
    if (needs_design) {
        total = binom_u128(n, m);
        N = spec.budget.resolve(n, total);
        p = static_cast<double>(static_cast<long double>(N) / static_cast<long double>(total));
    }

    // Regime standardizers from the profile.
    const double sigma_h = std::sqrt(prof.var_h);
    const double sigma_g = std::sqrt(std::max(0.0, prof.var_g));
    double scale = 1.0;
    switch (spec.regime) {
        case sim_regime::regime1:
            if (!(prof.var_g > kRankTolerance))
                throw std::invalid_argument("regime1 requires sigma_g > 0");
            scale = std::sqrt(static_cast<double>(n)) / (static_cast<double>(m) * sigma_g);
            break;
        case sim_regime::regime2:
            if (!(prof.var_h > 0)) throw std::invalid_argument("regime2 requires sigma_h > 0");
            scale = std::sqrt(static_cast<double>(N)) / sigma_h;
            break;
        case sim_regime::regime3: {
            if (!(prof.var_g > kRankTolerance))
                throw std::invalid_argument("regime3 requires sigma_g > 0");
            const double alpha = static_cast<double>(n) / static_cast<double>(N);
            const double sigma2 =
                static_cast<double>(m) * static_cast<double>(m) * prof.var_g + alpha * prof.var_h;
            scale = std::sqrt(static_cast<double>(n) / sigma2);
            break;
        }
        case sim_regime::complete_only:
        case sim_regime::conditional_only:
            break;
    }

    std::vector<double> stats(static_cast<std::size_t>(spec.reps));

    if (spec.regime == sim_regime::conditional_only) {
        // One fixed dataset; only the Bernoulli samplers are redrawn. Tuple
        // values are cached by rank, so each replicate is O(n_hat).
        if (total > u128{kDefaultTupleBudget})
            throw std::runtime_error("conditional_only: index set too large to cache");
        rng_stream data_rng(spec.dataset_seed, 0, 0);
        const dataset data = make_dataset(law, n, spec.dataset_seed, data_rng);
        const std::size_t total_sz = static_cast<std::size_t>(total);
        std::vector<double> tuple_vals(total_sz);
        {
            std::vector<int> c(static_cast<std::size_t>(m));
            for (int j = 0; j < m; ++j) c[static_cast<std::size_t>(j)] = j;
            double args[32];
            std::size_t idx = 0;
            do {
                for (int j = 0; j < m; ++j) args[j] = data.values[static_cast<std::size_t>(c[static_cast<std::size_t>(j)])];
                tuple_vals[idx++] = k.eval_ptr(args) - mu;
            } while (next_combination_colex(c, n));
        }
        kahan_sum all, sq;
        for (const double v : tuple_vals) {
            all.add(v);
            sq.add(v * v);
        }
        const double s_all = all.value();
        const double u_h2 = sq.value() / static_cast<double>(total_sz);
        if (!(u_h2 > 0)) throw std::domain_error("conditional_only: degenerate dataset (U_{h^2}=0)");
        const bernoulli_design d = make_design(n, m, N, spec.base_seed);
        const double denom = std::sqrt(u_h2 * static_cast<double>(N) * (1.0 - p));
        parallel_for(spec.reps, spec.workers, [&](std::uint64_t i) {
            rng_stream rng(spec.base_seed, i, 1);
            const sampled_design sd = sample_design(d, rng);
            kahan_sum sel;
            for (const u128 r : sd.ranks) sel.add(tuple_vals[static_cast<std::size_t>(r)]);
            const double b_n_scaled = (sel.value() - p * s_all) / denom;
            stats[static_cast<std::size_t>(i)] = b_n_scaled;  // = sqrt(N) B_n / sqrt(U_{h^2})
        });
    } else if (spec.regime == sim_regime::complete_only) {
        const bool degenerate = !(prof.var_g > kRankTolerance);
        const u128 ctotal = binom_u128(n, m);
        const double total_d = static_cast<double>(static_cast<long double>(ctotal));
        parallel_for(spec.reps, spec.workers, [&](std::uint64_t i) {
            rng_stream rng(spec.base_seed, i, 0);
            const dataset data = make_dataset(law, n, spec.base_seed, rng);
            const double u_n = full_centered_sum(data, k, mu) / total_d;
            stats[static_cast<std::size_t>(i)] =
                degenerate ? static_cast<double>(n) * u_n / sigma_h
                           : std::sqrt(static_cast<double>(n)) * u_n /
                                 (static_cast<double>(m) * sigma_g);
        });
    } else {
        const bernoulli_design d = make_design(n, m, N, spec.base_seed);
        const binom_table tbl(n, m);
        parallel_for(spec.reps, spec.workers, [&](std::uint64_t i) {
            rng_stream data_rng(spec.base_seed, i, 0);
            const dataset data = make_dataset(law, n, spec.base_seed, data_rng);
            rng_stream design_rng(spec.base_seed, i, 1);
            const sampled_design sd = sample_design(d, design_rng);
            const double s_sel = selected_sum(data, k, mu, sd, tbl);
            const double u_prime = sd.n_hat == 0 ? 0.0 : s_sel / static_cast<double>(sd.n_hat);
            stats[static_cast<std::size_t>(i)] = scale * u_prime;
        });
    }

    simulation_result res;
    res.reps = spec.reps;
    res.budget_used = N;
    kahan_sum s1, s2;
    for (const double v : stats) {
        s1.add(v);
        s2.add(v * v);
    }
    const double Rd = static_cast<double>(spec.reps);
    res.mean = s1.value() / Rd;
    res.variance = std::max(0.0, s2.value() / Rd - res.mean * res.mean);
    res.ks = ks_to_normal(std::move(stats));
    res.dkw_band = dkw_band(spec.reps);
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

rate_fit_result rate_fit(std::span<const std::pair<double, double>> n_vs_ks) {
    if (n_vs_ks.size() < 3) throw std::invalid_argument("rate_fit: need >= 3 grid points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    const double k = static_cast<double>(n_vs_ks.size());
    for (const auto& [n, ks] : n_vs_ks) {
        if (!(ks > 0)) throw std::invalid_argument("rate_fit: all ks values must be positive");
        const double x = std::log(n);
        const double y = std::log(ks);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    const double denom = k * sxx - sx * sx;
    rate_fit_result out;
    out.slope = (k * sxy - sx * sy) / denom;
    out.intercept = (sy - out.slope * sx) / k;
    const double ss_tot = syy - sy * sy / k;
    const double ss_res = ss_tot - out.slope * (sxy - sx * sy / k);
    out.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return out;
}

}  // namespace ustat
