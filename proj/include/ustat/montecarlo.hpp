#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ustat/moments.hpp"
#include "ustat/source_law.hpp"

namespace ustat {

/// Standardizations under test:
///   regime1: sqrt(n) U' / (m sigma_g)          ("N >> n")
///   regime2: sqrt(N) U' / sigma_h              ("N << n^d")
///   regime3: sqrt(n) U' / sigma, sigma^2 = m^2 sigma_g^2 + alpha sigma_h^2
///   complete_only: sqrt(n) U_n / (m sigma_g), or n U_n / sigma_h when the
///                  kernel is degenerate (sigma_g = 0)
///   conditional_only: sqrt(N) B_n / sqrt(U_{h^2}) on one fixed dataset
enum class sim_regime { regime1, regime2, regime3, complete_only, conditional_only };

std::string sim_regime_name(sim_regime r);
sim_regime parse_sim_regime(const std::string& s);

/// N as a function of n: a literal value, or one rule per asymptotic regime:
/// n^2 (N >> n), floor(sqrt(n)) (N << n), c*n (N ~ n). Resolution clamps into
/// the valid open range (0, C(n,m)) since n^2 exceeds C(n,2) at every n.
struct budget_rule {
    enum class kind { literal, n_squared, sqrt_n, linear };
    kind k = kind::literal;
    double value = 0;

    static budget_rule parse(const std::string& s);
    std::uint64_t resolve(int n, u128 total) const;
    std::string str() const;
};

struct experiment_spec {
    std::string law_name;
    std::string kernel_name;
    sim_regime regime = sim_regime::regime2;
    int n = 0;
    int m = 2;
    budget_rule budget;
    std::uint64_t reps = 0;
    std::uint64_t base_seed = 0;
    int workers = 0;  // <= 0: hardware concurrency
    std::uint64_t dataset_seed = 1;  // conditional_only
    double mu = std::numeric_limits<double>::quiet_NaN();  // default: profile mean
};

struct simulation_result {
    double ks = 0;
    double dkw_band = 0;    // 95% DKW half-width
    double mean = 0;        // replicate mean of the standardized statistic
    double variance = 0;
    double seconds = 0;
    std::uint64_t reps = 0;
    std::uint64_t budget_used = 0;  // resolved N (0 for complete_only)
};

/// sup-distance between the empirical CDF of `sample` and Phi.
double ks_to_normal(std::vector<double> sample);

double dkw_band(std::uint64_t reps, double alpha = 0.05);

/// Runs `spec.reps` replicates. Replicate i draws its data from stream
/// (base_seed, i, 0) and its design from (base_seed, i, 1), so results are
/// bit-identical for any worker count. The profile supplies the centering
/// constant (unless spec.mu is set) and the standardizers.
simulation_result run_experiment(const experiment_spec& spec, const moment_profile& prof);

struct rate_fit_result {
    double slope = 0;
    double intercept = 0;
    double r2 = 0;
};

/// Least squares of log(ks) on log(n); needs >= 3 points with ks > 0.
rate_fit_result rate_fit(std::span<const std::pair<double, double>> n_vs_ks);

/// Deterministic index-parallel loop (contiguous blocks per worker).
void parallel_for(std::uint64_t count, int workers, const std::function<void(std::uint64_t)>& body);

}  // namespace ustat
