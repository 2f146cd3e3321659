#include "ustat/moments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ustat/hoeffding.hpp"
#include "ustat/numeric.hpp"

namespace ustat {

namespace {

void check_finite_law(const source_law& law, const char* what) {
    if (!law.is_finite())
        throw std::invalid_argument(std::string(what) + ": law must be finite-discrete");
}

double pow_count(std::size_t base, int exp) {
    double c = 1.0;
    for (int i = 0; i < exp; ++i) c *= static_cast<double>(base);
    return c;
}

}  // namespace

namespace detail {

// Weighted expectation of value_fn over support^k with the first `fixed`
// arguments of the scratch buffer held constant. The odometer walks the free
// positions; weights multiply only over free positions.
double enumerate_expectation(const source_law& law, std::span<double> scratch, int fixed,
                             double (*value_fn)(const double*, int, const void*), int arity,
                             const void* ctx) {
    const auto support = law.support();
    const auto probs = law.probs();
    const int s = static_cast<int>(support.size());
    const int free_count = arity - fixed;
    std::vector<int> idx(static_cast<std::size_t>(free_count), 0);
    for (int j = 0; j < free_count; ++j) scratch[fixed + j] = support[0];
    kahan_sum acc;
    const bool uniform = law.uniform_weights();
    for (;;) {
        double v = value_fn(scratch.data(), arity, ctx);
        if (!uniform) {
            double w = 1.0;
            for (int j = 0; j < free_count; ++j) w *= probs[idx[j]];
            v *= w;
        }
        acc.add(v);
        int j = 0;
        while (j < free_count) {
            if (++idx[j] < s) {
                scratch[fixed + j] = support[idx[j]];
                break;
            }
            idx[j] = 0;
            scratch[fixed + j] = support[0];
            ++j;
        }
        if (j == free_count) break;
    }
    if (uniform) return acc.value() / pow_count(support.size(), free_count);
    return acc.value();
}

}  // namespace detail

namespace {

struct raw_eval_ctx {
    const kernel* k;
};
double raw_eval(const double* a, int m, const void* ctx) {
    return static_cast<const raw_eval_ctx*>(ctx)->k->fn(a, m) -
           static_cast<const raw_eval_ctx*>(ctx)->k->offset;
}

double expect_fixed(const kernel& k, const source_law& law, std::span<double> scratch, int fixed) {
    raw_eval_ctx ctx{&k};
    return detail::enumerate_expectation(law, scratch, fixed, raw_eval, k.degree, &ctx);
}

}  // namespace

double projection_h_r(const kernel& k, const source_law& law, int r,
                      std::span<const double> args) {
    if (r < 1 || r > k.degree)
        throw std::invalid_argument("projection_h_r: r must be in [1, m], got r=" +
                                    std::to_string(r));
    if (static_cast<int>(args.size()) != r)
        throw std::invalid_argument("projection_h_r: args size must equal r");
    std::vector<double> scratch(static_cast<std::size_t>(k.degree));
    std::copy(args.begin(), args.end(), scratch.begin());
    if (r == k.degree) return k.eval_ptr(scratch.data());
    check_finite_law(law, "projection_h_r");
    return expect_fixed(k, law, scratch, r);
}

double projection_h_r_mc(const kernel& k, const source_law& law, int r,
                         std::span<const double> args, std::uint64_t reps, rng_stream& rng) {
    if (r < 1 || r > k.degree)
        throw std::invalid_argument("projection_h_r_mc: r must be in [1, m]");
    if (static_cast<int>(args.size()) != r)
        throw std::invalid_argument("projection_h_r_mc: args size must equal r");
    std::vector<double> scratch(static_cast<std::size_t>(k.degree));
    std::copy(args.begin(), args.end(), scratch.begin());
    if (r == k.degree) return k.eval_ptr(scratch.data());
    if (reps == 0) throw std::invalid_argument("projection_h_r_mc: reps must be positive");
    kahan_sum acc;
    for (std::uint64_t i = 0; i < reps; ++i) {
        for (int j = r; j < k.degree; ++j) scratch[j] = law.sample(rng);
        acc.add(k.eval_ptr(scratch.data()));
    }
    return acc.value() / static_cast<double>(reps);
}

moment_profile exact_moments(const kernel& k, const source_law& law,
                             std::uint64_t tuple_budget) {
    check_finite_law(law, "exact_moments");
    const int m = k.degree;
    const std::size_t s = law.support().size();
    const double count = pow_count(s, m);
    if (count > static_cast<double>(tuple_budget))
        throw std::runtime_error("exact_moments: enumeration too large (" +
                                 std::to_string(static_cast<std::uint64_t>(count)) + " tuples, budget " +
                                 std::to_string(tuple_budget) + ")");

    moment_profile prof;
    prof.prov = provenance::exact;
    std::vector<double> scratch(static_cast<std::size_t>(m));

    prof.mean_h = expect_fixed(k, law, scratch, 0);
    const double mu = prof.mean_h;

    struct centered_ctx {
        const kernel* k;
        double mu;
        double var_h;  // used by the var_h2 pass
    } cctx{&k, mu, 0.0};

    auto var_fn = +[](const double* a, int mm, const void* c) {
        const auto* cc = static_cast<const centered_ctx*>(c);
        const double v = cc->k->fn(a, mm) - cc->k->offset - cc->mu;
        return v * v;
    };
    auto abs3_fn = +[](const double* a, int mm, const void* c) {
        const auto* cc = static_cast<const centered_ctx*>(c);
        const double v = std::abs(cc->k->fn(a, mm) - cc->k->offset - cc->mu);
        return v * v * v;
    };
    prof.var_h = detail::enumerate_expectation(law, scratch, 0, var_fn, m, &cctx);
    prof.abs3_h = detail::enumerate_expectation(law, scratch, 0, abs3_fn, m, &cctx);
    cctx.var_h = prof.var_h;
    auto varh2_fn = +[](const double* a, int mm, const void* c) {
        const auto* cc = static_cast<const centered_ctx*>(c);
        const double v = cc->k->fn(a, mm) - cc->k->offset - cc->mu;
        const double d = v * v - cc->var_h;
        return d * d;
    };
    prof.var_h2 = detail::enumerate_expectation(law, scratch, 0, varh2_fn, m, &cctx);
    prof.has_var_h2 = true;

    // Projections h_r: walk the outer support^r grid and take the inner
    // expectation at each point. rank d is the first r with positive variance.
    const auto support = law.support();
    const auto probs = law.probs();
    prof.rank_d = m;
    bool rank_found = false;
    for (int r = 1; r <= m; ++r) {
        std::vector<int> idx(static_cast<std::size_t>(r), 0);
        for (int j = 0; j < r; ++j) scratch[j] = support[0];
        kahan_sum var_acc, abs3_acc, psi_acc;
        const bool uniform = law.uniform_weights();
        for (;;) {
            double w = 1.0;
            if (!uniform)
                for (int j = 0; j < r; ++j) w *= probs[idx[j]];
            const double hr = (r == m) ? k.eval_ptr(scratch.data())
                                       : expect_fixed(k, law, scratch, r);
            const double c = hr - mu;
            var_acc.add(w * c * c);
            if (r == 1) {
                abs3_acc.add(w * std::abs(c) * c * c);
                // Psi_1(x) = E[(h(x, Y) - mu)^2]
                centered_ctx pctx{&k, mu, 0.0};
                const double psi1 =
                    (m == 1) ? c * c
                             : detail::enumerate_expectation(law, scratch, 1, var_fn, m, &pctx);
                psi_acc.add(w * psi1 * std::sqrt(psi1));
            }
            int j = 0;
            while (j < r) {
                if (++idx[j] < static_cast<int>(s)) {
                    scratch[j] = support[idx[j]];
                    break;
                }
                idx[j] = 0;
                scratch[j] = support[0];
                ++j;
            }
            if (j == r) break;
        }
        const double norm = uniform ? pow_count(s, r) : 1.0;
        const double var_r = var_acc.value() / norm;
        if (r == 1) {
            prof.var_g = var_r;
            prof.abs3_g = abs3_acc.value() / norm;
            prof.psi1_pow32 = psi_acc.value() / norm;
        }
        if (!rank_found && var_r > kRankTolerance) {
            prof.rank_d = r;
            rank_found = true;
        }
    }

    prof.pi_r_abs32.resize(m >= 2 ? static_cast<std::size_t>(m - 1) : 0, 0.0);
    for (int r = 2; r <= m; ++r)
        prof.pi_r_abs32[static_cast<std::size_t>(r - 2)] =
            exact_pi_r_abs32(k, law, r, prof.mean_h, prof.var_h, tuple_budget);
    return prof;
}

namespace {

// abs3 accumulator above folds sign handling awkwardly for g; recompute plainly.
double abs_cubed(double v) {
    const double a = std::abs(v);
    return a * a * a;
}

}  // namespace

moment_profile mc_moments(const kernel& k, const source_law& law, const mc_options& opt) {
    if (opt.reps < 10'000)
        throw std::invalid_argument("mc_moments: reps must be >= 10^4, got " +
                                    std::to_string(opt.reps));
    const int m = k.degree;
    const std::uint64_t R = opt.reps;
    rng_stream rng(opt.seed, 0x4d434d4f /* "MCMO" */, 0);

    moment_profile prof;
    prof.prov = provenance::monte_carlo;
    prof.mc_reps = R;

    // Pass 1: kernel draws for the plain moments.
    std::vector<double> h(static_cast<std::size_t>(R));
    std::vector<double> args(static_cast<std::size_t>(m));
    for (auto& v : h) {
        for (auto& a : args) a = law.sample(rng);
        v = k.eval_ptr(args.data());
    }
    kahan_sum sum;
    for (const double v : h) sum.add(v);
    prof.mean_h = sum.value() / static_cast<double>(R);
    const double mu = prof.mean_h;

    kahan_sum s2, s3, s4, sq2, sq3;
    for (const double v : h) {
        const double c = v - mu;
        s2.add(c * c);
        s3.add(abs_cubed(c));
        sq2.add(c * c * c * c);
        sq3.add(abs_cubed(c) * abs_cubed(c));
    }
    const double Rd = static_cast<double>(R);
    prof.var_h = s2.value() / Rd;
    prof.abs3_h = s3.value() / Rd;
    prof.se.mean_h = std::sqrt(std::max(0.0, prof.var_h) / Rd);
    prof.se.var_h = std::sqrt(std::max(0.0, sq2.value() / Rd - prof.var_h * prof.var_h) / Rd);
    prof.se.abs3_h = std::sqrt(std::max(0.0, sq3.value() / Rd - prof.abs3_h * prof.abs3_h) / Rd);
    if (opt.want_var_h2) {
        kahan_sum v2, v2sq;
        for (const double v : h) {
            const double c = v - mu;
            const double d = c * c - prof.var_h;
            v2.add(d * d);
            v2sq.add(d * d * d * d);
        }
        prof.var_h2 = v2.value() / Rd;
        prof.has_var_h2 = true;
        prof.se.var_h2 =
            std::sqrt(std::max(0.0, v2sq.value() / Rd - prof.var_h2 * prof.var_h2) / Rd);
    }
    h.clear();
    h.shrink_to_fit();

    // Pass 2: projection estimates with inner expectations. The sample
    // variance of the point estimates is inflated by the inner noise; subtract
    // its unbiased estimate (mean inner variance / inner_reps).
    const std::uint64_t n_outer = std::clamp<std::uint64_t>(R / 100, 2'000, 50'000);
    const std::uint64_t inner = std::max<std::uint64_t>(opt.inner_reps, 2);
    prof.rank_d = m;
    bool rank_decided = false;
    for (int r = 1; r < m; ++r) {
        std::vector<double> hr_hat(static_cast<std::size_t>(n_outer));
        std::vector<double> inner_var(static_cast<std::size_t>(n_outer));
        std::vector<double> psi_hat;
        if (r == 1) psi_hat.resize(static_cast<std::size_t>(n_outer));
        for (std::uint64_t i = 0; i < n_outer; ++i) {
            for (int j = 0; j < r; ++j) args[static_cast<std::size_t>(j)] = law.sample(rng);
            kahan_sum isum, isq, ipsi;
            for (std::uint64_t t = 0; t < inner; ++t) {
                for (int j = r; j < m; ++j) args[static_cast<std::size_t>(j)] = law.sample(rng);
                const double v = k.eval_ptr(args.data());
                isum.add(v);
                isq.add(v * v);
                if (r == 1) {
                    const double c = v - mu;
                    ipsi.add(c * c);
                }
            }
            const double id = static_cast<double>(inner);
            const double im = isum.value() / id;
            hr_hat[i] = im;
            inner_var[i] = std::max(0.0, (isq.value() - id * im * im) / (id - 1.0));
            if (r == 1) psi_hat[i] = ipsi.value() / id;
        }
        const double od = static_cast<double>(n_outer);
        kahan_sum om;
        for (std::uint64_t i = 0; i < n_outer; ++i) om.add(hr_hat[i]);
        const double outer_mean = om.value() / od;
        kahan_sum ovar, ovar_sq, oabs3, oabs3_sq;
        for (std::uint64_t i = 0; i < n_outer; ++i) {
            const double c = hr_hat[i] - outer_mean;
            const double term = c * c - inner_var[i] / static_cast<double>(inner);
            ovar.add(term);
            ovar_sq.add(term * term);
            const double cg = hr_hat[i] - mu;
            oabs3.add(abs_cubed(cg));
            oabs3_sq.add(abs_cubed(cg) * abs_cubed(cg));
        }
        const double var_r = ovar.value() / od;
        const double var_r_se =
            std::sqrt(std::max(0.0, ovar_sq.value() / od - var_r * var_r) / od);
        if (r == 1) {
            prof.var_g = std::max(0.0, var_r);
            prof.se.var_g = var_r_se;
            prof.abs3_g = oabs3.value() / od;
            prof.se.abs3_g =
                std::sqrt(std::max(0.0, oabs3_sq.value() / od - prof.abs3_g * prof.abs3_g) / od);
            kahan_sum ps, ps_sq;
            for (std::uint64_t i = 0; i < n_outer; ++i) {
                const double p32 = psi_hat[i] * std::sqrt(std::max(0.0, psi_hat[i]));
                ps.add(p32);
                ps_sq.add(p32 * p32);
            }
            prof.psi1_pow32 = ps.value() / od;
            prof.se.psi1_pow32 = std::sqrt(
                std::max(0.0, ps_sq.value() / od - prof.psi1_pow32 * prof.psi1_pow32) / od);
        }
        if (!rank_decided && var_r > 5.0 * var_r_se) {
            prof.rank_d = r;
            rank_decided = true;
        }
    }
    // r = m always has Var[h_m] = var_h > 0 when the kernel is non-constant.
    if (!rank_decided && prof.var_h > 5.0 * prof.se.var_h) prof.rank_d = m;
    return prof;
}

}  // namespace ustat
