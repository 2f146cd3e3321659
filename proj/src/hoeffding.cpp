#include "ustat/hoeffding.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ustat/combinatorics.hpp"
#include "ustat/numeric.hpp"

namespace ustat {

namespace detail {
double enumerate_expectation(const source_law& law, std::span<double> scratch, int fixed,
                             double (*value_fn)(const double*, int, const void*), int arity,
                             const void* ctx);
}

namespace {

struct h2_context {
    const kernel* k;
    const source_law* law;
    double mean_h;
    double var_h;
};

struct sq_ctx {
    const kernel* k;
    double mu;
};

double centered_sq(const double* a, int m, const void* c) {
    const auto* cc = static_cast<const sq_ctx*>(c);
    const double v = cc->k->fn(a, m) - cc->k->offset - cc->mu;
    return v * v;
}

h2_context make_context(const kernel& k, const source_law& law) {
    if (!law.is_finite())
        throw std::invalid_argument("hoeffding: exact path needs a finite-discrete law");
    std::vector<double> scratch(static_cast<std::size_t>(k.degree));
    struct raw {
        const kernel* k;
    } rc{&k};
    auto raw_fn = +[](const double* a, int m, const void* c) {
        const auto* r = static_cast<const raw*>(c);
        return r->k->fn(a, m) - r->k->offset;
    };
    const double mean = detail::enumerate_expectation(law, scratch, 0, raw_fn, k.degree, &rc);
    sq_ctx sc{&k, mean};
    const double var =
        detail::enumerate_expectation(law, scratch, 0, centered_sq, k.degree, &sc);
    return {&k, &law, mean, var};
}

double psi_tilde(const h2_context& ctx, int r, std::span<const double> args) {
    const int m = ctx.k->degree;
    std::vector<double> scratch(static_cast<std::size_t>(m));
    std::copy(args.begin(), args.end(), scratch.begin());
    sq_ctx sc{ctx.k, ctx.mean_h};
    if (r == m) {
        const double v = ctx.k->eval_ptr(scratch.data()) - ctx.mean_h;
        return v * v - ctx.var_h;
    }
    return detail::enumerate_expectation(*ctx.law, scratch, r, centered_sq, m, &sc) - ctx.var_h;
}

// pi over the argument subset lattice, memoized per call: for nonempty S,
// pi(S) = Psi~_{|S|}(args_S) - sum over nonempty proper subsets T of pi(T).
double pi_eval(const h2_context& ctx, std::span<const double> args) {
    const int r = static_cast<int>(args.size());
    const unsigned full = (1u << r) - 1u;
    std::vector<double> memo(full + 1, 0.0);
    std::vector<double> sub;
    sub.reserve(static_cast<std::size_t>(r));
    for (unsigned mask = 1; mask <= full; ++mask) {
        sub.clear();
        for (int j = 0; j < r; ++j)
            if (mask & (1u << j)) sub.push_back(args[static_cast<std::size_t>(j)]);
        double v = psi_tilde(ctx, static_cast<int>(sub.size()), sub);
        for (unsigned t = (mask - 1) & mask; t != 0; t = (t - 1) & mask) v -= memo[t];
        memo[mask] = v;
    }
    return memo[full];
}

void check_r(int r, int m, const char* what) {
    if (r < 1 || r > m)
        throw std::invalid_argument(std::string(what) + ": r must be in [1, m], got r=" +
                                    std::to_string(r));
}

}  // namespace

double psi_tilde_r(const kernel& k, const source_law& law, int r, std::span<const double> args) {
    check_r(r, k.degree, "psi_tilde_r");
    if (static_cast<int>(args.size()) != r)
        throw std::invalid_argument("psi_tilde_r: args size must equal r");
    const h2_context ctx = make_context(k, law);
    return psi_tilde(ctx, r, args);
}

double psi_tilde_r_mc(const kernel& k, const source_law& law, int r, std::span<const double> args,
                      std::uint64_t reps, rng_stream& rng) {
    check_r(r, k.degree, "psi_tilde_r_mc");
    if (reps == 0) throw std::invalid_argument("psi_tilde_r_mc: reps must be positive");
    const int m = k.degree;
    // plug-in mean and variance from an auxiliary sample of the same size
    std::vector<double> scratch(static_cast<std::size_t>(m));
    kahan_sum ms;
    for (std::uint64_t i = 0; i < reps; ++i) {
        for (auto& a : scratch) a = law.sample(rng);
        ms.add(k.eval_ptr(scratch.data()));
    }
    const double mu = ms.value() / static_cast<double>(reps);
    kahan_sum vs;
    for (std::uint64_t i = 0; i < reps; ++i) {
        for (auto& a : scratch) a = law.sample(rng);
        const double c = k.eval_ptr(scratch.data()) - mu;
        vs.add(c * c);
    }
    const double var = vs.value() / static_cast<double>(reps);
    std::copy(args.begin(), args.end(), scratch.begin());
    if (r == m) {
        const double c = k.eval_ptr(scratch.data()) - mu;
        return c * c - var;
    }
    kahan_sum acc;
    for (std::uint64_t i = 0; i < reps; ++i) {
        for (int j = r; j < m; ++j) scratch[static_cast<std::size_t>(j)] = law.sample(rng);
        const double c = k.eval_ptr(scratch.data()) - mu;
        acc.add(c * c);
    }
    return acc.value() / static_cast<double>(reps) - var;
}

double pi_r_h2(const kernel& k, const source_law& law, int r, std::span<const double> args) {
    check_r(r, k.degree, "pi_r_h2");
    if (static_cast<int>(args.size()) != r)
        throw std::invalid_argument("pi_r_h2: args size must equal r");
    const h2_context ctx = make_context(k, law);
    return pi_eval(ctx, args);
}

h2_decomposition decompose_uh2(const dataset& data, const kernel& k, const moment_profile& prof,
                               std::uint64_t tuple_budget) {
    if (prof.prov != provenance::exact)
        throw std::invalid_argument("decompose_uh2: requires an exact moment profile");
    if (!(prof.var_h > 0)) throw std::invalid_argument("decompose_uh2: sigma_h^2 must be > 0");
    const int m = k.degree;
    if (m > 3)
        throw std::invalid_argument("decompose_uh2: direct remainder sums implemented for m <= 3");
    if (data.law == nullptr || !data.law->is_finite())
        throw std::invalid_argument("decompose_uh2: dataset law must be finite-discrete");
    const int n = static_cast<int>(data.values.size());
    if (n < m) throw std::invalid_argument("decompose_uh2: need n >= m");
    const u128 total = binom_u128(n, m);
    if (total > u128{tuple_budget})
        throw std::runtime_error("decompose_uh2: enumeration too large (" + to_string(total) +
                                 " tuples)");

    const h2_context ctx{&k, data.law, prof.mean_h, prof.var_h};
    const double sig2 = prof.var_h;

    h2_decomposition out;
    out.eta.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double x = data.values[static_cast<std::size_t>(i)];
        const double psi1 = psi_tilde(ctx, 1, std::span<const double>(&x, 1)) + sig2;
        out.eta[static_cast<std::size_t>(i)] = static_cast<double>(m) * psi1 /
                                               (static_cast<double>(n) * sig2);
    }

    // U_{h^2} over all data m-subsets
    {
        std::vector<int> c(static_cast<std::size_t>(m));
        for (int j = 0; j < m; ++j) c[static_cast<std::size_t>(j)] = j;
        std::vector<double> args(static_cast<std::size_t>(m));
        kahan_sum acc;
        do {
            for (int j = 0; j < m; ++j) args[static_cast<std::size_t>(j)] = data.values[static_cast<std::size_t>(c[static_cast<std::size_t>(j)])];
            const double v = k.eval_ptr(args.data()) - prof.mean_h;
            acc.add(v * v);
        } while (next_combination_colex(c, n));
        const double u_h2 = acc.value() / static_cast<double>(static_cast<long double>(total));
        out.lhs = (u_h2 - sig2) / sig2;
    }

    // R = sum_r C(m,r) C(n,r)^{-1} sum over data r-subsets of pi_r / sigma_h^2
    kahan_sum r_acc;
    for (int r = 2; r <= m; ++r) {
        std::vector<int> c(static_cast<std::size_t>(r));
        for (int j = 0; j < r; ++j) c[static_cast<std::size_t>(j)] = j;
        std::vector<double> args(static_cast<std::size_t>(r));
        kahan_sum acc;
        do {
            for (int j = 0; j < r; ++j) args[static_cast<std::size_t>(j)] = data.values[static_cast<std::size_t>(c[static_cast<std::size_t>(j)])];
            acc.add(pi_eval(ctx, args));
        } while (next_combination_colex(c, n));
        r_acc.add(binom_d(m, r) / binom_d(n, r) * acc.value() / sig2);
    }
    out.remainder_r = r_acc.value();
    return out;
}

double r_norm32_bound(const moment_profile& prof, int n) {
    if (prof.pi_r_abs32.empty())
        throw std::invalid_argument("r_norm32_bound: profile is missing pi_r moments");
    const int m = 1 + static_cast<int>(prof.pi_r_abs32.size());
    if (!(prof.var_h > 0)) throw std::invalid_argument("r_norm32_bound: sigma_h^2 must be > 0");
    const double sig3 = prof.var_h * std::sqrt(prof.var_h);
    kahan_sum acc;
    for (int r = 2; r <= m; ++r) {
        const double c_mr = binom_d(m, r);
        const double c_nr = binom_d(n, r);
        acc.add(std::pow(c_mr, 1.5) / std::sqrt(c_nr) * std::pow(2.0, 0.5 * r) *
                prof.pi_r_abs32[static_cast<std::size_t>(r - 2)] / sig3);
    }
    return acc.value();
}

r_norm_estimate r_norm32_mc(const kernel& k, const source_law& law, const moment_profile& prof,
                            int n, std::uint64_t reps, std::uint64_t seed) {
    if (prof.prov != provenance::exact)
        throw std::invalid_argument("r_norm32_mc: requires an exact moment profile");
    if (reps == 0) throw std::invalid_argument("r_norm32_mc: reps must be positive");
    kahan_sum s, s2;
    for (std::uint64_t i = 0; i < reps; ++i) {
        rng_stream rng(seed, i, 2);
        const dataset data = make_dataset(law, n, seed, rng);
        const auto dec = decompose_uh2(data, k, prof);
        const double a = std::abs(dec.remainder_r);
        const double p32 = a * std::sqrt(a);
        s.add(p32);
        s2.add(p32 * p32);
    }
    const double R = static_cast<double>(reps);
    const double m32 = s.value() / R;
    const double se32 = std::sqrt(std::max(0.0, s2.value() / R - m32 * m32) / R);
    r_norm_estimate out;
    out.value = std::pow(m32, 2.0 / 3.0);
    // d/dx x^{2/3} = (2/3) x^{-1/3}
    out.se = m32 > 0 ? (2.0 / 3.0) * std::pow(m32, -1.0 / 3.0) * se32 : 0.0;
    return out;
}

double exact_pi_r_abs32(const kernel& k, const source_law& law, int r, double mean_h, double var_h,
                        std::uint64_t tuple_budget) {
    check_r(r, k.degree, "exact_pi_r_abs32");
    if (!law.is_finite())
        throw std::invalid_argument("exact_pi_r_abs32: law must be finite-discrete");
    const auto support = law.support();
    const auto probs = law.probs();
    const std::size_t s = support.size();
    double count = 1.0;
    for (int i = 0; i < r; ++i) count *= static_cast<double>(s);
    if (count > static_cast<double>(tuple_budget))
        throw std::runtime_error("exact_pi_r_abs32: enumeration too large");

    const h2_context ctx{&k, &law, mean_h, var_h};
    std::vector<int> idx(static_cast<std::size_t>(r), 0);
    std::vector<double> args(static_cast<std::size_t>(r), support[0]);
    kahan_sum acc;
    const bool uniform = law.uniform_weights();
    for (;;) {
        double w = 1.0;
        if (!uniform)
            for (int j = 0; j < r; ++j) w *= probs[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
        const double v = std::abs(pi_eval(ctx, args));
        acc.add(w * v * std::sqrt(v));
        int j = 0;
        while (j < r) {
            auto& ij = idx[static_cast<std::size_t>(j)];
            if (++ij < static_cast<int>(s)) {
                args[static_cast<std::size_t>(j)] = support[static_cast<std::size_t>(ij)];
                break;
            }
            ij = 0;
            args[static_cast<std::size_t>(j)] = support[0];
            ++j;
        }
        if (j == r) break;
    }
    return uniform ? acc.value() / count : acc.value();
}

}  // namespace ustat
