#include "ustat/stein.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "ustat/normal.hpp"
#include "ustat/numeric.hpp"
#include "ustat/rng.hpp"

namespace ustat {

namespace {
constexpr long double kSqrt2PiL = 2.506628274631000502415765284811045253L;
constexpr long double kInvSqrt2L = 0.7071067811865475244008443621048490393L;
}  // namespace

stein_eval stein_f(double z, double w) {
    const long double zl = z;
    const long double wl = w;
    // Both branches are the product of an erfcx factor (carrying the e^{w^2/2}
    // growth) and a plain tail factor at the threshold:
    //   w <= z: f = sqrt(2pi)/4 * erfcx(-w/sqrt2) * erfcx(z/sqrt2) * e^{-z^2/2}
    //   w >  z: f = sqrt(2pi)/4 * erfcx(+w/sqrt2) * erfcx(-z/sqrt2) * e^{-z^2/2}
    long double f;
    if (wl <= zl) {
        f = 0.25L * kSqrt2PiL * erfcx_ld(-wl * kInvSqrt2L) * erfcx_ld(zl * kInvSqrt2L) *
            expl(-0.5L * zl * zl);
    } else {
        f = 0.25L * kSqrt2PiL * erfcx_ld(wl * kInvSqrt2L) * erfcx_ld(-zl * kInvSqrt2L) *
            expl(-0.5L * zl * zl);
    }
    stein_eval out;
    out.z = z;
    out.w = w;
    out.f = f;
    out.fprime = (wl <= zl ? 1.0L : 0.0L) - norm_cdf_ld(zl) + wl * f;
    return out;
}

namespace {

struct slack_tracker {
    double worst = std::numeric_limits<double>::infinity();
    double at_z = 0, at_w = 0;
    void feed(double slack, double z, double w) {
        if (slack < worst) {
            worst = slack;
            at_z = z;
            at_w = w;
        }
    }
    a2_check finish(std::string label) const {
        return {std::move(label), worst, at_z, at_w, worst > 0.0};
    }
};

void feed_pair(double z, double w, slack_tracker& pos, slack_tracker& cap063,
               slack_tracker& deriv1, slack_tracker& zf1, slack_tracker& env_f,
               slack_tracker& env_fp, slack_tracker& sym) {
    const stein_eval e = stein_f(z, w);
    const double f = static_cast<double>(e.f);
    const double fp = static_cast<double>(e.fprime);

    pos.feed(f, z, w);  // strict positivity: slack is f itself
    cap063.feed(0.63 - f, z, w);
    deriv1.feed(1.0 - std::abs(fp), z, w);
    zf1.feed(1.0 - std::abs(z * f), z, w);

    if (z >= 1.0) {
        double fcap, fpcap;
        if (w <= z - 1.0) {
            fcap = 1.7 * std::exp(-z);
            fpcap = std::exp(0.5 - z);
        } else if (w <= z) {
            fcap = 1.0 / z;
            fpcap = 1.0;
        } else {
            fcap = 1.0 / w;
            fpcap = 1.0 / (1.0 + z * z);
        }
        env_f.feed(fcap - f, z, w);
        env_fp.feed(fpcap - std::abs(fp), z, w);
    } else if (z <= -1.0) {
        const double az = -z;
        double fcap, fpcap;
        if (w >= z + 1.0) {
            fcap = 1.7 * std::exp(-az);
            fpcap = std::exp(0.5 - az);
        } else if (w >= z) {
            fcap = 1.0 / az;
            fpcap = 1.0;
        } else {
            fcap = 1.0 / std::abs(w);
            fpcap = 1.0 / (1.0 + az * az);
        }
        env_f.feed(fcap - f, z, w);
        env_fp.feed(fpcap - std::abs(fp), z, w);
    }

    const stein_eval mirror = stein_f(-z, -w);
    sym.feed(1e-12 - std::abs(static_cast<double>(e.f - mirror.f)), z, w);
}

}  // namespace

a2_report lemma_a2_suite(double step, std::uint64_t random_pairs, std::uint64_t seed) {
    slack_tracker pos, cap063, deriv1, zf1, env_f, env_fp, sym, fd;

    const int steps = static_cast<int>(std::lround(20.0 / step));
    for (int i = 0; i <= steps; ++i) {
        const double z = -10.0 + step * i;
        for (int j = 0; j <= steps; ++j) {
            const double w = -10.0 + step * j;
            feed_pair(z, w, pos, cap063, deriv1, zf1, env_f, env_fp, sym);
        }
    }
    rng_stream rng(seed, 0xA2, 0);
    for (std::uint64_t t = 0; t < random_pairs; ++t) {
        const double z = -10.0 + 20.0 * rng.next_unit();
        const double w = -10.0 + 20.0 * rng.next_unit();
        feed_pair(z, w, pos, cap063, deriv1, zf1, env_f, env_fp, sym);
    }

    // f' against central differences, away from the kink at w = z.
    const double h = 1e-5;
    for (int i = 0; i <= 200; ++i) {
        const double z = -10.0 + 0.1 * i;
        for (int j = 0; j <= 200; ++j) {
            const double w = -10.0 + 0.1 * j;
            if (std::abs(w - z) < 0.01) continue;
            const double num = static_cast<double>(stein_f(z, w + h).f - stein_f(z, w - h).f) /
                               (2.0 * h);
            const double an = static_cast<double>(stein_f(z, w).fprime);
            fd.feed(1e-6 - std::abs(num - an), z, w);
        }
    }

    a2_report rep;
    rep.checks.push_back(pos.finish("f_positive"));
    rep.checks.push_back(cap063.finish("f_le_0.63"));
    rep.checks.push_back(deriv1.finish("fprime_le_1"));
    rep.checks.push_back(zf1.finish("zf_le_1"));
    rep.checks.push_back(env_f.finish("f_envelope_z_ge_1"));
    rep.checks.push_back(env_fp.finish("fprime_envelope_z_ge_1"));
    rep.checks.push_back(sym.finish("symmetry_1e-12"));
    rep.checks.push_back(fd.finish("fprime_fd_1e-6"));
    rep.all_pass = true;
    for (const auto& c : rep.checks) rep.all_pass = rep.all_pass && c.pass;
    return rep;
}

bennett_result bennett_mc_check(int n_vars, std::uint64_t reps, std::uint64_t seed,
                                bennett_family family) {
    if (n_vars < 1) throw std::invalid_argument("bennett_mc_check: n_vars must be >= 1");
    if (reps == 0) throw std::invalid_argument("bennett_mc_check: reps must be positive");
    rng_stream rng(seed, 0xBE77E77, 0);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_vars));
    kahan_sum s1, s2;
    for (std::uint64_t t = 0; t < reps; ++t) {
        double total = 0.0;
        for (int i = 0; i < n_vars; ++i) {
            double xi;
            switch (family) {
                case bennett_family::scaled_rademacher:
                    xi = (rng.next_u64() & 1u) ? scale : -scale;
                    break;
                case bennett_family::scaled_centered_exponential:
                    xi = (rng.exponential() - 1.0) * scale;
                    break;
                case bennett_family::zero:
                default:
                    xi = 0.0;
                    break;
            }
            // unit censoring
            if (xi > 1.0) xi = 1.0;
            if (xi < -1.0) xi = -1.0;
            total += xi;
        }
        const double v = std::exp(total);
        s1.add(v);
        s2.add(v * v);
    }
    const double Rd = static_cast<double>(reps);
    bennett_result out;
    out.estimate = s1.value() / Rd;
    out.se = std::sqrt(std::max(0.0, s2.value() / Rd - out.estimate * out.estimate) / Rd);
    return out;
}

}  // namespace ustat
