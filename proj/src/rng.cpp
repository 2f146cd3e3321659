#include "ustat/rng.hpp"

#include <cmath>
#include <numbers>

namespace ustat {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

rng_stream::rng_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream) {
    // Fold the three identifiers through splitmix64 so that nearby
    // (seed, stream) pairs land in unrelated states.
    std::uint64_t st = seed;
    st ^= 0x6a09e667f3bcc909ULL + splitmix64(st);
    st ^= stream * 0x9e3779b97f4a7c15ULL;
    (void)splitmix64(st);
    st ^= substream * 0xd1342543de82ef95ULL;
    for (auto& word : s_) word = splitmix64(st);
    // xoshiro must not start from the all-zero state
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

std::uint64_t rng_stream::next_u64() {
    // xoshiro256++ step (Blackman & Vigna)
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

std::uint64_t rng_stream::bounded(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const int bits = 64 - __builtin_clzll(bound - 1);
    const std::uint64_t mask = (bits == 64) ? ~0ULL : ((1ULL << bits) - 1);
    for (;;) {
        const std::uint64_t r = next_u64() & mask;
        if (r < bound) return r;
    }
}

u128 rng_stream::bounded128(u128 bound) {
    if (bound <= 1) return 0;
    if (bound == (u128{1} << 64)) return next_u64();
    if (bound < (u128{1} << 64)) return bounded(static_cast<std::uint64_t>(bound));
    const int bits = 128 - countl_zero_u128(bound - 1);
    const u128 mask = (bits == 128) ? ~u128{0} : ((u128{1} << bits) - 1);
    for (;;) {
        const u128 r = ((u128{next_u64()} << 64) | next_u64()) & mask;
        if (r < bound) return r;
    }
}

double rng_stream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = next_open();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

}  // namespace ustat
