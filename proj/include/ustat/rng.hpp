#pragma once

#include <cmath>
#include <cstdint>

#include "ustat/int128.hpp"

namespace ustat {

/// Counter-seeded xoshiro256++ stream.
///
/// Streams are identified by (seed, stream, substream); the generator state is
/// derived from those three words alone, so replicate i can always be given
/// the stream (seed, i) independent of which worker runs it. All bounded and
/// real-valued draws are implemented here rather than with std distributions,
/// which keeps sequences identical across standard libraries.
class rng_stream {
public:
    rng_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream = 0);

    std::uint64_t next_u64();

    /// Uniform in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1].
    double next_open() { return 1.0 - next_unit(); }

    /// Uniform integer in [0, bound), bound > 0. Masked rejection.
    std::uint64_t bounded(std::uint64_t bound);
    u128 bounded128(u128 bound);

    /// Standard normal via Box-Muller; second variate is cached.
    double normal();

    double exponential() { return -std::log(next_open()); }

private:
    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace ustat
