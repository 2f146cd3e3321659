#pragma once

#include <cstdint>
#include <string>

namespace ustat {

using u128 = unsigned __int128;

inline std::string to_string(u128 v) {
    if (v == 0) return "0";
    std::string s;
    while (v > 0) {
        s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
        v /= 10;
    }
    return {s.rbegin(), s.rend()};
}

inline int countl_zero_u128(u128 v) {
    const auto hi = static_cast<std::uint64_t>(v >> 64);
    const auto lo = static_cast<std::uint64_t>(v);
    if (hi != 0) return __builtin_clzll(hi);
    if (lo != 0) return 64 + __builtin_clzll(lo);
    return 128;
}

struct u128_hash {
    std::size_t operator()(u128 v) const noexcept {
        // splitmix64 finalizer over the two halves
        auto mix = [](std::uint64_t x) {
            x ^= x >> 30; x *= 0xbf58476d1ce4e5b9ULL;
            x ^= x >> 27; x *= 0x94d049bb133111ebULL;
            x ^= x >> 31;
            return x;
        };
        return static_cast<std::size_t>(
            mix(static_cast<std::uint64_t>(v)) ^ mix(static_cast<std::uint64_t>(v >> 64) + 0x9e3779b97f4a7c15ULL));
    }
};

}  // namespace ustat
