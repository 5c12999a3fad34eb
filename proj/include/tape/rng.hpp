// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

namespace tape::rng {

// splitmix64 finalizer; full-avalanche 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

// Stateless counter-based generator: the value at (seed, stream, counter) is a
// pure function of its inputs, so any evaluation order (or thread count)
// produces identical results.
constexpr std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream,
                                     std::uint64_t counter) noexcept {
    std::uint64_t x = mix64(seed + 0x9e3779b97f4a7c15ULL);
    x = mix64(x ^ stream);
    x = mix64(x ^ counter);
    return x;
}

// Uniform double in [0, 1) from the top 53 bits.
constexpr double unit_real(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Standard normal via a 12-term uniform sum (mean 0, variance 1). Uses only
// additions and multiplications, so the result is bit-reproducible across
// platforms, unlike transcendental-based transforms.
constexpr double normal_at(std::uint64_t seed, std::uint64_t stream,
                           std::uint64_t index) noexcept {
    double acc = 0.0;
    for (std::uint64_t k = 0; k < 12; ++k) {
        acc += unit_real(counter_hash(seed, stream, index * 12 + k));
    }
    return acc - 6.0;
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
    return mix64(mix64(seed + 0x632be59bd9b4e019ULL) ^ salt);
}

// Stream ids keep independent consumers of one seed decorrelated.
inline constexpr std::uint64_t kStreamWeights = 0x1000'0000'0000'0000ULL;
inline constexpr std::uint64_t kStreamLatents = 0x2000'0000'0000'0000ULL;
inline constexpr std::uint64_t kStreamTest    = 0x7000'0000'0000'0000ULL;

}  // namespace tape::rng
