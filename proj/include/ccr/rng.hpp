#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace ccr {

/// Independent stream for (seed, realization, substream). The key is mixed
/// through splitmix64 so adjacent indices give uncorrelated engines, and the
/// result depends only on the key, never on which worker draws it.
inline std::mt19937_64 realization_stream(std::uint64_t seed, std::uint64_t index, std::uint64_t substream = 0) {
    auto mix = [](std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    };
    const std::uint64_t a = mix(seed);
    const std::uint64_t b = mix(a ^ mix(index + 0x632be59bd9b4e019ULL));
    const std::uint64_t c = mix(b ^ mix(substream + 0x8cb92ba72f3d8dd7ULL));
    std::seed_seq seq{static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return std::mt19937_64(seq);
}

/// CN(0, variance) sample.
inline std::complex<double> complex_gaussian(std::mt19937_64& eng, double variance = 1.0) {
    std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
    const double re = n(eng);
    const double im = n(eng);
    return {re, im};
}

}  // namespace ccr
