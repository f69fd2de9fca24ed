#pragma once

// Deterministic random streams shared by the sampler, the trainer and the
// synthetic generator. Every draw is specified exactly so that an independent
// implementation in another language reproduces the same bytes:
//
//   state update   state += 0x9E3779B97F4A7C15
//   output         z = state
//                  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//                  z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//                  return z ^ (z >> 31)                      (SplitMix64)
//
//   substream      initial state = seed XOR fnv1a64(tag)
//   below(n)       next() mod n       (bias <= n / 2^64, ignored)
//   unit()         (next() >> 11) * 2^-53                    in [0, 1)
//   bernoulli(p)   unit() < p
//   gaussian()     sqrt(-2 ln(1 - u1)) * cos(2 pi u2), u1 and u2 fresh units
//   shuffle        Fisher-Yates: for i = n-1 .. 1, swap(v[i], v[below(i+1)])

#include <cmath>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace camtrap {

constexpr std::uint64_t fnv1a64(std::string_view text) noexcept {
    std::uint64_t hash = 0xCBF29CE484222325ULL;
    for (char c : text) {
        hash ^= static_cast<std::uint8_t>(c);
        hash *= 0x100000001B3ULL;
    }
    return hash;
}

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t below(std::uint64_t n) noexcept { return next() % n; }

    double unit() noexcept {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) noexcept { return unit() < p; }

    // Box-Muller; always consumes exactly two draws.
    double gaussian() noexcept {
        const double u1 = unit();
        const double u2 = unit();
        constexpr double two_pi = 6.283185307179586476925286766559;
        return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(two_pi * u2);
    }

private:
    std::uint64_t state_;
};

inline SplitMix64 substream(std::uint64_t seed, std::string_view tag) noexcept {
    return SplitMix64(seed ^ fnv1a64(tag));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) noexcept {
    return substream(seed, tag).next();
}

template <class T>
void fisher_yates(std::vector<T>& values, SplitMix64& rng) {
    for (std::size_t i = values.size(); i > 1; --i) {
        const std::uint64_t j = rng.below(i);
        std::swap(values[i - 1], values[static_cast<std::size_t>(j)]);
    }
}

} // namespace camtrap
