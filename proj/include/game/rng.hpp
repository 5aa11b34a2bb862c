#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace game {

// Counter-based generator: every draw is a pure function of
// (seed, stream, counter), so results are identical on every platform and
// independent of draw order. The mixer is SplitMix64's finalizer.
inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : key_(splitmix64(splitmix64(seed) ^ (stream * 0xd1b54a32d192ed03ULL))) {}

    std::uint64_t bits(std::uint64_t counter) const noexcept {
        return splitmix64(key_ ^ splitmix64(counter));
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform(std::uint64_t counter) const noexcept {
        return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller on counters 2c and 2c+1.
    double normal(std::uint64_t counter) const noexcept {
        const double u1 = 1.0 - uniform(2 * counter);
        const double u2 = uniform(2 * counter + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t key_;
};

/// Sequential view over a CounterRng for code that draws in a fixed order.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream = 0) noexcept : rng_(seed, stream) {}

    double uniform() noexcept { return rng_.uniform(counter_++); }
    double normal() noexcept { return rng_.normal(counter_++); }

    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound) noexcept {
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(bound)) % bound;
    }

private:
    CounterRng rng_;
    std::uint64_t counter_ = 0;
};

// Stream ids keep independent consumers of one user seed decorrelated.
namespace streams {
inline constexpr std::uint64_t uniform_mask = 1;
inline constexpr std::uint64_t block_mask = 2;
inline constexpr std::uint64_t holdout = 3;
inline constexpr std::uint64_t randomized_svd = 4;
inline constexpr std::uint64_t synthetic = 5;
inline constexpr std::uint64_t kmeans = 6;
inline constexpr std::uint64_t validation = 7;
} // namespace streams

} // namespace game
