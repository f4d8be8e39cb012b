#pragma once

/// @file random.hpp
/// @brief Seeded random source shared by every simulation component.
///
/// The generator is xoshiro256** seeded through SplitMix64. Independent
/// streams for (master seed, cell, run) triples are obtained with
/// `derive_seed`, so a run's stream never depends on scheduling order.

#include <bit>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <stdexcept>

namespace dynbv {

/// SplitMix64 finalizer. A bijection on 64-bit words.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30U)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27U)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31U);
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

__extension__ using uint128 = unsigned __int128;

/// Hashes a master seed and a path of indices into an independent stream seed.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t master,
                                                  std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t h = mix64(master + kGolden);
    for (std::uint64_t v : path) {
        h = mix64(std::rotl(h, 23) ^ mix64(v + kGolden));
    }
    return h;
}

/// xoshiro256** with the convenience draws the simulators need.
///
/// Satisfies UniformRandomBitGenerator so it can drive <random> distributions.
/// Single owner: never share one instance between threads.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0) noexcept : seed_(seed) {
        std::uint64_t s = seed;
        for (auto& word : state_) {
            s += kGolden;
            word = mix64(s);
        }
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        const std::uint64_t result = std::rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17U;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = std::rotl(state_[3], 45);
        return result;
    }

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

    bool bit() noexcept { return ((*this)() >> 63U) != 0; }

    /// Uniform integer in [0, bound). Lemire's multiply-shift with rejection.
    std::uint64_t below(std::uint64_t bound) {
        if (bound == 0) {
            throw std::invalid_argument("Rng::below: bound must be positive");
        }
        uint128 m = static_cast<uint128>((*this)()) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                m = static_cast<uint128>((*this)()) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64U);
    }

    /// Uniform integer in [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        if (hi < lo) {
            throw std::invalid_argument("Rng::uniform_int: empty range");
        }
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        if (span == 0) {
            return static_cast<std::int64_t>((*this)());
        }
        return lo + static_cast<std::int64_t>(below(span));
    }

    /// Uniform real in the open interval (0, 1).
    double uniform01() noexcept {
        // 53 random mantissa bits, shifted by half an ulp away from zero.
        return (static_cast<double>((*this)() >> 11U) + 0.5) * 0x1.0p-53;
    }

    bool bernoulli(double p) noexcept {
        if (p <= 0.0) {
            return false;
        }
        if (p >= 1.0) {
            return true;
        }
        return uniform01() < p;
    }

    std::uint64_t binomial(std::uint64_t trials, double p) {
        if (p <= 0.0 || trials == 0) {
            return 0;
        }
        if (p >= 1.0) {
            return trials;
        }
        std::binomial_distribution<std::uint64_t> dist(trials, p);
        return dist(*this);
    }

private:
    std::uint64_t seed_;
    std::uint64_t state_[4]{};
};

} // namespace dynbv
