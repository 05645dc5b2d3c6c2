#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace fair {

/// SplitMix64 finalizer. Used both for seed derivation and as a cheap hash.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/**
 * Derives a child seed from a master seed and a path of integer tags.
 *
 * Rule: h = splitmix64(master); for each tag t, h = splitmix64(h ^ splitmix64(t)).
 * Distinct tag paths give statistically independent streams, which is how the
 * harness keeps training and evaluation randomness disjoint.
 */
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags) noexcept {
    std::uint64_t h = splitmix64(master);
    for (auto t : tags) {
        h = splitmix64(h ^ splitmix64(t));
    }
    return h;
}

/**
 * Seeded random source. The engine (mt19937_64) is fully specified by the
 * standard; the conversions to real and index are done by hand so results are
 * bit-identical across standard library implementations.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    void seed(std::uint64_t s) { engine_.seed(s); }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform in [0, n). n must be positive.
    std::size_t index(std::size_t n) {
        auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
        return i < n ? i : n - 1;
    }

    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
};

} // namespace fair
