#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace egohand {

/// Stateless counter-based generator. Every draw is a pure function of
/// (seed, key...), so generation order and threading never change results.
///
/// bits(seed, k0..kn):
///   h = mix(seed + 0x9E3779B97F4A7C15)
///   for each key word k_i:  h = mix(h ^ mix(k_i + (i + 1) * 0x9E3779B97F4A7C15))
/// where mix is the SplitMix64 finalizer. Uniforms take the top 53 bits;
/// normals use Box-Muller on two consecutive draw indices.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    static constexpr std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t bits(std::initializer_list<std::uint64_t> key) const {
        constexpr std::uint64_t golden = 0x9E3779B97F4A7C15ULL;
        std::uint64_t h = mix(seed_ + golden);
        std::uint64_t i = 1;
        for (auto k : key) h = mix(h ^ mix(k + i++ * golden));
        return h;
    }

    /// Uniform on [0, 1).
    double uniform(std::initializer_list<std::uint64_t> key) const {
        return static_cast<double>(bits(key) >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi, std::initializer_list<std::uint64_t> key) const {
        return lo + (hi - lo) * uniform(key);
    }

    /// Standard normal. The last key word is doubled to index the two uniforms.
    double normal(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d, std::uint64_t e) const {
        const double u1 = 1.0 - uniform({a, b, c, d, 2 * e});  // (0, 1]
        const double u2 = uniform({a, b, c, d, 2 * e + 1});
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
};

}  // namespace egohand
