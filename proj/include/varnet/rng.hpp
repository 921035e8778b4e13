#pragma once
// Portable, seedable random number generation.
//
// Every stochastic component of the library draws from the generator defined
// here so that runs are reproducible from a single master seed and so that
// ports to other languages can match streams bit for bit. The scheme is:
//
//   * splitmix64 — seed expansion (Steele, Lea, Flood 2014).
//   * xoshiro256++ — the stream generator (Blackman, Vigna 2019), seeded by
//     four successive splitmix64 outputs of the 64-bit seed.
//   * uniform01() takes the top 53 bits of the next output, giving a double
//     in [0, 1); uniform_pos01() maps to (0, 1] for use under log().
//   * normal() is the trigonometric Box-Muller transform on two
//     uniform_pos01()/uniform01() draws; values are delivered in pairs with
//     the second cached.
//   * uniform_int(n) is next_u64() mod n. The modulo bias is below n / 2^64
//     and irrelevant at the sample sizes used here.
//   * derive_seed(master, label) = one splitmix64 step applied to
//     master XOR fnv1a64(label). Distinct labels give independent streams.

#include <cstdint>
#include <cmath>
#include <string_view>

namespace varnet {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

// Stable hash-split of a master seed into a named substream.
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view stream_label) {
    std::uint64_t state = master_seed ^ fnv1a64(stream_label);
    return splitmix64_next(state);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64_next(sm);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // [0, 1), 53-bit resolution
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // (0, 1]
    double uniform_pos01() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Standard normal via Box-Muller; consumes two uniforms per pair.
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = uniform_pos01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        cached_ = r * std::sin(theta);
        have_cached_ = true;
        return r * std::cos(theta);
    }

    // Uniform index in {0, ..., n-1}; n must be positive.
    std::size_t uniform_int(std::size_t n) {
        return static_cast<std::size_t>(next_u64() % static_cast<std::uint64_t>(n));
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4]{};
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace varnet
