#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace jcpa {

/// xoshiro256++ with splitmix64 seeding.
///
/// Chosen over std::mt19937 so that datasets are bit-portable across
/// implementations and platforms: the generator, the seeding procedure and the
/// double conversion below are all fully specified here.
///
/// Substream contract: instance k of a dataset is drawn from
///   Rng(mix(config.seed, salt(split), k))
/// so (seed, split, index) uniquely determines every instance and train/test
/// splits sharing one topology seed never overlap.
class Rng {
public:
    explicit Rng(uint64_t seed) {
        // splitmix64 expansion of the seed into the 256-bit state.
        uint64_t x = seed;
        for (auto& si : s_) si = splitmix64(x);
    }

    static uint64_t splitmix64(uint64_t& x) {
        x += 0x9E3779B97F4A7C15ULL;
        uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// One splitmix64 round per word, chained: order-sensitive and avalanching.
    static uint64_t mix(uint64_t a, uint64_t b) {
        uint64_t x = a;
        uint64_t h = splitmix64(x);
        x = h ^ b;
        return splitmix64(x);
    }

    static uint64_t salt(std::string_view tag) {
        // FNV-1a over the tag bytes.
        uint64_t h = 0xCBF29CE484222325ULL;
        for (char c : tag) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001B3ULL;
        }
        return h;
    }

    uint64_t next() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (deterministic, portable; no cached spare
    /// so the draw count per call is fixed).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return r * std::cos(6.283185307179586476925286766559 * u2);
    }

    /// Uniform integer in [0, n).
    uint64_t below(uint64_t n) {
        // Lemire-style rejection to avoid modulo bias.
        uint64_t x = next();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        uint64_t low = static_cast<uint64_t>(m);
        if (low < n) {
            const uint64_t threshold = -n % n;
            while (low < threshold) {
                x = next();
                m = static_cast<__uint128_t>(x) * n;
                low = static_cast<uint64_t>(m);
            }
        }
        return static_cast<uint64_t>(m >> 64);
    }

private:
    static uint64_t rotl(uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

    uint64_t s_[4];
};

}  // namespace jcpa
