#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace fdreg {

// SplitMix64: a tiny, well-documented 64-bit generator (Steele, Lea & Flood,
// "Fast splittable pseudorandom number generators"). Chosen because sub-streams
// can be derived as a pure function of (seed, index), which keeps concurrent
// simulation runs reproducible regardless of scheduling.
struct Rng {
    std::uint64_t seed = 0;    // the seed this stream was created from
    std::uint64_t state = 0;   // current position

    Rng() : Rng(0) {}
    explicit Rng(std::uint64_t s) : seed(s), state(s) {}

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ull;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t next_u64() {
        state += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Derived sub-stream: a pure function of the original seed and the index,
    // independent of how much this stream has been consumed.
    Rng substream(std::uint64_t index) const {
        std::uint64_t s = mix(seed ^ mix(index + 0x632BE59BD9B4E019ull));
        return Rng(s);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        if (lo > hi) throw std::invalid_argument("Rng::uniform: lo > hi");
        return lo + (hi - lo) * next_double();
    }

    // Standard normal via Box-Muller. Two uniforms are consumed per draw and
    // nothing is cached, so the consumption pattern is a fixed function of the
    // number of calls (copies of an Rng stay in lockstep).
    double next_gaussian() {
        double u1 = 1.0 - next_double();  // (0, 1]: keeps the log finite
        double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    double gaussian(double mu, double sigma) {
        if (sigma < 0.0) throw std::invalid_argument("Rng::gaussian: negative sigma");
        // The draw is consumed even when sigma is 0 so that datasets generated
        // with and without noise from the same seed share all other draws.
        double z = next_gaussian();
        return mu + sigma * z;
    }

    // Uniform integer in [0, n) without modulo bias (rejection sampling).
    std::uint64_t next_below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("Rng::next_below: n == 0");
        std::uint64_t threshold = (0ull - n) % n;  // 2^64 mod n
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }
};

}  // namespace fdreg
