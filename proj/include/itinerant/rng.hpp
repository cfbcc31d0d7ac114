#pragma once

// Deterministic random number generation. Distributions are implemented
// explicitly (bit-shift uniform, Box-Muller normal) instead of the <random>
// distribution templates, whose output is implementation defined. Identical
// seeds therefore give identical streams across standard libraries.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace itinerant {

class Rng {
public:
    explicit Rng(std::uint64_t seed)
        : base_(seed), gen_(splitmix(splitmix(seed))) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller, one spare cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 == 0.0)
            u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    // index in [0, n)
    int index(int n) {
        return static_cast<int>(uniform() * static_cast<double>(n)) % n;
    }

    // Independent substream, e.g. one per network component or per trial.
    // Forking is a pure function of (parent seed, stream id).
    Rng fork(std::uint64_t stream) const {
        return Rng(splitmix(base_ ^ splitmix(stream + 0x51ed270b7a14c947ull)));
    }

private:
    static std::uint64_t splitmix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

    std::uint64_t base_;
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace itinerant
