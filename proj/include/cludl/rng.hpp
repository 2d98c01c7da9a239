#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace cludl {

// splitmix64 step; used both as a stream splitter and as a seed scrambler.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derives an independent child seed from (master, stream). Streams are just
// counters; the scrambling makes nearby counters produce unrelated seeds.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t s = master ^ (0x6a09e667f3bcc909ULL + stream * 0x2545f4914f6cdd1dULL);
    splitmix64(s);
    return splitmix64(s);
}

// Deterministic RNG wrapper. Normal draws use plain Box-Muller on explicit
// 53-bit uniforms so the byte stream does not depend on the standard
// library's distribution implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // Uniform on (0, 1]; never returns 0, so log() below is safe.
    double uniform() {
        return static_cast<double>((eng_() >> 11) + 1) * 0x1.0p-53;
    }

    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    // Uniform integer in [0, bound) by rejection; bound must be positive.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return x % bound;
    }

    std::mt19937_64& engine() { return eng_; }

  private:
    std::mt19937_64 eng_;
};

} // namespace cludl
