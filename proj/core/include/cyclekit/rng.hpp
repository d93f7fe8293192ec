#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace cyclekit {

// SplitMix64 step. Used to expand seeds and to build keyed counter streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derive an independent stream seed from a parent seed and a stream tag.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream * 0x9e3779b97f4a7c15ULL + 1));
}

// Deterministic RNG. The engine is std::mt19937_64, which is specified
// bit-for-bit by the standard; the mappings below are our own so that
// results never depend on library distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Integer in [0, n). Multiply-shift map; bias is on the order of 2^-64.
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    // Double in [0, 1) with 53 random bits.
    double real() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * real(); }

    // Standard normal via Box-Muller; the spare value is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = real();
        double u2 = real();
        while (u1 <= 0.0) u1 = real();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    bool coin() { return (next() >> 63) != 0; }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Keyed counter stream: a pure function of (seed, a, b, c, d). Dropout masks
// use this so that the mask for a given element is identical in every thread
// layout and chunk schedule.
inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t a,
                                  std::uint64_t b, std::uint64_t c,
                                  std::uint64_t d) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ splitmix64(a + 0x100000001b3ULL));
    h = splitmix64(h ^ splitmix64(b + 0xcbf29ce484222325ULL));
    h = splitmix64(h ^ splitmix64(c + 0x27d4eb2f165667c5ULL));
    h = splitmix64(h ^ splitmix64(d + 0x165667b19e3779f9ULL));
    return h;
}

inline double counter_real(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                           std::uint64_t c, std::uint64_t d) {
    return static_cast<double>(counter_hash(seed, a, b, c, d) >> 11) * 0x1.0p-53;
}

}  // namespace cyclekit
