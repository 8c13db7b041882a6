#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace visa {

// Deterministic RNG used everywhere in place of std::uniform_*_distribution,
// whose output is not pinned down by the standard and differs across library
// implementations. Same seed => same stream on every platform.
class Rng {
  public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t raw() { return eng_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in {0, ..., n-1}, n >= 1. Multiply-shift; the tiny
    // modulo bias (n / 2^64) is irrelevant at our sample counts.
    int uniform_int(int n) {
        auto wide = static_cast<unsigned __int128>(eng_()) * static_cast<unsigned __int128>(n);
        return static_cast<int>(wide >> 64);
    }

    // Standard normal via Box-Muller; the second draw of each pair is cached.
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586 * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

  private:
    std::mt19937_64 eng_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

// Derives independent stream seeds from a root seed and a purpose tag, so the
// trainer can hand separate generators to env, replay, init, ... without the
// streams aliasing. splitmix64 finalizer over an FNV-1a hash of the tag.
inline uint64_t derive_seed(uint64_t root, std::string_view tag, uint64_t index = 0) {
    uint64_t h = 1469598103934665603ull;
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    uint64_t z = root + 0x9e3779b97f4a7c15ull * (h ^ (index + 1));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace visa
