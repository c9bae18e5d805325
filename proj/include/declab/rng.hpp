#pragma once

#include <cstdint>
#include <random>

#include "declab/common.hpp"

namespace declab {

// splitmix64; used to derive stream seeds so that (seed, index) pairs give
// independent, platform-stable streams.
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t mix_seed(uint64_t a, uint64_t b) { return mix64(a ^ mix64(b)); }
inline uint64_t mix_seed(uint64_t a, uint64_t b, uint64_t c) {
    return mix64(mix_seed(a, b) ^ mix64(c));
}

// mt19937_64 with hand-rolled variate conversions.  The standard pins the
// engine's output sequence, and avoiding std distributions keeps results
// identical across library implementations.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(mix64(seed)) {}

    double uniform() {  // [0, 1)
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    uint64_t integer(uint64_t n) {  // [0, n)
        require(n > 0, "Rng::integer: empty range");
        uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x;
        do { x = eng_(); } while (x >= limit);
        return x % n;
    }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do { u1 = uniform(); } while (u1 <= 0.0);
        u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925287 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    Complex unit_phase() {
        double a = 6.283185307179586476925287 * uniform();
        return {std::cos(a), std::sin(a)};
    }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace declab
