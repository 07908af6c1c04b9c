#ifndef SEASCAN_RNG_HPP
#define SEASCAN_RNG_HPP

#include <cmath>
#include <cstdint>

namespace seascan {

// Deterministic, platform-independent random source. The survey generator
// derives one stream per (seed, channel, cell) with splitmix64 so values do
// not depend on generation order; std::random distributions are avoided on
// purpose because their output is implementation-defined.

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t hash_combine(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    uint64_t s = seed;
    uint64_t h = splitmix64(s);
    s ^= a + 0x9e3779b97f4a7c15ULL;
    h ^= splitmix64(s);
    s ^= b + 0xc2b2ae3d27d4eb4fULL;
    h ^= splitmix64(s);
    s ^= c + 0x165667b19e3779f9ULL;
    h ^= splitmix64(s);
    return h;
}

// Uniform double in [0,1) from 53 high bits.
inline double unit_from_bits(uint64_t x) { return static_cast<double>(x >> 11) * 0x1.0p-53; }

// One-shot hashed draw, used for grid-indexed noise fields.
inline double hashed_unit(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    return unit_from_bits(hash_combine(seed, a, b, c));
}

inline double rayleigh_from_unit(double u, double sigma) {
    // Inverse CDF; u in [0,1). log1p keeps the u ~ 0 branch exact.
    return sigma * std::sqrt(-2.0 * std::log1p(-u));
}

// xoshiro256** (Blackman/Vigna), explicitly seeded via splitmix64.
class Xoshiro256 {
public:
    explicit Xoshiro256(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    uint64_t next() {
        const uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    double uniform() { return unit_from_bits(next()); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double rayleigh(double sigma) { return rayleigh_from_unit(uniform(), sigma); }
    // Integer in [0, n). Modulo bias is irrelevant at fixture scales.
    uint64_t below(uint64_t n) { return n ? next() % n : 0; }
    int range(int lo, int hi) { return lo + static_cast<int>(below(static_cast<uint64_t>(hi - lo + 1))); }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t s_[4];
};

}  // namespace seascan

#endif  // SEASCAN_RNG_HPP
