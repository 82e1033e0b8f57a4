#include "bundlescope/rng.hpp"

#include <cmath>

namespace bundlescope {

uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

uint64_t derive_seed(uint64_t seed, uint64_t index) {
    uint64_t st = seed ^ (0x9e3779b97f4a7c15ULL * (index + 1));
    return splitmix64(st);
}

uint64_t hash_seed(uint64_t seed, std::string_view key) {
    uint64_t h = 14695981039346656037ULL;  // FNV-1a 64
    for (unsigned char c : key) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    uint64_t st = seed ^ h;
    return splitmix64(st);
}

Rng::Rng(uint64_t seed) {
    uint64_t st = seed;
    for (auto& w : s_) w = splitmix64(st);
}

static inline uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

uint64_t Rng::next_u64() {
    // xoshiro256++
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

double Rng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

uint64_t Rng::below(uint64_t bound) {
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
    uint64_t lo = static_cast<uint64_t>(m);
    if (lo < bound) {
        uint64_t t = (0ULL - bound) % bound;
        while (lo < t) {
            m = static_cast<unsigned __int128>(next_u64()) * bound;
            lo = static_cast<uint64_t>(m);
        }
    }
    return static_cast<uint64_t>(m >> 64);
}

double Rng::normal() {
    double u1 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
}

uint64_t Rng::poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    if (lambda <= 60.0) {
        const double limit = std::exp(-lambda);
        uint64_t k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= next_double();
        } while (p > limit);
        return k - 1;
    }
    const double x = lambda + std::sqrt(lambda) * normal();
    return x <= 0.0 ? 0 : static_cast<uint64_t>(std::llround(x));
}

void Rng::shuffle_doubles(std::span<double> v) {
    for (size_t i = v.size(); i > 1; --i) {
        size_t j = static_cast<size_t>(below(i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace bundlescope
