#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace bundlescope {

// All randomness in the repository flows through this generator. The
// algorithm (xoshiro256++ seeded via SplitMix64) and the seed-derivation
// rules below are part of the public contract: rerunning with the same
// top-level seed is bit-identical regardless of platform, scheduling or
// thread count. std::* distributions are avoided on purpose; their output
// is implementation-defined.

// SplitMix64 step; also the basis of derive_seed/hash_seed.
uint64_t splitmix64(uint64_t& state);

// Child seed for replicate/worker `index` of stream `seed`.
uint64_t derive_seed(uint64_t seed, uint64_t index);

// Child seed keyed by a string (e.g. per-word streams): FNV-1a of the
// bytes folded into the seed, then one SplitMix64 scramble.
uint64_t hash_seed(uint64_t seed, std::string_view key);

class Rng {
public:
    explicit Rng(uint64_t seed);

    uint64_t next_u64();

    // 53-bit mantissa uniform in [0, 1).
    double next_double();

    // Unbiased integer in [0, bound); bound > 0 (Lemire rejection).
    uint64_t below(uint64_t bound);

    // Standard normal via Box-Muller (no state carried between calls).
    double normal();

    // Poisson draw; Knuth product method for small lambda, rounded
    // normal approximation above 60 where the exact method is slow.
    uint64_t poisson(double lambda);

    // Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }
    void shuffle_doubles(std::span<double> v);

private:
    uint64_t s_[4];
};

// stats_core PermutationPlan: replicate_seed(i) = derive_seed(seed, i).
// Same plan => identical replicate streams in any evaluation order.
struct PermutationPlan {
    uint64_t seed = 0;
    size_t replicates = 0;

    uint64_t replicate_seed(size_t index) const { return derive_seed(seed, index); }
};

}  // namespace bundlescope
