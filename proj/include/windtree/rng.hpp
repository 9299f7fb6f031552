#pragma once
#include <cstdint>

namespace windtree {

/// Counter-based generator (splitmix64 finalizer over an affine counter).
///
/// Each (seed, stream) pair yields an independent sequence, so trajectory i
/// can be handed stream i and produce identical numbers no matter which
/// worker thread runs it or in what order.  State is two words; skipping
/// ahead is O(1) by construction.
class CounterRng {
public:
    CounterRng(uint64_t seed, uint64_t stream) {
        base_ = mix(mix(seed + kGamma) + (stream + 1) * kGamma);
    }

    uint64_t next_u64() { return mix(base_ + (++n_) * kGamma); }

    /// Uniform in [0, 1) with 53 random bits.
    double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

private:
    static constexpr uint64_t kGamma = 0x9E3779B97F4A7C15ull;
    static uint64_t mix(uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
    uint64_t base_;
    uint64_t n_ = 0;
};

} // namespace windtree
