#pragma once

#include <cstdint>

namespace affharm {

// SplitMix64. Counter-based (output i is a pure function of state0 + i*gamma),
// which is what makes per-trajectory streams reproducible under any worker
// count: trajectory i always consumes the stream derived from (seed, i).
struct SplitMix64 {
    uint64_t state = 0;

    explicit SplitMix64(uint64_t s = 0) : state(s) {}

    static uint64_t mix(uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    uint64_t next() {
        state += 0x9e3779b97f4a7c15ULL;
        return mix(state);
    }

    // uniform in [0,1)
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // uniform in {0,...,n-1}; n is tiny here (generator counts), the
    // multiply-shift map keeps it branch-free and deterministic
    uint32_t next_below(uint32_t n) {
        return static_cast<uint32_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
    }
};

// stream for trajectory `index` of the experiment keyed by `seed`
inline SplitMix64 trajectory_stream(uint64_t seed, uint64_t index) {
    uint64_t h = SplitMix64::mix(seed ^ 0x5851f42d4c957f2dULL);
    h ^= SplitMix64::mix(index + 0x14057b7ef767814fULL);
    return SplitMix64(h);
}

// sub-seed for a named evaluation (e.g. one harmonic-estimate point), so
// distinct points own disjoint stream families
inline uint64_t derive_seed(uint64_t seed, uint64_t salt) {
    return SplitMix64::mix(seed + 0x9e3779b97f4a7c15ULL * (salt | 1));
}

inline uint64_t fnv1a64(const void* data, size_t n) {
    const unsigned char* b = static_cast<const unsigned char*>(data);
    uint64_t h = 14695981039346656037ULL;
    for (size_t i = 0; i < n; ++i) {
        h ^= b[i];
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace affharm
