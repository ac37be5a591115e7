#pragma once

#include <cstdint>

namespace bes {

// Counter-based generator: every draw is a pure function of (seed, stream,
// counter), so parallel execution order cannot change results.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : seed_(seed), stream_(stream) {}

    static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream,
                             std::uint64_t counter) {
        std::uint64_t z = seed;
        z ^= stream * 0x9e3779b97f4a7c15ULL + 0x7f4a7c15ULL;
        z += counter * 0xbf58476d1ce4e5b9ULL + 0x94d049bb133111ebULL;
        // splitmix64 finalizer, applied twice
        for (int round = 0; round < 2; ++round) {
            z += 0x9e3779b97f4a7c15ULL;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            z = z ^ (z >> 31);
        }
        return z;
    }

    std::uint64_t next_u64() { return mix(seed_, stream_, counter_++); }

    /// Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// Uniform integer in [lo, hi] (small ranges only).
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
    }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
};

} // namespace bes
