#pragma once

#include <cstdint>
#include <random>

namespace streamcap {

// Substream derivation and uniform mapping are pinned here so simulation
// reports are reproducible across platforms and standard libraries.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline uint64_t substream_seed(uint64_t seed, uint64_t run_index) {
    return splitmix64(seed ^ (0x9E3779B97F4A7C15ull * (run_index + 1)));
}

class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // uniform in [0,1) with 53 random bits; std::uniform_real_distribution is
    // not bit-identical across library implementations, this mapping is
    double next_double() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace streamcap
