#pragma once

#include <cstdint>
#include <random>

namespace uee::rng {

// splitmix64; used to derive independent sub-stream seeds from one base seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seed for sub-stream (a, b) of `base`. Trials use a = trial index and b as a
// role tag so environment, policy and shuffle randomness never alias.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
    return splitmix64(base ^ splitmix64(a + 0x51ed2701ULL) ^ splitmix64(b + 0xc2b2ae3dULL));
}

// Uniform double in [0, 1) built from the top 53 bits of the generator.
// Bypasses std::uniform_real_distribution so streams are reproducible
// independent of the standard library implementation.
inline double uniform_unit(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Uniform integer in [lo, hi], inclusive, via rejection sampling.
inline int uniform_int(std::mt19937_64& gen, int lo, int hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t draw;
    do {
        draw = gen();
    } while (draw >= limit);
    return lo + static_cast<int>(draw % span);
}

inline bool bernoulli(std::mt19937_64& gen, double p) {
    return uniform_unit(gen) < p;
}

}  // namespace uee::rng
