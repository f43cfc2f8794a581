#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace qtomo {

/// splitmix64 step; used to derive independent child seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Child seed for a (seed, stream_index) pair. Streams are independent of the
/// order in which they are consumed, so parallel evaluation stays reproducible.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream_index) {
    std::uint64_t s = seed;
    splitmix64(s);
    s ^= 0x517cc1b727220a95ULL * (stream_index + 1);
    return splitmix64(s);
}

/// Deterministic uniform double in [0,1) from the top 53 bits of an mt19937_64
/// draw. The engine's output sequence is fixed by the standard, so results are
/// portable across platforms.
inline double uniform01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Multinomial sample over `probabilities` (need not be exactly normalized);
/// returns per-bin counts. Plain CDF inversion per draw.
std::vector<long> multinomial_counts(const std::vector<double>& probabilities,
                                     long shots, std::mt19937_64& gen);

}  // namespace qtomo
