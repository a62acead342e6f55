#pragma once

#include <cstdint>
#include <utility>

namespace vmtoc {

/// SplitMix64 state. Carried by value; every draw returns the advanced state.
struct RngState {
    std::uint64_t s = 0;

    friend constexpr bool operator==(RngState, RngState) = default;
};

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;
inline constexpr std::uint64_t kStreamOffset = 0xD1B54A32D192ED03ULL;

constexpr std::pair<RngState, std::uint64_t> next_rand(RngState state) noexcept
{
    state.s += kGoldenGamma;
    std::uint64_t z = state.s;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return {state, z ^ (z >> 31)};
}

/// Uniform on [-1, 1) from the top 53 bits.
constexpr double uniform_pm1(std::uint64_t z) noexcept
{
    return 2.0 * (static_cast<double>(z >> 11) * 0x1.0p-53) - 1.0;
}

/// +1 when the top bit is set, -1 otherwise.
constexpr double bernoulli_pm1(std::uint64_t z) noexcept
{
    return (z >> 63) != 0 ? 1.0 : -1.0;
}

/// Initial state of the k-th independent stream derived from a seed.
constexpr RngState trial_stream(std::uint64_t seed, std::uint64_t k) noexcept
{
    return RngState{next_rand(RngState{seed ^ (kStreamOffset + k * kGoldenGamma)}).second};
}

} // namespace vmtoc
