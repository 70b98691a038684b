#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace ifs {

//---------------------------------------------------------------------------//
/*!
 * Counter-based generator.
 *
 * The value at position c of the stream keyed by k is the SplitMix64 output
 * finalize(k + (c + 1) * 0x9e3779b97f4a7c15), so any position can be read
 * without touching the previous ones. Streams for parallel trials are keyed by
 * stream_key(base_seed, trial), which makes every trial independent of
 * scheduling and of the number of workers.
 */
inline constexpr std::uint64_t splitmix_gamma = 0x9e3779b97f4a7c15ULL;

inline constexpr std::uint64_t splitmix_finalize(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t counter_value(std::uint64_t key, std::uint64_t counter) noexcept
{
    return splitmix_finalize(key + (counter + 1) * splitmix_gamma);
}

/// Key of the sub-stream with the given index, derived from a base seed.
inline constexpr std::uint64_t stream_key(std::uint64_t base_seed, std::uint64_t index) noexcept
{
    return splitmix_finalize(splitmix_finalize(base_seed ^ 0x243f6a8885a308d3ULL) +
                             (index + 1) * 0xd1b54a32d192ed03ULL);
}

/// Uniform double in [0, 1) from the top 53 bits.
inline constexpr double to_unit_interval(std::uint64_t bits) noexcept
{
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Sequential view of a counter stream; satisfies UniformRandomBitGenerator.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0) noexcept
        : key_(key), counter_(counter)
    {
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    result_type operator()() noexcept { return counter_value(key_, counter_++); }

    double uniform() noexcept { return to_unit_interval((*this)()); }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Standard normal deviate (Box-Muller, one value per call).
    double normal() noexcept
    {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 <= 0.0) {
            u1 = 0x1.0p-53;
        }
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t position() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

}  // namespace ifs
