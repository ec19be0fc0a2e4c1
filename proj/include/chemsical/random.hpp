#pragma once

#include <cstdint>
#include <limits>

namespace chemsical {

/// SplitMix64 output finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct RandomSeed {
    std::uint64_t base_seed = 0;
    std::uint64_t stream_index = 0;

    friend bool operator==(const RandomSeed&, const RandomSeed&) = default;
};

/// Derives an independent seed for a labelled sub-experiment (e.g. one input
/// value of a sweep).
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t label) noexcept {
    return mix64(base ^ mix64(label + 0x6a09e667f3bcc909ULL));
}

/// Counter-based generator: the i-th output is a pure function of
/// (base_seed, stream_index, i), so streams can be generated in any order.
class StreamRng {
public:
    using result_type = std::uint64_t;

    constexpr explicit StreamRng(RandomSeed seed) noexcept
        : key_(mix64(seed.base_seed ^ mix64(seed.stream_index + 0x9e3779b97f4a7c15ULL))) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept {
        ++counter_;
        return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
    }

    /// Uniform on (0, 1].
    constexpr double uniform_open0() noexcept {
        return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
    }
    /// Uniform on [0, 1).
    constexpr double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    constexpr std::uint64_t position() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace chemsical
