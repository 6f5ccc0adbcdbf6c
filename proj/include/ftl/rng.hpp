#pragma once

#include <bit>
#include <cmath>
#include <cstdint>

namespace ftl {

/// SplitMix64 output finalizer (Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Roles tag independent streams that belong to the same replica.
enum class StreamRole : std::uint64_t {
    simulation = 0x51,
    initial_state = 0x52,
    stationary = 0x53,
    partner = 0x54,
    probe = 0x55,
};

/// Derives the 64-bit key of the stream owned by (root seed, replica, role).
constexpr std::uint64_t derive_stream_key(std::uint64_t seed, std::uint64_t replica,
                                          StreamRole role) noexcept
{
    std::uint64_t h = mix64(seed ^ 0x6a09e667f3bcc909ULL);
    h = mix64(h ^ (replica + 0x9e3779b97f4a7c15ULL));
    h = mix64(h ^ (static_cast<std::uint64_t>(role) * 0xd1b54a32d192ed03ULL));
    return h;
}

/**
 * Counter-based splittable stream.
 *
 * The k-th output is mix64(key + k * gamma), where gamma is an odd increment
 * derived from the key, so distinct keys do not produce shifted copies of one
 * Weyl sequence. The stream is a pure function of (key, counter).
 */
class Stream {
public:
    explicit constexpr Stream(std::uint64_t key) noexcept
        : key_(key), gamma_(make_gamma(key))
    {
    }

    static constexpr Stream for_replica(std::uint64_t seed, std::uint64_t replica,
                                        StreamRole role) noexcept
    {
        return Stream(derive_stream_key(seed, replica, role));
    }

    constexpr std::uint64_t key() const noexcept { return key_; }
    constexpr std::uint64_t counter() const noexcept { return counter_; }

    constexpr std::uint64_t next_u64() noexcept
    {
        ++counter_;
        return mix64(key_ + counter_ * gamma_);
    }

    /// Uniform on [0, 1) with 53 random bits.
    constexpr double uniform() noexcept
    {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform on the open interval (0, 1).
    constexpr double uniform_open() noexcept
    {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Exponential holding time, -ln(1 - u) / rate with u in [0, 1).
    double exponential(double rate) noexcept { return -std::log1p(-uniform()) / rate; }

    /// Child stream keyed by this stream's key and a tag; does not advance this stream.
    constexpr Stream split(std::uint64_t tag) const noexcept
    {
        return Stream(mix64(key_ ^ mix64(tag + 0x2545f4914f6cdd1dULL)));
    }

private:
    static constexpr std::uint64_t make_gamma(std::uint64_t key) noexcept
    {
        std::uint64_t g = mix64(key + 0x9e3779b97f4a7c15ULL) | 1ULL;
        // Increments with few bit transitions give visibly correlated outputs.
        if (std::popcount(g ^ (g >> 1)) < 24) g ^= 0xaaaaaaaaaaaaaaaaULL;
        return g;
    }

    std::uint64_t key_;
    std::uint64_t gamma_;
    std::uint64_t counter_ = 0;
};

} // namespace ftl
