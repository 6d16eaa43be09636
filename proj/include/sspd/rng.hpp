#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace sspd::rng {

/// FNV-1a 64-bit hash (used for stream labels and config hashing).
std::uint64_t fnv1a64(std::string_view data);

/// Philox4x32-10 counter-based block function. Maps a 128-bit counter and a
/// 64-bit key to 128 bits of output; stateless and trivially parallel.
std::array<std::uint32_t, 4> philox4x32_10(const std::array<std::uint32_t, 4>& counter,
                                           const std::array<std::uint32_t, 2>& key);

/// Deterministic random stream: a (seed, label) pair selects an independent
/// Philox4x32-10 sequence. The same pair always reproduces the same draws,
/// on any platform, independent of other streams.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::string_view label);

    /// Next 32 random bits.
    std::uint32_t next_u32();

    /// Uniform double in the open interval (0, 1), 53-bit resolution.
    double uniform();

    /// Exponential waiting time with the given rate (per unit time).
    double exponential(double rate);

    /// Standard normal deviate (Box-Muller, cached pair).
    double gaussian();

    std::uint64_t seed() const { return seed_; }
    const std::string& label() const { return label_; }

private:
    void refill();

    std::uint64_t seed_ = 0;
    std::string label_;
    std::array<std::uint32_t, 2> key_{};
    std::uint64_t block_ = 0;
    std::uint32_t label_hash_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int buffer_pos_ = 4; // empty
    bool have_cached_gaussian_ = false;
    double cached_gaussian_ = 0.0;
};

} // namespace sspd::rng
