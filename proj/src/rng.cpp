#include "sspd/rng.hpp"

#include <cmath>

#include "sspd/errors.hpp"

namespace sspd::rng {

namespace {
constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;
} // namespace

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::array<std::uint32_t, 4> philox4x32_10(const std::array<std::uint32_t, 4>& counter,
                                           const std::array<std::uint32_t, 2>& key) {
    std::array<std::uint32_t, 4> c = counter;
    std::uint32_t k0 = key[0], k1 = key[1];
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * c[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * c[2];
        const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
        const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
        c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
        k0 += kW0;
        k1 += kW1;
    }
    return c;
}

RandomStream::RandomStream(std::uint64_t seed, std::string_view label)
    : seed_(seed), label_(label) {
    key_ = {static_cast<std::uint32_t>(seed),
            static_cast<std::uint32_t>(seed >> 32)};
    const std::uint64_t lh = fnv1a64(label);
    label_hash_ = static_cast<std::uint32_t>(lh ^ (lh >> 32));
}

void RandomStream::refill() {
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
        label_hash_, 0u};
    buffer_ = philox4x32_10(ctr, key_);
    ++block_;
    buffer_pos_ = 0;
}

std::uint32_t RandomStream::next_u32() {
    if (buffer_pos_ >= 4) refill();
    return buffer_[buffer_pos_++];
}

double RandomStream::uniform() {
    // 53 random bits mapped to (0, 1): (m + 0.5) / 2^53 never hits 0 or 1.
    const std::uint64_t hi = next_u32();
    const std::uint64_t lo = next_u32();
    const std::uint64_t m = ((hi << 32) | lo) >> 11;
    return (static_cast<double>(m) + 0.5) * 0x1.0p-53;
}

double RandomStream::exponential(double rate) {
    if (!(rate > 0.0))
        throw NumericError("exponential draw requires a positive rate");
    return -std::log(uniform()) / rate;
}

double RandomStream::gaussian() {
    if (have_cached_gaussian_) {
        have_cached_gaussian_ = false;
        return cached_gaussian_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    cached_gaussian_ = r * std::sin(theta);
    have_cached_gaussian_ = true;
    return r * std::cos(theta);
}

} // namespace sspd::rng
