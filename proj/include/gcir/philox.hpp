#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Output is a
// pure function of (key, counter), so any draw can be regenerated from its
// coordinates without replaying a stream.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace gcir {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

constexpr PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept {
    constexpr std::uint32_t kM0 = 0xD2511F53u;
    constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u;
    constexpr std::uint32_t kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kW0;
        key[1] += kW1;
    }
    return ctr;
}

// Standard normal draws addressed by (path, index) under a 64-bit seed.
class GaussianField {
public:
    explicit GaussianField(std::uint64_t seed) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

    // One Philox block yields two 53-bit uniforms and, via Box-Muller, the
    // normals for indices 2j and 2j+1.
    [[nodiscard]] std::array<double, 2> pair(std::uint64_t path, std::uint64_t block) const noexcept {
        const PhiloxCounter ctr{static_cast<std::uint32_t>(block),
                                static_cast<std::uint32_t>(block >> 32),
                                static_cast<std::uint32_t>(path),
                                static_cast<std::uint32_t>(path >> 32)};
        const PhiloxCounter out = philox4x32_10(ctr, key_);
        const double u1 = to_open_unit((static_cast<std::uint64_t>(out[0]) << 32) | out[1]);
        const double u2 = to_open_unit((static_cast<std::uint64_t>(out[2]) << 32) | out[3]);
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        return {radius * std::cos(angle), radius * std::sin(angle)};
    }

    [[nodiscard]] double normal(std::uint64_t path, std::uint64_t index) const noexcept {
        return pair(path, index / 2)[index % 2];
    }

private:
    // (0, 1): never returns 0, so log() above is finite.
    static double to_open_unit(std::uint64_t bits) noexcept {
        return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
    }

    PhiloxKey key_;
};

}  // namespace gcir
