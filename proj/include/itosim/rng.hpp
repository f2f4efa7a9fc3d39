#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace itosim {

/// Philox4x32-10 block: a keyed bijection on 128-bit counters.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32(PhiloxCounter counter, PhiloxKey key) noexcept;

// Channel ids at or above this value name auxiliary (non-Wiener) streams,
// e.g. Levy-Fourier coefficients drawn per channel pair.
inline constexpr std::uint32_t kAuxChannelBase = 0x8000;
// Level ids at or above this value name per-step bridge subdivisions of
// study level (id - base), as opposed to hierarchy refinement levels.
inline constexpr std::uint32_t kSubdivisionLevelBase = 0x4000;

/// Coordinates of one random stream.
///
/// Streams are keyed by master_seed and occupy the Philox counter range
/// [replicate | channel:level | node | draw], so distinct paths own
/// disjoint counter ranges and never share a block. Field limits:
/// replicate and node < 2^32, channel and level < 2^16.
struct SeedPath {
    std::uint64_t master_seed = 0;
    std::uint64_t replicate = 0;
    std::uint32_t channel = 0;
    std::uint32_t level = 0;
    std::uint64_t node = 0;

    SeedPath with_channel(std::uint32_t c) const { SeedPath s = *this; s.channel = c; return s; }
    SeedPath with_level(std::uint32_t l) const { SeedPath s = *this; s.level = l; return s; }
    SeedPath with_node(std::uint64_t n) const { SeedPath s = *this; s.node = n; return s; }

    friend bool operator==(const SeedPath&, const SeedPath&) = default;
};

/// Throws ConfigError if a field exceeds its bit budget.
void validate(const SeedPath& path);

/// Standard normal draws from one SeedPath stream.
///
/// Each Philox block yields two 53-bit uniforms, turned into a pair of
/// normals by the Box-Muller transform (u1 in (0,1], u2 in [0,1)).
/// Output depends only on the SeedPath and the draw position.
class NormalStream {
public:
    explicit NormalStream(const SeedPath& path);

    double next();
    void fill(std::span<double> out);
    /// Scaled draws: out[i] = scale * N(0,1).
    void fill(std::span<double> out, double scale);

    /// Uniform in [0,1) with 53-bit resolution. Consumes a whole block.
    double uniform();

private:
    void refill();

    PhiloxKey key_{};
    PhiloxCounter counter_{};
    std::uint32_t block_ = 0;
    double spare_first_ = 0.0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace itosim
