#include "itosim/rng.hpp"

#include <cmath>
#include <numbers>

#include "itosim/error.hpp"

namespace itosim {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

constexpr double kTwoPow53Inv = 1.0 / 9007199254740992.0;

}  // namespace

PhiloxCounter philox4x32(PhiloxCounter c, PhiloxKey k) noexcept {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            k[0] += kWeyl0;
            k[1] += kWeyl1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, c[0], hi0, lo0);
        mulhilo(kMul1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
    return c;
}

void validate(const SeedPath& p) {
    if (p.replicate >> 32) throw ConfigError("seed path: replicate index exceeds 2^32");
    if (p.node >> 32) throw ConfigError("seed path: node index exceeds 2^32");
    if (p.channel >> 16) throw ConfigError("seed path: channel exceeds 2^16");
    if (p.level >> 16) throw ConfigError("seed path: level exceeds 2^16");
}

NormalStream::NormalStream(const SeedPath& p) {
    validate(p);
    key_ = {static_cast<std::uint32_t>(p.master_seed), static_cast<std::uint32_t>(p.master_seed >> 32)};
    counter_ = {static_cast<std::uint32_t>(p.replicate), (p.channel << 16) | p.level,
                static_cast<std::uint32_t>(p.node), 0u};
}

void NormalStream::refill() {
    PhiloxCounter c = counter_;
    c[3] = block_++;
    const PhiloxCounter r = philox4x32(c, key_);
    const std::uint64_t a = (static_cast<std::uint64_t>(r[0]) << 32) | r[1];
    const std::uint64_t b = (static_cast<std::uint64_t>(r[2]) << 32) | r[3];
    const double u1 = static_cast<double>((a >> 11) + 1) * kTwoPow53Inv;
    const double u2 = static_cast<double>(b >> 11) * kTwoPow53Inv;
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    spare_first_ = radius * std::cos(angle);
}

double NormalStream::next() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    refill();
    return spare_first_;
}

void NormalStream::fill(std::span<double> out) {
    for (double& v : out) v = next();
}

void NormalStream::fill(std::span<double> out, double scale) {
    for (double& v : out) v = scale * next();
}

double NormalStream::uniform() {
    has_spare_ = false;
    PhiloxCounter c = counter_;
    c[3] = block_++;
    const PhiloxCounter r = philox4x32(c, key_);
    const std::uint64_t a = (static_cast<std::uint64_t>(r[0]) << 32) | r[1];
    return static_cast<double>(a >> 11) * kTwoPow53Inv;
}

}  // namespace itosim
