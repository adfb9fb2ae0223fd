#pragma once

// Counter-based random numbers (Philox4x32-10). Every draw is a pure
// function of (seed, stream, index, step, purpose), so results do not
// depend on scheduling.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace galerkin {

struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter c, Key k) {
        constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
        constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                k[0] += W0;
                k[1] += W1;
            }
            const std::uint64_t p0 = std::uint64_t{M0} * c[0];
            const std::uint64_t p1 = std::uint64_t{M1} * c[2];
            c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
                 static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
        }
        return c;
    }
};

/// SplitMix64 finaliser, for deriving independent seeds from labels.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return mix_seed(mix_seed(mix_seed(seed) ^ a) ^ b);
}

/// Purposes separate draws that share (stream, index, step).
enum class Purpose : std::uint32_t { initial = 0, noise = 1, test = 2 };

class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint32_t stream = 0) : seed_(seed), stream_(stream) {}

    std::uint64_t seed() const { return seed_; }
    std::uint32_t stream() const { return stream_; }
    RngStream substream(std::uint32_t stream) const { return RngStream(seed_, stream); }

    /// Two independent standard normals for slot `pair`.
    std::array<double, 2> normal_pair(std::uint32_t pair, std::uint32_t step, Purpose purpose) const {
        const auto r = raw(pair, step, purpose);
        // u1 in (0, 1], u2 in [0, 1), 53 bits each
        const double u1 = (static_cast<double>(combine(r[0], r[1]) >> 11) + 1.0) * 0x1p-53;
        const double u2 = static_cast<double>(combine(r[2], r[3]) >> 11) * 0x1p-53;
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 2.0 * std::numbers::pi * u2;
        return {rad * std::cos(ang), rad * std::sin(ang)};
    }

    /// out[j] is a standard normal determined by (j, step, purpose).
    void fill_normals(std::span<double> out, std::uint32_t step = 0, Purpose purpose = Purpose::initial) const {
        for (std::size_t j = 0; j < out.size(); j += 2) {
            const auto z = normal_pair(static_cast<std::uint32_t>(j / 2), step, purpose);
            out[j] = z[0];
            if (j + 1 < out.size()) out[j + 1] = z[1];
        }
    }

    double normal(std::uint32_t index, std::uint32_t step = 0, Purpose purpose = Purpose::initial) const {
        return normal_pair(index / 2, step, purpose)[index % 2];
    }

    /// Uniform on [0, 1).
    double uniform(std::uint32_t index, std::uint32_t step = 0, Purpose purpose = Purpose::test) const {
        const auto r = raw(index, step, purpose);
        return static_cast<double>(combine(r[0], r[1]) >> 11) * 0x1p-53;
    }

    Philox4x32::Counter raw(std::uint32_t index, std::uint32_t step, Purpose purpose) const {
        return Philox4x32::generate({stream_, index, step, static_cast<std::uint32_t>(purpose)},
                                    {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
    }

private:
    static std::uint64_t combine(std::uint32_t hi, std::uint32_t lo) { return (std::uint64_t{hi} << 32) | lo; }

    std::uint64_t seed_;
    std::uint32_t stream_;
};

}  // namespace galerkin
