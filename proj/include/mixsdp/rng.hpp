#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>

namespace mixsdp {

/// Scrambles a 64-bit value (splitmix64 finalizer). Used to derive
/// independent substream seeds from a base seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed of the idx-th substream of `base`. Substreams are what make
/// per-trial results independent of scheduling order.
inline std::uint64_t substream_seed(std::uint64_t base, std::uint64_t idx) {
    return splitmix64(base + (idx + 1) * 0x9E3779B97F4A7C15ULL);
}

/// Standard-normal sampler: mt19937-64 with Box-Muller on 53-bit uniforms.
/// mt19937-64 is fully specified by the standard, so the same seed yields
/// the same stream on every conforming implementation; the draw order is
/// part of this type's contract (pairs are generated, the sine half is
/// cached and returned second).
class GaussianRng {
public:
    explicit GaussianRng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform01(); // (0, 1], keeps log finite
        const double u2 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    std::uint64_t raw() { return gen_(); }

    static constexpr const char* name() { return "mt19937-64/box-muller"; }

private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Fills `out` with a uniformly random unit vector (normalized Gaussian).
inline void random_unit_vector(std::span<double> out, GaussianRng& rng) {
    while (true) {
        double norm_sq = 0.0;
        for (double& x : out) {
            x = rng.gaussian();
            norm_sq += x * x;
        }
        if (norm_sq > 1e-300) {
            const double inv = 1.0 / std::sqrt(norm_sq);
            for (double& x : out) x *= inv;
            return;
        }
    }
}

} // namespace mixsdp
