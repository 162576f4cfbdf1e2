#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace vfpen {

// Finalizer of the splitmix64 generator (Vigna). Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Stream purposes. Every replication owns one stream per purpose, so results
// do not depend on the order in which replications or selectors run.
enum class StreamPurpose : std::uint64_t {
    data = 1,
    folds = 2,
    stratified_folds = 3,
};

// Counter-based generator: the k-th output is a hash of (key, k), where the
// key is derived from (master seed, replication index, purpose). Cheap to
// construct, trivially splittable, identical on every platform.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t replication, std::uint64_t purpose) noexcept {
        std::uint64_t k = mix64(master_seed + 0x9E3779B97F4A7C15ull);
        k = mix64(k ^ mix64(replication + 0xD1B54A32D192ED03ull));
        k = mix64(k ^ mix64(purpose + 0x8CB92BA72F3D8DD7ull));
        state_ = k;
    }

    RngStream(std::uint64_t master_seed, std::uint64_t replication, StreamPurpose purpose,
              std::uint64_t subkey = 0) noexcept
        : RngStream(master_seed, replication,
                    (static_cast<std::uint64_t>(purpose) << 32) ^ subkey) {}

    std::uint64_t next_u64() noexcept {
        state_ += 0x9E3779B97F4A7C15ull;
        return mix64(state_);
    }

    // Uniform on [0,1), 53 random bits.
    double next_unit() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform on {0,...,bound-1}, unbiased by rejection.
    std::uint64_t next_below(std::uint64_t bound) noexcept {
        const std::uint64_t limit = (~0ull / bound) * bound;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % bound;
    }

    // Standard normal via Box-Muller; the second deviate of each pair is cached.
    double next_gaussian() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0,1]
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace vfpen
