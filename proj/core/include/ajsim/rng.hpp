#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace ajsim {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
/// A pure function of (counter, key): no state is carried between blocks.
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static constexpr Counter generate(Counter ctr, Key key) {
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return ctr;
    }
};

/// Independent random sub-streams. The tag separates purposes (Brownian, Poisson, ...)
/// within one path so that changing one never perturbs the others.
enum class StreamTag : std::uint32_t {
    brownian = 1,
    poisson = 2,
    bridge = 3,
    modulus = 4,
    poisson_integral = 5,
};

/// Sequential draws from the Philox block sequence keyed by `seed` and addressed by
/// (path, tag, offset). Draws are a deterministic function of those inputs only.
class PhiloxStream {
public:
    PhiloxStream(std::uint64_t seed, std::uint64_t path, StreamTag tag, std::uint64_t offset = 0)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          path_lo_(static_cast<std::uint32_t>(path)),
          path_hi_tag_((static_cast<std::uint32_t>(path >> 32) & 0x00FFFFFFu) |
                       (static_cast<std::uint32_t>(tag) << 24)),
          block_(offset) {}

    std::uint32_t next_u32() {
        if (pos_ == 4) refill();
        return buf_[pos_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    /// Uniform on the open interval (0, 1) with 53 random bits.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via the Box-Muller transform; the second variate is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    /// Poisson(mean) by sequential inversion, splitting large means by additivity.
    std::uint32_t poisson(double mean) {
        if (!(mean > 0.0)) return 0;
        if (mean > 16.0) {
            const double half = mean / 2.0;
            return poisson(half) + poisson(mean - half);
        }
        const double u = uniform();
        double prob = std::exp(-mean);
        double cdf = prob;
        std::uint32_t k = 0;
        while (u > cdf && k < 1000u) {
            ++k;
            prob *= mean / static_cast<double>(k);
            cdf += prob;
        }
        return k;
    }

private:
    void refill() {
        const Philox4x32::Counter ctr{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                                      path_lo_, path_hi_tag_};
        buf_ = Philox4x32::generate(ctr, key_);
        ++block_;
        pos_ = 0;
    }

    Philox4x32::Key key_;
    std::uint32_t path_lo_;
    std::uint32_t path_hi_tag_;
    std::uint64_t block_;
    Philox4x32::Counter buf_{};
    int pos_ = 4;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace ajsim
