#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace bsdep {

/// Philox 4x32-10 counter-based generator (Salmon et al., SC 2011).
///
/// Every (seed, path, stream) triple addresses an independent substream of
/// 2^64 blocks, so paths can be generated in any order, or in parallel,
/// with bit-identical output.
struct Philox4x32 {
    static constexpr std::uint32_t kWeylA = 0x9E3779B9u;
    static constexpr std::uint32_t kWeylB = 0xBB67AE85u;
    static constexpr std::uint32_t kMultA = 0xD2511F53u;
    static constexpr std::uint32_t kMultB = 0xCD9E8D57u;

    static std::array<std::uint32_t, 4> block(std::uint64_t seed,
                                              std::uint32_t path,
                                              std::uint32_t stream,
                                              std::uint64_t draw) {
        std::array<std::uint32_t, 4> ctr{
            static_cast<std::uint32_t>(draw),
            static_cast<std::uint32_t>(draw >> 32),
            path,
            stream,
        };
        std::uint32_t k0 = static_cast<std::uint32_t>(seed);
        std::uint32_t k1 = static_cast<std::uint32_t>(seed >> 32);
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMultA) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMultB) * ctr[2];
            const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
            k0 += kWeylA;
            k1 += kWeylB;
        }
        return ctr;
    }
};

/// Identifier recorded in ensembles so regeneration can verify the scheme.
inline constexpr std::string_view kSubstreamScheme = "philox4x32-10/v1";

/// Sequential view over one (seed, path, stream) Philox substream.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint32_t path, std::uint32_t stream)
        : seed_(seed), path_(path), stream_(stream) {}

    /// Uniform draw in the open interval (0, 1).
    double next_uniform() {
        if (word_pos_ == 4) {
            words_ = Philox4x32::block(seed_, path_, stream_, draw_++);
            word_pos_ = 0;
        }
        const std::uint64_t lo = words_[word_pos_];
        const std::uint64_t hi = words_[word_pos_ + 1];
        word_pos_ += 2;
        const std::uint64_t bits = (hi << 32) | lo;
        return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; pairs are cached.
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Exponential draw with the given rate (inversion).
    double next_exponential(double rate) {
        return -std::log(next_uniform()) / rate;
    }

private:
    std::uint64_t seed_;
    std::uint32_t path_, stream_;
    std::uint64_t draw_ = 0;
    std::array<std::uint32_t, 4> words_{};
    int word_pos_ = 4;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace bsdep
