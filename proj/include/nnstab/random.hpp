#pragma once

// Counter-based random streams. Every stream is addressed by
// (seed, stream_id, lane, group) and is a pure function of that address,
// so parallel trials never depend on scheduling order.
//
// Generator: Philox4x64-10 (Salmon et al., Random123). The block function is
// bit-compatible with Random123 and numpy.random.Philox.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string_view>

namespace nnstab {

inline constexpr std::string_view kStreamAlgorithm = "philox4x64-10/v1";

using PhiloxCounter = std::array<std::uint64_t, 4>;
using PhiloxKey = std::array<std::uint64_t, 2>;

namespace detail {

inline void mulhilo64(std::uint64_t a, std::uint64_t b, std::uint64_t& hi,
                      std::uint64_t& lo) noexcept {
    const unsigned __int128 prod = static_cast<unsigned __int128>(a) * b;
    hi = static_cast<std::uint64_t>(prod >> 64);
    lo = static_cast<std::uint64_t>(prod);
}

}  // namespace detail

inline PhiloxCounter philox4x64_10(PhiloxCounter ctr, PhiloxKey key) noexcept {
    constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
    constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
    constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
    constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;
    for (int round = 0; round < 10; ++round) {
        std::uint64_t hi0, lo0, hi1, lo1;
        detail::mulhilo64(kMul0, ctr[0], hi0, lo0);
        detail::mulhilo64(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

/// One reproducible random stream. Key = (seed, stream_id); counter words
/// are (block, lane, group, 0). Satisfies UniformRandomBitGenerator.
class Stream {
public:
    using result_type = std::uint64_t;

    Stream(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t lane,
           std::uint64_t group) noexcept
        : key_{seed, stream_id}, counter_{0, lane, group, 0} {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() noexcept {
        if (pos_ == 4) refill();
        return block_[pos_++];
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; the second variate of each pair is
    /// cached so the draw sequence is fixed for a given address.
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    void refill() noexcept {
        block_ = philox4x64_10(counter_, key_);
        ++counter_[0];
        pos_ = 0;
    }

    PhiloxKey key_;
    PhiloxCounter counter_;
    PhiloxCounter block_{};
    int pos_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Stream for lane `lane` of `seed` in the default stream id and group.
inline Stream derive_stream(std::uint64_t seed, std::uint64_t lane) noexcept {
    return Stream(seed, 0, lane, 0);
}

}  // namespace nnstab
