#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace dmoments {

/// SplitMix64 finalizer (Steele, Lea, Flood). Used to derive stream keys.
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept
{
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Reproducible random stream identified by (seed, stream id, substream id).
///
/// Generator: xoshiro256** (Blackman & Vigna), state filled from a SplitMix64
/// chain keyed on the three ids. Identical ids give identical sequences on
/// every platform; streams with distinct ids are independent for all
/// practical purposes, so one stream per replication makes results
/// independent of how replications are scheduled across threads.
///
/// Satisfies std::uniform_random_bit_generator, but library code only uses
/// the member transforms below (the std:: distributions are not portable).
class RngStream {
public:
    using result_type = std::uint64_t;

    explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0,
                       std::uint64_t substream_id = 0) noexcept
        : seed_{seed}, stream_id_{stream_id}, substream_id_{substream_id}
    {
        std::uint64_t key = seed;
        std::uint64_t mix = splitmix64(key);
        key = mix ^ (stream_id * 0xD1B54A32D192ED03ULL);
        mix = splitmix64(key);
        key = mix ^ (substream_id * 0xABC98388FB8FAC03ULL + 0x8CB92BA72F3D8DD7ULL);
        for (auto& word : s_) {
            word = splitmix64(key);
        }
        // xoshiro must not start from the all-zero state
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) {
            s_[0] = 0x9E3779B97F4A7C15ULL;
        }
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept
    {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform double in (0, 1].
    double uniform_open_closed() noexcept
    {
        return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
    }

    /// Unbiased integer in [0, bound) (Lemire's multiply-shift with rejection).
    std::uint64_t uniform_index(std::uint64_t bound)
    {
        if (bound == 0) {
            throw std::invalid_argument("uniform_index: bound must be positive");
        }
        u128 m = static_cast<u128>((*this)()) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                m = static_cast<u128>((*this)()) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Exponential variate with the given rate, by inversion.
    double exponential(double rate) noexcept { return -std::log(uniform_open_closed()) / rate; }

    /// Standard normal variate (Marsaglia polar method, spare value discarded).
    double standard_normal() noexcept
    {
        for (;;) {
            const double u = 2.0 * uniform() - 1.0;
            const double v = 2.0 * uniform() - 1.0;
            const double s = u * u + v * v;
            if (s > 0.0 && s < 1.0) {
                return u * std::sqrt(-2.0 * std::log(s) / s);
            }
        }
    }

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    [[nodiscard]] std::uint64_t stream_id() const noexcept { return stream_id_; }
    [[nodiscard]] std::uint64_t substream_id() const noexcept { return substream_id_; }

private:
    __extension__ using u128 = unsigned __int128;

    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept
    {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t substream_id_;
    std::array<std::uint64_t, 4> s_{};
};

}  // namespace dmoments
