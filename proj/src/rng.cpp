#include "nlsgibbs/rng.hpp"

#include <cmath>
#include <numbers>

namespace nlsgibbs {

namespace {
inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace

SampleRng::SampleRng(RngStream stream) {
    std::uint64_t x = stream.seed ^ (0xD2B74407B1CE6E93ULL * (stream.stream_id + 1));
    for (auto& w : s_) w = splitmix64(x);
    // xoshiro must not start from the all-zero state
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

std::uint64_t SampleRng::next_u64() {
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

double SampleRng::uniform() {
    // 53-bit mantissa in (0,1]; flip to [0,1) then shift off exact zero
    const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return u == 0.0 ? 0x1.0p-53 : u;
}

double SampleRng::gaussian() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double th = 2.0 * std::numbers::pi * uniform();
    cached_ = r * std::sin(th);
    has_cached_ = true;
    return r * std::cos(th);
}

std::complex<double> SampleRng::complex_gaussian() {
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double th = 2.0 * std::numbers::pi * uniform();
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    return {r * std::cos(th) * inv_sqrt2, r * std::sin(th) * inv_sqrt2};
}

}  // namespace nlsgibbs
