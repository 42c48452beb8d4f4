#pragma once

#include <complex>
#include <cstdint>

namespace nlsgibbs {

/// Addressable random stream: identical (seed, stream_id) reproduce identical
/// sample sequences bit-exactly, independent of thread scheduling.
struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
};

/// xoshiro256** seeded through SplitMix64 from (seed, stream_id).
/// Per-sample substreams make parallel ensembles order-independent.
class SampleRng {
  public:
    explicit SampleRng(RngStream stream);

    std::uint64_t next_u64();
    /// Uniform in (0, 1), never exactly 0 (safe under log).
    double uniform();
    /// Standard real normal via Box-Muller (pairs cached).
    double gaussian();
    /// Standard complex normal, density pi^{-1} e^{-|z|^2}: two independent
    /// real normals of variance 1/2 each.
    std::complex<double> complex_gaussian();

  private:
    std::uint64_t s_[4];
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace nlsgibbs
