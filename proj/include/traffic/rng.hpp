#pragma once

#include <cstdint>

namespace traffic {

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ull;

/// splitmix64 finalizer; bijective 64-bit scrambler.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ull;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebull;
  z ^= z >> 31;
  return z;
}

/// Derives an independent child seed from (master, domain, index).
///
/// Every consumer of randomness in this project gets its own stream keyed by
/// a domain tag plus an index, so adding streams or reordering execution
/// never perturbs existing draws.
constexpr std::uint64_t sub_seed(std::uint64_t master, std::uint64_t domain,
                                 std::uint64_t index = 0) {
  return mix64(mix64(master + kGoldenGamma) ^
               mix64(domain * 0xd1342543de82ef95ull + index * kGoldenGamma + 1));
}

// Stream domain tags (arbitrary distinct constants).
inline constexpr std::uint64_t kDomainPaths = 0x50415448ull;     // per-path SDE streams
inline constexpr std::uint64_t kDomainTimes = 0x54494d45ull;     // sampling-time draws
inline constexpr std::uint64_t kDomainSampler = 0x53414d50ull;   // parameter-combo sampler
inline constexpr std::uint64_t kDomainCombos = 0x434f4d42ull;    // per-combo sub-ensembles
inline constexpr std::uint64_t kDomainCells = 0x43454c4cull;     // per-grid-cell scans

/// Counter-based pseudo-random stream (splitmix64 with random access).
///
/// The i-th output is mix64(key + i*gamma); streams with different keys are
/// statistically independent for our purposes. Draws are reproducible across
/// platforms up to libm differences in log/cos/sqrt.
class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : state_(key) {}

  static RngStream derive(std::uint64_t master, std::uint64_t domain,
                          std::uint64_t index = 0) {
    return RngStream(sub_seed(master, domain, index));
  }

  std::uint64_t next_u64() {
    state_ += kGoldenGamma;
    return mix64(state_);
  }

  /// Uniform double in [0, 1), 53 random bits.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [lo, hi).
  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_unit();
  }

  /// Uniform index in [0, n); n must be >= 1.
  std::size_t next_index(std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Standard normal via Box-Muller. Consumes exactly two u64 draws so the
  /// stream layout does not depend on caller history.
  double next_normal();

 private:
  std::uint64_t state_;
};

}  // namespace traffic
