#pragma once

#include <cstdint>
#include <string_view>

namespace dgm {

/// Counter-based random stream: the i-th draw is a pure function of (key, i).
///
/// Streams are split by hashing a stream id into the key, so a master seed
/// fans out into independent sub-streams without sharing any mutable state.
/// Every sampler here is built from integer mixing and fixed-precision
/// formulas, so draws are bit-identical across platforms and compilers.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed);

  /// Independent child stream. Deriving the same id twice yields the same stream.
  CounterRng substream(std::uint64_t stream_id) const;
  CounterRng substream(std::string_view name) const;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t position() const noexcept { return counter_; }

  std::uint64_t next_u64();
  result_type operator()() { return next_u64(); }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  /// Uniform on the open interval (0, 1) with 53-bit resolution.
  double uniform();
  double uniform(double lo, double hi);
  /// Uniform integer in [0, bound), unbiased. bound must be positive.
  std::uint64_t below(std::uint64_t bound);
  /// Standard normal by inversion of a uniform draw.
  double normal();
  /// Gamma(shape, 1) for shape >= 1 (Marsaglia-Tsang squeeze).
  double gamma(double shape);
  double chi_square(double dof) { return 2.0 * gamma(0.5 * dof); }

 private:
  CounterRng(std::uint64_t key, std::uint64_t counter) : key_(key), counter_(counter) {}

  std::uint64_t key_;
  std::uint64_t counter_;
};

std::uint64_t mix64(std::uint64_t x) noexcept;
std::uint64_t hash_name(std::string_view name) noexcept;

/// Inverse of the standard normal CDF (Wichura's AS241, about 1e-16 relative accuracy).
double normal_quantile(double p);

}  // namespace dgm
