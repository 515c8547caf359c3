#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace netform {

/// Radical inverse of `index` in base `base`.
double radical_inverse(std::uint64_t index, std::uint32_t base) noexcept;

/// First `count` primes.
std::vector<std::uint32_t> first_primes(std::size_t count);

/// Halton sequence in `dim` dimensions with a Cranley-Patterson shift drawn
/// from `seed` (seed 0 gives the unshifted sequence). Point s uses index s+1,
/// so no coordinate is ever exactly 0.
class HaltonSequence {
 public:
  HaltonSequence(std::size_t dim, std::uint64_t seed);
  std::size_t dim() const noexcept { return bases_.size(); }
  /// Uniform point in (0,1)^dim.
  void uniform(std::uint64_t s, double* out) const;
  /// Standard normal point via the inverse CDF.
  void normal(std::uint64_t s, double* out) const;

 private:
  std::vector<std::uint32_t> bases_;
  std::vector<double> shift_;
};

/// Standard normal quantile and CDF.
double normal_quantile(double p);
double normal_cdf(double x);

}  // namespace netform
