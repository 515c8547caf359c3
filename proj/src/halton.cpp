#include "netform/halton.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>

#include "netform/rng.hpp"

namespace netform {

double radical_inverse(std::uint64_t index, std::uint32_t base) noexcept {
  const double inv = 1.0 / base;
  double f = inv, r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

std::vector<std::uint32_t> first_primes(std::size_t count) {
  std::vector<std::uint32_t> p;
  for (std::uint32_t c = 2; p.size() < count; ++c) {
    bool prime = true;
    for (auto q : p) {
      if (q * q > c) break;
      if (c % q == 0) {
        prime = false;
        break;
      }
    }
    if (prime) p.push_back(c);
  }
  return p;
}

HaltonSequence::HaltonSequence(std::size_t dim, std::uint64_t seed)
    : bases_(first_primes(dim)), shift_(dim, 0.0) {
  if (seed != 0) {
    Rng rng(derive_seed(seed, {0x4a1707}));
    for (auto& s : shift_) s = rng.uniform();
  }
}

void HaltonSequence::uniform(std::uint64_t s, double* out) const {
  for (std::size_t j = 0; j < bases_.size(); ++j) {
    double u = radical_inverse(s + 1, bases_[j]) + shift_[j];
    if (u >= 1.0) u -= 1.0;
    // keep strictly inside (0,1) for the inverse CDF
    if (u <= 0.0) u = 0x1.0p-53;
    out[j] = u;
  }
}

void HaltonSequence::normal(std::uint64_t s, double* out) const {
  uniform(s, out);
  for (std::size_t j = 0; j < bases_.size(); ++j) out[j] = normal_quantile(out[j]);
}

double normal_quantile(double p) {
  static const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, p);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace netform
