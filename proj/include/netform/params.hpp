#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace netform {

/// Matching and utility coefficients for covariate length k, stored flat as
///   [beta_m (k), delta0, delta1, beta_ud (k+1), beta_ur (k+1), beta_un (k+1)]
/// Each utility block leads with its intercept. The indirect and popularity
/// terms share the single beta_un block.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::size_t k) : k_(k), v_(size_for(k), 0.0) {}
  /// Throws ConfigError if values.size() != 4k+5 or any value is not finite.
  ParamVector(std::size_t k, std::vector<double> values);

  static constexpr std::size_t size_for(std::size_t k) noexcept { return 4 * k + 5; }
  /// Infers k from a flat length; throws ConfigError if not of the form 4k+5.
  static std::size_t k_for_size(std::size_t size);

  std::size_t k() const noexcept { return k_; }
  std::size_t size() const noexcept { return v_.size(); }

  double& operator[](std::size_t i) noexcept { return v_[i]; }
  double operator[](std::size_t i) const noexcept { return v_[i]; }
  const std::vector<double>& values() const noexcept { return v_; }
  std::vector<double>& values() noexcept { return v_; }

  // Block offsets into the flat vector.
  std::size_t matching_offset() const noexcept { return 0; }
  std::size_t delta0_index() const noexcept { return k_; }
  std::size_t delta1_index() const noexcept { return k_ + 1; }
  std::size_t direct_offset() const noexcept { return k_ + 2; }
  std::size_t mutual_offset() const noexcept { return 2 * k_ + 3; }
  std::size_t indirect_offset() const noexcept { return 3 * k_ + 4; }

  std::span<const double> matching() const noexcept { return {v_.data(), k_}; }
  double delta0() const noexcept { return v_[k_]; }
  double delta1() const noexcept { return v_[k_ + 1]; }
  std::span<const double> direct() const noexcept { return {v_.data() + direct_offset(), k_ + 1}; }
  std::span<const double> mutual() const noexcept { return {v_.data() + mutual_offset(), k_ + 1}; }
  std::span<const double> indirect() const noexcept {
    return {v_.data() + indirect_offset(), k_ + 1};
  }

  /// Human-readable coefficient names given covariate names (length k).
  std::vector<std::string> names(const std::vector<std::string>& covariates) const;
  /// Position of a named coefficient; throws ConfigError when unknown.
  std::size_t index_of(const std::string& name, const std::vector<std::string>& covariates) const;

  /// Throws ConfigError if any coefficient is not finite.
  void validate() const;

  friend bool operator==(const ParamVector&, const ParamVector&) = default;

 private:
  std::size_t k_ = 0;
  std::vector<double> v_ = std::vector<double>(5, 0.0);
};

}  // namespace netform
