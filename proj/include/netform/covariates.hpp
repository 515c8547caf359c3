#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace netform {

/// Exogenous pair-level attributes of one network: a length-k vector W_ij for
/// every ordered pair plus the scalar matching instrument Z_ij. Fixed across
/// rounds.
class CovariateSet {
 public:
  CovariateSet() = default;
  CovariateSet(std::size_t n_agents, std::size_t k, std::vector<std::string> names = {});

  std::size_t n_agents() const noexcept { return n_; }
  std::size_t k() const noexcept { return k_; }
  const std::vector<std::string>& names() const noexcept { return names_; }

  std::span<const double> pair(std::size_t i, std::size_t j) const noexcept {
    return {w_.data() + (i * n_ + j) * k_, k_};
  }
  double covariate(std::size_t i, std::size_t j, std::size_t l) const noexcept {
    return w_[(i * n_ + j) * k_ + l];
  }
  void set_covariate(std::size_t i, std::size_t j, std::size_t l, double v) noexcept {
    w_[(i * n_ + j) * k_ + l] = v;
  }
  double instrument(std::size_t i, std::size_t j) const noexcept { return z_[i * n_ + j]; }
  void set_instrument(std::size_t i, std::size_t j, double v) noexcept { z_[i * n_ + j] = v; }

  friend bool operator==(const CovariateSet&, const CovariateSet&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t k_ = 0;
  std::vector<std::string> names_;
  std::vector<double> w_;
  std::vector<double> z_;
};

/// Raw agent-level attributes of one classroom, as ingested.
struct AgentTable {
  std::vector<std::string> ids;
  std::vector<std::string> columns;          // numeric attribute names
  std::vector<std::vector<double>> values;   // values[agent][column]
  std::vector<std::string> school;           // per agent; may be empty strings
  std::vector<std::string> grade;

  std::size_t size() const noexcept { return ids.size(); }
  /// Column position; throws ConfigError when missing.
  std::size_t column(const std::string& name) const;

  friend bool operator==(const AgentTable&, const AgentTable&) = default;
};

/// How agent attributes turn into pair covariates: absolute differences for
/// numeric attributes, mismatch indicators for categorical ones, and the
/// instrument as the distance between class-list positions.
struct CovariateSpec {
  std::vector<std::string> attributes;   // empty: every numeric column except the order column
  std::vector<std::string> categorical;
  std::string order_column = "class_list";

  std::vector<std::string> resolved_attributes(const AgentTable& agents) const;
  bool is_categorical(const std::string& name) const;
};

CovariateSet derive_covariates(const AgentTable& agents, const CovariateSpec& spec);

}  // namespace netform
