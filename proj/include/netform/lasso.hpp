#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <vector>

namespace netform {

struct LassoOptions {
  /// Penalty on standardized columns for the objective
  /// (1/2n)|y - b0 - Xb|^2 + lambda |b|_1. Unset: plug-in rule.
  std::optional<double> lambda;
  double plugin_c = 1.1;
  std::size_t plugin_iterations = 3;  // refinements of the noise-level estimate
  double tolerance = 1e-9;
  std::size_t max_sweeps = 10000;
  bool refit = true;  // unpenalized least squares on the selected support
};

struct LassoFit {
  double intercept = 0.0;
  Eigen::VectorXd coef;  // original column scale, zero off the support
  std::vector<std::size_t> support;
  std::vector<std::size_t> constant_columns;  // dropped: zero variance
  double lambda = 0.0;
};

/// Plug-in penalty c * sigma * Phi^{-1}(1 - gamma/(2p)) / sqrt(n) with
/// gamma = 0.1 / ln(max(n, p)).
double plugin_lambda(std::size_t n, std::size_t p, double sigma, double c = 1.1);

/// Coordinate-descent lasso followed (optionally) by an OLS refit on the
/// selected support.
LassoFit post_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                    const LassoOptions& opt = {});

}  // namespace netform
