#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <vector>

namespace netform {

/// Per-coefficient posterior summaries in the layout of a results table.
struct PosteriorSummary {
  std::vector<std::string> names;
  std::vector<double> mean, sd, q025, q500, q975, prob_negative;
  std::vector<double> mc_se;  // Monte Carlo standard error of the mean; empty for EP

  std::size_t dim() const noexcept { return mean.size(); }
};

/// Self-normalized weighted summaries of draws (row-major, n x dim). The
/// Monte Carlo error of each mean is sqrt(sum w^2 (x - mean)^2) / sum w.
PosteriorSummary summarize_weighted(const std::vector<double>& draws, std::size_t dim,
                                    const std::vector<double>& weights);

/// Summaries of a Gaussian posterior.
PosteriorSummary summarize_gaussian(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov);

/// Weighted quantile: the smallest value whose cumulative weight reaches q.
double weighted_quantile(std::vector<std::pair<double, double>> value_weight, double q);

/// Kish effective sample size.
double effective_sample_size(const std::vector<double>& weights);

}  // namespace netform
