#include "netform/posterior.hpp"

#include <algorithm>
#include <cmath>

#include "netform/error.hpp"
#include "netform/halton.hpp"

namespace netform {

double weighted_quantile(std::vector<std::pair<double, double>> vw, double q) {
  if (vw.empty()) throw NumericError("quantile of an empty sample");
  std::sort(vw.begin(), vw.end());
  double total = 0.0;
  for (const auto& p : vw) total += p.second;
  double cum = 0.0;
  for (const auto& p : vw) {
    cum += p.second;
    if (cum >= q * total) return p.first;
  }
  return vw.back().first;
}

double effective_sample_size(const std::vector<double>& w) {
  double s = 0.0, s2 = 0.0;
  for (double v : w) {
    s += v;
    s2 += v * v;
  }
  return s2 > 0 ? s * s / s2 : 0.0;
}

PosteriorSummary summarize_weighted(const std::vector<double>& draws, std::size_t dim,
                                    const std::vector<double>& weights) {
  const std::size_t n = weights.size();
  if (n == 0 || draws.size() != n * dim) throw NumericError("no draws to summarize");
  double wsum = 0.0;
  for (double w : weights) wsum += w;
  if (!(wsum > 0)) throw NumericError("importance weights sum to zero");
  PosteriorSummary s;
  for (std::size_t j = 0; j < dim; ++j) {
    double m = 0.0, neg = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      m += weights[i] * draws[i * dim + j];
      if (draws[i * dim + j] < 0) neg += weights[i];
    }
    m /= wsum;
    double var = 0.0, se2 = 0.0;
    std::vector<std::pair<double, double>> vw(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = draws[i * dim + j] - m;
      var += weights[i] * d * d;
      se2 += weights[i] * weights[i] * d * d;
      vw[i] = {draws[i * dim + j], weights[i]};
    }
    s.mean.push_back(m);
    s.sd.push_back(std::sqrt(var / wsum));
    s.mc_se.push_back(std::sqrt(se2) / wsum);
    s.prob_negative.push_back(neg / wsum);
    s.q025.push_back(weighted_quantile(vw, 0.025));
    s.q500.push_back(weighted_quantile(vw, 0.5));
    s.q975.push_back(weighted_quantile(std::move(vw), 0.975));
  }
  return s;
}

PosteriorSummary summarize_gaussian(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
  PosteriorSummary s;
  const double z = normal_quantile(0.975);
  for (Eigen::Index j = 0; j < mean.size(); ++j) {
    const double m = mean(j), sd = std::sqrt(std::max(cov(j, j), 0.0));
    s.mean.push_back(m);
    s.sd.push_back(sd);
    s.q025.push_back(m - z * sd);
    s.q500.push_back(m);
    s.q975.push_back(m + z * sd);
    s.prob_negative.push_back(sd > 0 ? normal_cdf(-m / sd) : (m < 0 ? 1.0 : 0.0));
  }
  return s;
}

}  // namespace netform
