#include "netform/lasso.hpp"

#include <algorithm>
#include <cmath>

#include "netform/error.hpp"
#include "netform/halton.hpp"

namespace netform {

double plugin_lambda(std::size_t n, std::size_t p, double sigma, double c) {
  const double gamma = 0.1 / std::log(static_cast<double>(std::max<std::size_t>({n, p, 3})));
  return c * sigma * normal_quantile(1.0 - gamma / (2.0 * static_cast<double>(std::max<std::size_t>(p, 1)))) /
         std::sqrt(static_cast<double>(n));
}

namespace {

struct Standardized {
  Eigen::MatrixXd Z;  // centered, unit mean square
  Eigen::VectorXd center, scale;
  std::vector<std::size_t> cols;  // original indices kept
};

// Coefficients on standardized columns for a fixed penalty.
Eigen::VectorXd coordinate_descent(const Standardized& s, const Eigen::VectorXd& yc, double lambda,
                                   const LassoOptions& opt) {
  const auto n = static_cast<double>(yc.size());
  const Eigen::Index p = s.Z.cols();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd r = yc;
  for (std::size_t sweep = 0; sweep < opt.max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double rho = s.Z.col(j).dot(r) / n + b(j);
      const double nb = rho > lambda ? rho - lambda : (rho < -lambda ? rho + lambda : 0.0);
      const double delta = nb - b(j);
      if (delta != 0.0) {
        r.noalias() -= delta * s.Z.col(j);
        b(j) = nb;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    if (max_change < opt.tolerance) break;
  }
  return b;
}

struct Refit {
  double intercept;
  Eigen::VectorXd coef;
  double ssr;
};

Refit refit_support(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                    const std::vector<std::size_t>& support) {
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd D(n, static_cast<Eigen::Index>(support.size()) + 1);
  D.col(0).setOnes();
  for (std::size_t k = 0; k < support.size(); ++k)
    D.col(static_cast<Eigen::Index>(k) + 1) = X.col(static_cast<Eigen::Index>(support[k]));
  const Eigen::VectorXd beta = D.colPivHouseholderQr().solve(y);
  Refit out{beta(0), Eigen::VectorXd::Zero(X.cols()), (y - D * beta).squaredNorm()};
  for (std::size_t k = 0; k < support.size(); ++k)
    out.coef(static_cast<Eigen::Index>(support[k])) = beta(static_cast<Eigen::Index>(k) + 1);
  return out;
}

}  // namespace

LassoFit post_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const LassoOptions& opt) {
  const Eigen::Index n = X.rows();
  if (n < 2 || y.size() != n) throw ConfigError("lasso needs matching X and y with n >= 2");
  if (opt.lambda && !(*opt.lambda >= 0)) throw ConfigError("lasso penalty must be nonnegative");

  LassoFit fit;
  Standardized s;
  const double nn = static_cast<double>(n);
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double m = X.col(j).mean();
    const double ms = (X.col(j).array() - m).square().sum() / nn;
    if (ms <= 1e-14) {
      fit.constant_columns.push_back(static_cast<std::size_t>(j));
      continue;
    }
    s.cols.push_back(static_cast<std::size_t>(j));
  }
  const auto kept = static_cast<Eigen::Index>(s.cols.size());
  s.Z.resize(n, kept);
  s.center.resize(kept);
  s.scale.resize(kept);
  for (Eigen::Index k = 0; k < kept; ++k) {
    const auto col = X.col(static_cast<Eigen::Index>(s.cols[static_cast<std::size_t>(k)]));
    s.center(k) = col.mean();
    s.scale(k) = std::sqrt((col.array() - s.center(k)).square().sum() / nn);
    s.Z.col(k) = (col.array() - s.center(k)) / s.scale(k);
  }
  const double ymean = y.mean();
  const Eigen::VectorXd yc = y.array() - ymean;

  auto fit_at = [&](double lambda) {
    const Eigen::VectorXd b = kept > 0 ? coordinate_descent(s, yc, lambda, opt) : Eigen::VectorXd();
    LassoFit f;
    f.lambda = lambda;
    f.constant_columns = fit.constant_columns;
    f.coef = Eigen::VectorXd::Zero(X.cols());
    double shift = 0.0;
    for (Eigen::Index k = 0; k < kept; ++k) {
      if (b(k) == 0.0) continue;
      const auto j = s.cols[static_cast<std::size_t>(k)];
      f.support.push_back(j);
      f.coef(static_cast<Eigen::Index>(j)) = b(k) / s.scale(k);
      shift += f.coef(static_cast<Eigen::Index>(j)) * s.center(k);
    }
    f.intercept = ymean - shift;
    double ssr;
    if (opt.refit) {
      const Refit r = refit_support(X, y, f.support);
      f.intercept = r.intercept;
      f.coef = r.coef;
      ssr = r.ssr;
    } else {
      ssr = (y - (X * f.coef).array().matrix() - Eigen::VectorXd::Constant(n, f.intercept)).squaredNorm();
    }
    return std::make_pair(f, ssr);
  };

  if (opt.lambda) return fit_at(*opt.lambda).first;

  const auto p = static_cast<std::size_t>(std::max<Eigen::Index>(kept, 1));
  double sigma = std::sqrt(yc.squaredNorm() / nn);
  std::pair<LassoFit, double> current;
  for (std::size_t it = 0; it <= opt.plugin_iterations; ++it) {
    current = fit_at(plugin_lambda(static_cast<std::size_t>(n), p, sigma, opt.plugin_c));
    const double dof = nn - static_cast<double>(current.first.support.size()) - 1.0;
    if (dof <= 0) break;
    const double next = std::sqrt(current.second / dof);
    if (std::abs(next - sigma) < 1e-6 * std::max(sigma, 1e-300)) break;
    sigma = next;
  }
  return current.first;
}

}  // namespace netform
