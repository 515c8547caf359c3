#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <vector>

#include "netform/panel.hpp"

namespace netform {

/// One row per ordered pair within a classroom. Agent ids are global across
/// classrooms so that sender and receiver effects do not pool classrooms.
struct DyadFrame {
  std::vector<std::string> names;  // regressor names
  std::vector<std::size_t> cluster, sender, receiver;
  Eigen::VectorXd y;
  Eigen::MatrixXd x;  // rows x names.size()

  std::size_t rows() const noexcept { return static_cast<std::size_t>(y.size()); }
  /// Throws ValidationError on inconsistent lengths or self-pairs.
  void validate() const;
};

/// Edge indicators of `followups` on the baseline pair covariates, optionally
/// with the matching instrument as an extra regressor.
DyadFrame dyad_frame(const NetworkPanel& panel, const std::vector<Network>& followups,
                     bool with_instrument = false);
/// Same with the panel's observed followups.
DyadFrame dyad_frame(const NetworkPanel& panel, bool with_instrument = false);

struct DyadicOptions {
  bool fixed_effects = false;  // sender and receiver effects, absorbed
  double demean_tolerance = 1e-10;
  std::size_t max_demean_sweeps = 100000;
};

struct DyadicFit {
  std::vector<std::string> names;  // "intercept" first when there are no fixed effects
  Eigen::VectorXd coef;
  Eigen::VectorXd se;
  Eigen::MatrixXd cov;  // clustered, with the small-sample factor
  double r2 = 0.0;        // 1 - SSR / centered SST of the raw response; 0 when SST = 0
  double r2_within = 0.0; // same on the demeaned response
  std::size_t n = 0;
  std::size_t clusters = 0;
  std::size_t demean_sweeps = 0;
};

/// Least squares with covariance clustered by classroom:
/// (X'X)^-1 (sum_g X_g'e_g e_g'X_g) (X'X)^-1 * G/(G-1) * (n-1)/(n-k), k the
/// number of reported coefficients. Fixed effects are swept out by
/// alternating sender/receiver demeaning. Throws ValidationError listing the
/// collinear columns when the design is rank deficient.
DyadicFit dyadic_ols(const DyadFrame& frame, const DyadicOptions& opt = {});

/// Two-sided normal p-value stars: *** < 0.01, ** < 0.05, * < 0.1.
std::string significance_stars(double coef, double se);

}  // namespace netform
