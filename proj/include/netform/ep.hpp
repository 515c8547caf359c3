#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "netform/abc.hpp"
#include "netform/lasso.hpp"

namespace netform {

/// One network's Gaussian factor in natural parameters: precision Q and
/// shift r = Q mu. A zero site is vacuous. Site precisions need not be
/// positive definite; only cavities and the full approximation must be.
struct GaussianSite {
  Eigen::MatrixXd precision;
  Eigen::VectorXd shift;
};

struct SiteDiagnostics {
  std::size_t pass = 0;
  std::size_t site = 0;
  double threshold = 0.0;
  std::size_t accepted = 0;
  bool skipped = false;
  bool cavity_jitter = false;
  bool moment_jitter = false;
  double change = 0.0;  // max change in the site natural parameters
};

struct EpState {
  GaussianSite prior;
  std::vector<GaussianSite> sites;
  GaussianSite full;  // prior + sum of sites
  std::size_t passes = 0;
  std::vector<double> convergence;  // per pass: max change in site parameters
  std::vector<SiteDiagnostics> diagnostics;
  std::vector<std::string> log;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(prior.shift.size()); }
  Eigen::MatrixXd covariance() const;
  Eigen::VectorXd mean() const;
  /// max |full.precision - (prior.precision + sum of site precisions)|, and
  /// the same for shifts.
  double bookkeeping_error() const;
};

/// Prior site from independent Gaussians; all network sites vacuous.
EpState ep_init(const PriorSpec& prior, std::size_t n_sites);

struct EpConfig {
  PriorSpec prior;
  std::size_t tau = 1;
  std::size_t passes = 1;
  double tolerance = 0.0;  // stop early when a pass changes sites by less
  std::size_t draws_per_site = 10000;
  double target_accept = 0.01;
  /// Fixed acceptance threshold instead of the adaptive quantile;
  /// +inf accepts every draw.
  std::optional<double> fixed_threshold;
  std::size_t min_accept = 0;  // at least dim + 3, the default
  /// Scale the inverse sample covariance by (n-d-2)/(n-1), the unbiased
  /// precision estimate for n accepted draws in d dimensions.
  bool unbiased_precision = true;
  bool halton = true;
  double damping = 1.0;  // fraction of the site change applied
  ShockSpec shocks;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

/// Distance between network c's simulated followup and its observed one.
using SiteDiscrepancy = std::function<double(std::size_t c, const Network& simulated)>;

/// Number of differing edges against the observed followups.
SiteDiscrepancy hamming_discrepancy(const NetworkPanel& panel);

/// Draws from the cavity for site c, simulates only network c, accepts the
/// draws whose discrepancy is within the threshold and moment-matches the
/// full approximation to the accepted draws. Too few acceptances leave the
/// site unchanged and record a diagnostic.
void ep_update_site(EpState& state, std::size_t c, const NetworkPanel& panel,
                    const Estimand& estimand, const EpConfig& cfg,
                    const SiteDiscrepancy& discrepancy);

struct EpResult {
  EpState state;
  PosteriorSummary summary;
};

/// Sequential passes over the networks with the Hamming discrepancy.
/// Throws NumericError if every site update failed.
EpResult ep_run(const NetworkPanel& panel, const Estimand& estimand, const EpConfig& cfg);

/// Per-network affine summary T(g) = intercept + slopes vec(g), one output
/// per free coefficient.
struct LocalSummary {
  Eigen::VectorXd intercept;
  Eigen::MatrixXd slopes;  // dim x N(N-1)
  std::vector<std::vector<std::size_t>> constant_columns;  // per output

  Eigen::VectorXd apply(const Network& g) const;
};

struct LocalSummaryConfig {
  PriorSpec prior;
  std::size_t tau = 1;
  std::size_t draws = 100000;
  LassoOptions lasso;
  ShockSpec shocks;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

/// Draws coefficients from the prior, simulates each network's followup and
/// regresses each coefficient on the simulated edge indicators by
/// post-lasso.
std::vector<LocalSummary> fit_local_summaries(const NetworkPanel& panel, const Estimand& estimand,
                                              const LocalSummaryConfig& cfg);

/// Euclidean distance between summaries of simulated and observed followups.
SiteDiscrepancy local_discrepancy(const NetworkPanel& panel,
                                  const std::vector<LocalSummary>& summaries);

/// ep_run with the local-summary discrepancy.
EpResult ep_run_local(const NetworkPanel& panel, const Estimand& estimand, const EpConfig& cfg,
                      const std::vector<LocalSummary>& summaries);

}  // namespace netform
