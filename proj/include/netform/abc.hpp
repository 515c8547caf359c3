#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "netform/game.hpp"
#include "netform/panel.hpp"
#include "netform/posterior.hpp"

namespace netform {

/// Which coefficients are estimated. The others stay at their values in
/// `base`.
struct Estimand {
  ParamVector base;
  std::vector<std::size_t> free;

  /// Every coefficient free.
  static Estimand all(const ParamVector& base);
  std::size_t dim() const noexcept { return free.size(); }
  ParamVector expand(std::span<const double> theta) const;
  void expand_into(std::span<const double> theta, ParamVector& out) const;
  std::vector<std::string> names(const std::vector<std::string>& covariates) const;
  /// Throws ConfigError for out-of-range or repeated indices.
  void validate() const;
};

/// Independent Gaussian per free coefficient.
struct GaussianSpec {
  std::vector<double> mean;
  std::vector<double> sd;

  static GaussianSpec isotropic(std::size_t dim, double mean, double sd);
  std::size_t dim() const noexcept { return mean.size(); }
  /// Throws ConfigError on size mismatch or non-positive sd.
  void validate(std::size_t dim, const std::string& what) const;
  double log_density(std::span<const double> x) const;
};

using PriorSpec = GaussianSpec;

struct ProposalSpec {
  GaussianSpec gaussian;
  bool halton = false;
};

enum class KernelKind { Sharp, SmoothGaussian };

/// Sharp: accept iff d <= epsilon. SmoothGaussian: accept with probability
/// phi(d/epsilon)/phi(0). At epsilon = 0 both accept exact matches only;
/// epsilon = +inf accepts everything.
struct KernelSpec {
  KernelKind kind = KernelKind::Sharp;
  double epsilon = std::numeric_limits<double>::infinity();
};

/// FullPanel stacks every followup edge indicator (the default; the exact
/// posterior is recovered as epsilon -> 0). EdgeCounts keeps one edge count
/// per network; CrossTab pools [sum g, sum g W_1, ..., sum g W_k] over the
/// panel. The coarser statistics lose information in general.
enum class SummaryStat { FullPanel, EdgeCounts, CrossTab };

/// Statistic of the given followup networks (one per observation).
std::vector<double> summary_statistic(SummaryStat stat, const NetworkPanel& panel,
                                      const std::vector<Network>& followups);

/// Euclidean distance.
double stat_distance(const std::vector<double>& a, const std::vector<double>& b);

struct AbcConfig {
  PriorSpec prior;
  std::optional<ProposalSpec> proposal;  // defaults to the prior
  bool halton = false;                   // when the proposal is the prior
  std::size_t tau = 1;
  std::size_t draws = 10000;
  SummaryStat stat = SummaryStat::FullPanel;
  ShockSpec shocks;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

/// Simulated draws before the accept step.
struct AbcDraws {
  std::size_t dim = 0;
  std::vector<double> theta;       // draws x dim
  std::vector<double> log_weight;  // log p0 - log q0; exactly 0 when q0 = p0
  std::vector<double> distance;
  std::size_t size() const noexcept { return distance.size(); }
};

struct AbcResult {
  KernelSpec kernel;
  std::vector<std::size_t> accepted;  // indices into the draws
  std::vector<double> weights;        // importance weights of accepted draws
  double acceptance_rate = 0.0;
  double ess = 0.0;
  PosteriorSummary summary;
};

/// Draws theta from the proposal, simulates the followup panel from the
/// observed baselines for tau rounds and records the distance to the
/// observed statistic. Draw s uses the stream derive_seed(seed, {s, c}) for
/// network c, so results do not depend on the thread count.
AbcDraws abc_simulate(const NetworkPanel& panel, const Estimand& estimand, const AbcConfig& cfg);

/// Applies the kernel. The smooth kernel's coin for draw s comes from
/// derive_seed(seed, {s}). Throws ToleranceError when nothing is accepted.
AbcResult abc_accept(const AbcDraws& draws, const KernelSpec& kernel, std::uint64_t seed,
                     const std::vector<std::string>& names = {});

AbcResult abc_run(const NetworkPanel& panel, const Estimand& estimand, const AbcConfig& cfg,
                  const KernelSpec& kernel);

/// Empirical quantile of the pilot distances at target_rate: the
/// ceil(rate * n)-th smallest. Throws ConfigError on an empty pilot or a
/// rate outside (0, 1].
double choose_epsilon(std::vector<double> pilot, double target_rate);

}  // namespace netform
