#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "netform/covariates.hpp"
#include "netform/network.hpp"
#include "netform/params.hpp"
#include "netform/rng.hpp"

namespace netform {

/// Distribution of eps(1) - eps(0). Independent EV1 shocks have a logistic
/// difference, so both families share one acceptance function.
enum class ShockFamily { Logistic, IndependentEV1 };

struct ShockSpec {
  ShockFamily family = ShockFamily::Logistic;
};

/// Probability of choosing the link when it raises utility by du:
/// 1/(1+exp(-du)), evaluated without overflow. Saturates to exactly 0 or 1
/// once |du| exceeds roughly 745.
double accept_prob(double du, ShockSpec shocks = {}) noexcept;

struct SimConfig {
  std::size_t n_rounds = 1;
  std::uint64_t seed = 0;
  bool record_trajectory = false;
};

/// Replacement rules used by counterfactual scenarios. Model means the
/// parametrized matching function or choice probability.
enum class MeetingRule { Model, Uniform };
enum class ChoiceRule { Model, CoinFlip };

struct Dynamics {
  MeetingRule meeting = MeetingRule::Model;
  ChoiceRule choice = ChoiceRule::Model;
};

struct StepCounters {
  std::uint64_t meetings = 0;
  std::uint64_t chose_link = 0;
  std::uint64_t changed = 0;
};

struct UtilityParts {
  double direct = 0.0;
  double mutual = 0.0;
  double indirect = 0.0;
  double popularity = 0.0;
  double total() const noexcept { return direct + mutual + indirect + popularity; }
  UtilityParts& operator+=(const UtilityParts& o) noexcept {
    direct += o.direct;
    mutual += o.mutual;
    indirect += o.indirect;
    popularity += o.popularity;
    return *this;
  }
};

struct SimResult {
  Network final;
  std::vector<Network> trajectory;  // g0 .. g_tau when recorded
  StepCounters counters;
};

/// The game on one classroom with coefficients bound to its covariates.
/// Per-pair utility weights and matching exponents are precomputed, so
/// marginal utilities cost O(N) and a round costs O(N^2).
class GameModel {
 public:
  /// Throws ConfigError when beta's covariate length differs from X's.
  GameModel(const CovariateSet& X, const ParamVector& beta, ShockSpec shocks = {});

  /// Rebinds coefficients, reusing storage. Same error contract as the ctor.
  void set_params(const ParamVector& beta);

  std::size_t n_agents() const noexcept { return n_; }
  std::size_t n_pairs() const noexcept { return pair_count(n_); }
  const CovariateSet& covariates() const noexcept { return x_; }
  const ParamVector& params() const noexcept { return beta_; }
  ShockSpec shocks() const noexcept { return shocks_; }

  // beta_ud'(1,W_ij), beta_ur'(1,W_ij), beta_un'(1,W_ij).
  double direct_weight(std::size_t i, std::size_t j) const noexcept { return a_[i * n_ + j]; }
  double mutual_weight(std::size_t i, std::size_t j) const noexcept { return m_[i * n_ + j]; }
  double indirect_weight(std::size_t i, std::size_t j) const noexcept { return nw_[i * n_ + j]; }

  double utility(std::size_t i, const Network& g) const noexcept;
  UtilityParts utility_parts(std::size_t i, const Network& g) const noexcept;
  /// Sum over agents.
  UtilityParts welfare_parts(const Network& g) const noexcept;

  /// u_i([1,g_-ij]) - u_i([0,g_-ij]).
  double marginal_utility(std::size_t i, std::size_t j, const Network& g) const noexcept;
  /// Probability that (i,j) is linked after a meeting.
  double link_prob(std::size_t i, std::size_t j, const Network& g) const noexcept {
    return accept_prob(marginal_utility(i, j, g), shocks_);
  }

  /// Matching exponent for pair p given whether it is currently linked.
  double meeting_exponent(std::size_t p, bool linked) const noexcept {
    return linked ? e1_[p] : e0_[p];
  }
  /// exp(meeting_exponent - c) for a model-wide constant c; safe from overflow.
  double meeting_weight(std::size_t p, bool linked) const noexcept {
    return linked ? w1_[p] : w0_[p];
  }
  /// Meeting probabilities in pair_index order.
  std::vector<double> meeting_probs(const Network& g) const;
  /// Writes unnormalized weights into w (size n_pairs) and returns their sum.
  double meeting_weights(const Network& g, std::vector<double>& w) const;

  /// One round: draws a pair, then the choice. Consumes exactly two uniforms.
  void step(Network& g, Rng& rng, const Dynamics& dyn = {}, StepCounters* counters = nullptr) const;

  SimResult simulate(const Network& g0, const SimConfig& cfg, const Dynamics& dyn = {}) const;
  /// Runs n_rounds from g in place with the given stream.
  void advance(Network& g, std::size_t n_rounds, Rng& rng, const Dynamics& dyn = {},
               StepCounters* counters = nullptr) const;

 private:
  void check(const Network& g) const;

  CovariateSet x_;
  ParamVector beta_;
  ShockSpec shocks_;
  std::size_t n_;
  std::vector<double> a_, m_, nw_;  // N*N, row-major
  std::vector<double> e0_, e1_;     // per pair: exponent when unlinked / linked
  double e_shift_ = 0.0;            // max exponent, for stable weights
  std::vector<double> w0_, w1_;     // exp(e - shift)
};

// Free-function forms. Each builds a GameModel and validates dimensions.
double utility(std::size_t agent, const Network& g, const CovariateSet& X, const ParamVector& beta);
double marginal_utility(std::size_t i, std::size_t j, const Network& g, const CovariateSet& X,
                        const ParamVector& beta);
std::vector<double> meeting_probs(const Network& g, const CovariateSet& X, const ParamVector& beta);
Network step(const Network& g, const CovariateSet& X, const ParamVector& beta, ShockSpec shocks,
             Rng& rng);
SimResult simulate(const Network& g0, const CovariateSet& X, const ParamVector& beta,
                   ShockSpec shocks, const SimConfig& cfg);

}  // namespace netform
