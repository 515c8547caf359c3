#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "netform/game.hpp"

namespace netform {

/// Dense transition matrix over all 2^{N(N-1)} networks. Row and column
/// indices are Network::code() values: bit p is the edge at pair_index p.
struct TransitionMatrix {
  std::size_t n_agents = 0;
  Eigen::MatrixXd entries;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(entries.rows()); }
  double operator()(std::uint64_t from, std::uint64_t to) const {
    return entries(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(to));
  }
};

/// Largest N(N-1) accepted by build_transition (dimension 4096).
inline constexpr std::size_t kMaxExactPairs = 12;

struct Successor {
  std::uint64_t code;
  double prob;
};

/// Nonzero entries of the row for state `code`: one per pair whose flip is
/// possible plus the merged stay probability (listed last). Requires
/// N(N-1) <= 64.
void successors(const GameModel& model, std::uint64_t code, std::vector<Successor>& out);

/// Throws CapacityError when N(N-1) > kMaxExactPairs.
TransitionMatrix build_transition(const GameModel& model);
TransitionMatrix build_transition(const CovariateSet& X, const ParamVector& beta,
                                  ShockSpec shocks = {});

/// Pi^tau by repeated squaring; tau = 0 gives the identity.
TransitionMatrix matrix_power(const TransitionMatrix& pi, std::size_t tau);

struct StationaryOptions {
  double tolerance = 1e-12;          // max-norm residual |Pi'pi - pi|
  std::size_t max_iterations = 2000000;
};

struct StationaryResult {
  Eigen::VectorXd pi;
  std::size_t iterations = 0;
  double residual = 0.0;
};

/// Power iteration from the uniform vector. Throws NumericError (with the
/// residual and iteration count) if the tolerance is not reached.
StationaryResult stationary(const TransitionMatrix& pi, const StationaryOptions& opt = {});

/// Number of strictly positive entries.
std::size_t count_positive_entries(const TransitionMatrix& m);

/// Positive-entry count of Pi^tau that every admissible parametrization
/// shares: (Pi^tau)_{gw} > 0 exactly when g and w differ in at most tau
/// edges, giving 2^P * sum_{d <= min(tau,P)} C(P, d) with P = N(N-1).
std::uint64_t canonical_positive_count(std::size_t n_agents, std::size_t tau);

/// Same counts obtained by powering the all-zero-coefficient chain, for
/// tau = 1..N(N-1). Used to cross-check the closed form.
std::vector<std::size_t> reference_positive_counts(std::size_t n_agents);

/// The unique tau <= N(N-1) whose canonical count matches the positive-entry
/// count of the given power. Throws IdentificationError when none does.
std::size_t infer_tau(const TransitionMatrix& power);

/// max_{g,w} |pi_g Pi_gw - pi_w Pi_wg|.
double flow_balance_violation(const TransitionMatrix& pi, const Eigen::VectorXd& dist);

/// Max deviation of any row sum from 1.
double row_sum_error(const TransitionMatrix& m);

/// CSV dumps: "from,to,value" for nonzero entries; "state,probability".
void write_transition_csv(std::ostream& os, const TransitionMatrix& m);
void write_stationary_csv(std::ostream& os, const Eigen::VectorXd& dist);

}  // namespace netform
