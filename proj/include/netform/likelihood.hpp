#pragma once

#include <cstddef>

#include "netform/game.hpp"
#include "netform/panel.hpp"

namespace netform {

struct LikelihoodOptions {
  std::size_t node_budget = 10'000'000;  // memoized (state, rounds-left) entries
  bool prune = true;  // drop states farther from the target than the rounds left
};

struct LikelihoodStats {
  std::size_t nodes = 0;
};

/// ln (Pi^tau)_{g0,g1}: the log-probability of all walks from g0 to g1 in
/// tau rounds, summed by a memoized depth-first recursion in the log domain.
/// Returns -inf when g1 is unreachable. Throws CapacityError when the node
/// budget is exhausted or N(N-1) > 64.
double exact_loglik(const GameModel& model, const Network& g0, const Network& g1, std::size_t tau,
                    const LikelihoodOptions& opt = {}, LikelihoodStats* stats = nullptr);

double exact_loglik(const Network& g0, const Network& g1, const CovariateSet& X,
                    const ParamVector& beta, ShockSpec shocks, std::size_t tau,
                    const LikelihoodOptions& opt = {});

/// Sum of exact_loglik over the panel's networks. Capacity errors name the
/// offending network.
double panel_loglik(const NetworkPanel& panel, const ParamVector& beta, ShockSpec shocks,
                    std::size_t tau, const LikelihoodOptions& opt = {});

}  // namespace netform
