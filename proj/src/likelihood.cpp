#include "netform/likelihood.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "netform/error.hpp"
#include "netform/exact_chain.hpp"

namespace netform {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

class WalkSum {
 public:
  WalkSum(const GameModel& model, std::uint64_t target, std::size_t tau,
          const LikelihoodOptions& opt)
      : model_(model), target_(target), opt_(opt), memo_(tau + 1) {}

  double log_reach(std::uint64_t s, std::size_t left) {
    if (opt_.prune && static_cast<std::size_t>(std::popcount(s ^ target_)) > left) return kNegInf;
    if (left == 0) return s == target_ ? 0.0 : kNegInf;
    auto& level = memo_[left];
    if (auto it = level.find(s); it != level.end()) return it->second;

    const std::vector<Successor>& row = successors_of(s);
    std::vector<double> terms;
    terms.reserve(row.size());
    double hi = kNegInf;
    for (const auto& nx : row) {
      if (!(nx.prob > 0.0)) continue;
      const double v = log_reach(nx.code, left - 1);
      if (v == kNegInf) continue;
      terms.push_back(std::log(nx.prob) + v);
      hi = std::max(hi, terms.back());
    }
    double result = kNegInf;
    if (hi != kNegInf) {
      double acc = 0.0;
      for (double t : terms) acc += std::exp(t - hi);
      result = hi + std::log(acc);
    }
    if (++nodes_ > opt_.node_budget)
      throw CapacityError("exact likelihood exceeded the node budget of " +
                          std::to_string(opt_.node_budget) +
                          " states; use ABC for this configuration");
    level.emplace(s, result);
    return result;
  }

  std::size_t nodes() const noexcept { return nodes_; }

 private:
  const std::vector<Successor>& successors_of(std::uint64_t s) {
    auto it = rows_.find(s);
    if (it != rows_.end()) return it->second;
    std::vector<Successor> row;
    successors(model_, s, row);
    return rows_.emplace(s, std::move(row)).first->second;
  }

  const GameModel& model_;
  std::uint64_t target_;
  LikelihoodOptions opt_;
  std::vector<std::unordered_map<std::uint64_t, double>> memo_;
  std::unordered_map<std::uint64_t, std::vector<Successor>> rows_;
  std::size_t nodes_ = 0;
};

}  // namespace

double exact_loglik(const GameModel& model, const Network& g0, const Network& g1, std::size_t tau,
                    const LikelihoodOptions& opt, LikelihoodStats* stats) {
  if (g0.size() != model.n_agents() || g1.size() != model.n_agents())
    throw ConfigError("exact_loglik: network sizes do not match the covariates");
  if (model.n_pairs() > 64)
    throw CapacityError("exact likelihood needs N(N-1) <= 64, got N=" +
                        std::to_string(model.n_agents()));
  WalkSum walk(model, g1.code(), tau, opt);
  const double v = walk.log_reach(g0.code(), tau);
  if (stats) stats->nodes = walk.nodes();
  return v;
}

double exact_loglik(const Network& g0, const Network& g1, const CovariateSet& X,
                    const ParamVector& beta, ShockSpec shocks, std::size_t tau,
                    const LikelihoodOptions& opt) {
  return exact_loglik(GameModel(X, beta, shocks), g0, g1, tau, opt);
}

double panel_loglik(const NetworkPanel& panel, const ParamVector& beta, ShockSpec shocks,
                    std::size_t tau, const LikelihoodOptions& opt) {
  double total = 0.0;
  for (const auto& o : panel.observations) {
    try {
      total += exact_loglik(GameModel(o.covariates, beta, shocks), o.baseline, o.followup, tau, opt);
    } catch (const CapacityError& e) {
      throw CapacityError("network '" + o.id + "': " + e.what());
    }
  }
  return total;
}

}  // namespace netform
