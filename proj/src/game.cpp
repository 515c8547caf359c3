#include "netform/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "netform/error.hpp"

namespace netform {

double accept_prob(double du, ShockSpec) noexcept {
  if (du >= 0.0) return 1.0 / (1.0 + std::exp(-du));
  const double e = std::exp(du);
  return e / (1.0 + e);
}

GameModel::GameModel(const CovariateSet& X, const ParamVector& beta, ShockSpec shocks)
    : x_(X), shocks_(shocks), n_(X.n_agents()) {
  if (n_ < 2) throw ConfigError("a network needs at least 2 agents, got " + std::to_string(n_));
  a_.assign(n_ * n_, 0.0);
  m_.assign(n_ * n_, 0.0);
  nw_.assign(n_ * n_, 0.0);
  e0_.assign(n_pairs(), 0.0);
  e1_.assign(n_pairs(), 0.0);
  w0_.assign(n_pairs(), 0.0);
  w1_.assign(n_pairs(), 0.0);
  set_params(beta);
}

void GameModel::set_params(const ParamVector& beta) {
  const std::size_t k = x_.k();
  if (beta.k() != k)
    throw ConfigError("parameters are sized for k=" + std::to_string(beta.k()) +
                      " covariates but the covariate set has k=" + std::to_string(k));
  beta_ = beta;
  const auto bm = beta.matching();
  const auto bd = beta.direct();
  const auto br = beta.mutual();
  const auto bn = beta.indirect();
  const double d0 = beta.delta0();
  const double d1 = beta.delta1();
  e_shift_ = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) {
      if (i == j) continue;
      const auto w = x_.pair(i, j);
      double a = bd[0], m = br[0], nn = bn[0], xm = 0.0;
      for (std::size_t l = 0; l < k; ++l) {
        a += bd[l + 1] * w[l];
        m += br[l + 1] * w[l];
        nn += bn[l + 1] * w[l];
        xm += bm[l] * w[l];
      }
      a_[i * n_ + j] = a;
      m_[i * n_ + j] = m;
      nw_[i * n_ + j] = nn;
      const std::size_t p = pair_index(n_, i, j);
      e0_[p] = xm + d1 * x_.instrument(i, j);
      e1_[p] = xm + d0;
      e_shift_ = std::max({e_shift_, e0_[p], e1_[p]});
    }
  for (std::size_t p = 0; p < n_pairs(); ++p) {
    w0_[p] = std::exp(e0_[p] - e_shift_);
    w1_[p] = std::exp(e1_[p] - e_shift_);
  }
}

void GameModel::check(const Network& g) const {
  if (g.size() != n_)
    throw ConfigError("network has " + std::to_string(g.size()) + " agents, covariates have " +
                      std::to_string(n_));
}

UtilityParts GameModel::utility_parts(std::size_t i, const Network& g) const noexcept {
  UtilityParts u;
  for (std::size_t k = 0; k < n_; ++k) {
    if (k == i || !g(i, k)) continue;
    u.direct += a_[i * n_ + k];
    if (g(k, i)) u.mutual += m_[i * n_ + k];
    for (std::size_t l = 0; l < n_; ++l) {
      if (l == i || l == k) continue;
      if (g(k, l)) u.indirect += nw_[i * n_ + l];
      if (g(l, i)) u.popularity += nw_[k * n_ + l];
    }
  }
  return u;
}

double GameModel::utility(std::size_t i, const Network& g) const noexcept {
  return utility_parts(i, g).total();
}

UtilityParts GameModel::welfare_parts(const Network& g) const noexcept {
  UtilityParts total;
  for (std::size_t i = 0; i < n_; ++i) total += utility_parts(i, g);
  return total;
}

double GameModel::marginal_utility(std::size_t i, std::size_t j, const Network& g) const noexcept {
  double du = a_[i * n_ + j];
  if (g(j, i)) du += m_[i * n_ + j];
  for (std::size_t l = 0; l < n_; ++l) {
    if (l == i || l == j) continue;
    if (g(j, l)) du += nw_[i * n_ + l];
    if (g(l, i)) du += nw_[j * n_ + l];
  }
  return du;
}

double GameModel::meeting_weights(const Network& g, std::vector<double>& w) const {
  w.resize(n_pairs());
  double total = 0.0;
  std::size_t p = 0;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) {
      if (i == j) continue;
      w[p] = g(i, j) ? w1_[p] : w0_[p];
      total += w[p];
      ++p;
    }
  return total;
}

std::vector<double> GameModel::meeting_probs(const Network& g) const {
  check(g);
  std::vector<double> w;
  const double total = meeting_weights(g, w);
  for (auto& v : w) v /= total;
  return w;
}

void GameModel::step(Network& g, Rng& rng, const Dynamics& dyn, StepCounters* counters) const {
  const double u_meet = rng.uniform();
  const double u_choice = rng.uniform();
  const std::size_t P = n_pairs();

  std::size_t chosen = P - 1;
  if (dyn.meeting == MeetingRule::Uniform) {
    chosen = std::min(static_cast<std::size_t>(u_meet * static_cast<double>(P)), P - 1);
  } else {
    double total = 0.0;
    std::size_t p = 0;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) {
        if (i == j) continue;
        total += g(i, j) ? w1_[p] : w0_[p];
        ++p;
      }
    const double target = u_meet * total;
    double cum = 0.0;
    p = 0;
    for (std::size_t i = 0; i < n_ && chosen == P - 1; ++i)
      for (std::size_t j = 0; j < n_; ++j) {
        if (i == j) continue;
        cum += g(i, j) ? w1_[p] : w0_[p];
        if (target < cum) {
          chosen = p;
          break;
        }
        ++p;
      }
  }

  const Pair q = pair_from_index(n_, chosen);
  const double prob =
      dyn.choice == ChoiceRule::CoinFlip ? 0.5 : link_prob(q.sender, q.receiver, g);
  const bool link = u_choice < prob;
  if (counters) {
    ++counters->meetings;
    counters->chose_link += link;
    counters->changed += link != g(q.sender, q.receiver);
  }
  g.set_unchecked(q.sender, q.receiver, link);
}

void GameModel::advance(Network& g, std::size_t n_rounds, Rng& rng, const Dynamics& dyn,
                        StepCounters* counters) const {
  check(g);
  for (std::size_t t = 0; t < n_rounds; ++t) step(g, rng, dyn, counters);
}

SimResult GameModel::simulate(const Network& g0, const SimConfig& cfg, const Dynamics& dyn) const {
  check(g0);
  SimResult out;
  out.final = g0;
  Rng rng(cfg.seed);
  if (cfg.record_trajectory) {
    out.trajectory.reserve(cfg.n_rounds + 1);
    out.trajectory.push_back(g0);
  }
  for (std::size_t t = 0; t < cfg.n_rounds; ++t) {
    step(out.final, rng, dyn, &out.counters);
    if (cfg.record_trajectory) out.trajectory.push_back(out.final);
  }
  return out;
}

namespace {
void check_agent(std::size_t i, std::size_t n) {
  if (i >= n)
    throw ConfigError("agent " + std::to_string(i) + " out of range for N=" + std::to_string(n));
}
void check_network(const Network& g, const CovariateSet& X) {
  if (g.size() != X.n_agents())
    throw ConfigError("network has " + std::to_string(g.size()) + " agents, covariates have " +
                      std::to_string(X.n_agents()));
}
}  // namespace

double utility(std::size_t agent, const Network& g, const CovariateSet& X, const ParamVector& beta) {
  check_network(g, X);
  check_agent(agent, g.size());
  return GameModel(X, beta).utility(agent, g);
}

double marginal_utility(std::size_t i, std::size_t j, const Network& g, const CovariateSet& X,
                        const ParamVector& beta) {
  check_network(g, X);
  check_agent(i, g.size());
  check_agent(j, g.size());
  if (i == j) throw ConfigError("marginal utility needs i != j");
  return GameModel(X, beta).marginal_utility(i, j, g);
}

std::vector<double> meeting_probs(const Network& g, const CovariateSet& X, const ParamVector& beta) {
  check_network(g, X);
  return GameModel(X, beta).meeting_probs(g);
}

Network step(const Network& g, const CovariateSet& X, const ParamVector& beta, ShockSpec shocks,
             Rng& rng) {
  check_network(g, X);
  Network out = g;
  GameModel(X, beta, shocks).step(out, rng);
  return out;
}

SimResult simulate(const Network& g0, const CovariateSet& X, const ParamVector& beta,
                   ShockSpec shocks, const SimConfig& cfg) {
  check_network(g0, X);
  return GameModel(X, beta, shocks).simulate(g0, cfg);
}

}  // namespace netform
