#include "netform/exact_chain.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "netform/error.hpp"
#include "netform/format.hpp"

namespace netform {

void successors(const GameModel& model, std::uint64_t code, std::vector<Successor>& out) {
  const std::size_t n = model.n_agents();
  const std::size_t P = model.n_pairs();
  if (P > 64) throw CapacityError("state codes need N(N-1) <= 64");
  const Network g = Network::from_code(n, code);
  out.clear();
  double total = 0.0;
  for (std::size_t p = 0; p < P; ++p) total += model.meeting_weight(p, (code >> p) & 1U);
  double stay = 0.0;
  std::size_t p = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const bool linked = (code >> p) & 1U;
      const double rho = model.meeting_weight(p, linked) / total;
      const double f = model.link_prob(i, j, g);
      const double move = rho * (linked ? 1.0 - f : f);
      stay += rho * (linked ? f : 1.0 - f);
      out.push_back({code ^ (std::uint64_t{1} << p), move});
      ++p;
    }
  out.push_back({code, stay});
}

TransitionMatrix build_transition(const GameModel& model) {
  const std::size_t P = model.n_pairs();
  if (P > kMaxExactPairs)
    throw CapacityError("exact chain needs N(N-1) <= " + std::to_string(kMaxExactPairs) +
                        ", got N=" + std::to_string(model.n_agents()));
  const std::uint64_t dim = std::uint64_t{1} << P;
  TransitionMatrix t;
  t.n_agents = model.n_agents();
  t.entries = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  std::vector<Successor> row;
  for (std::uint64_t g = 0; g < dim; ++g) {
    successors(model, g, row);
    for (const auto& s : row)
      t.entries(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(s.code)) += s.prob;
  }
  return t;
}

TransitionMatrix build_transition(const CovariateSet& X, const ParamVector& beta, ShockSpec shocks) {
  if (pair_count(X.n_agents()) > kMaxExactPairs)
    throw CapacityError("exact chain needs N(N-1) <= " + std::to_string(kMaxExactPairs) +
                        ", got N=" + std::to_string(X.n_agents()));
  return build_transition(GameModel(X, beta, shocks));
}

TransitionMatrix matrix_power(const TransitionMatrix& pi, std::size_t tau) {
  TransitionMatrix result{pi.n_agents, Eigen::MatrixXd::Identity(pi.entries.rows(), pi.entries.cols())};
  Eigen::MatrixXd base = pi.entries;
  bool first = true;
  while (tau > 0) {
    if (tau & 1U) {
      if (first) {
        result.entries = base;
        first = false;
      } else {
        result.entries = result.entries * base;
      }
    }
    tau >>= 1U;
    if (tau > 0) base = base * base;
  }
  return result;
}

StationaryResult stationary(const TransitionMatrix& pi, const StationaryOptions& opt) {
  const Eigen::Index d = pi.entries.rows();
  StationaryResult r;
  r.pi = Eigen::VectorXd::Constant(d, 1.0 / static_cast<double>(d));
  const Eigen::MatrixXd pt = pi.entries.transpose();
  Eigen::VectorXd next(d);
  for (std::size_t it = 1; it <= opt.max_iterations; ++it) {
    next.noalias() = pt * r.pi;
    next /= next.sum();
    r.residual = (next - r.pi).cwiseAbs().maxCoeff();
    r.pi.swap(next);
    r.iterations = it;
    if (r.residual < opt.tolerance) {
      // residual of the returned vector itself
      next.noalias() = pt * r.pi;
      r.residual = (next - r.pi).cwiseAbs().maxCoeff();
      if (r.residual < opt.tolerance) return r;
    }
  }
  throw NumericError("stationary distribution did not converge: residual " +
                     format_double(r.residual) + " after " + std::to_string(r.iterations) +
                     " iterations (tolerance " + format_double(opt.tolerance) + ")");
}

std::size_t count_positive_entries(const TransitionMatrix& m) {
  return static_cast<std::size_t>((m.entries.array() > 0.0).count());
}

std::uint64_t canonical_positive_count(std::size_t n_agents, std::size_t tau) {
  const std::size_t P = pair_count(n_agents);
  if (P > 31) throw CapacityError("canonical count overflows for N=" + std::to_string(n_agents));
  std::uint64_t sum = 0, binom = 1;
  for (std::size_t d = 0; d <= std::min(tau, P); ++d) {
    sum += binom;
    binom = binom * (P - d) / (d + 1);
  }
  return sum << P;
}

std::vector<std::size_t> reference_positive_counts(std::size_t n_agents) {
  CovariateSet x(n_agents, 0);
  const TransitionMatrix pi = build_transition(x, ParamVector(0));
  std::vector<std::size_t> out;
  TransitionMatrix power = pi;
  for (std::size_t tau = 1; tau <= pair_count(n_agents); ++tau) {
    if (tau > 1) power.entries = power.entries * pi.entries;
    out.push_back(count_positive_entries(power));
  }
  return out;
}

std::size_t infer_tau(const TransitionMatrix& power) {
  const std::size_t count = count_positive_entries(power);
  const std::size_t P = pair_count(power.n_agents);
  for (std::size_t tau = 1; tau <= P; ++tau)
    if (canonical_positive_count(power.n_agents, tau) == count) return tau;
  throw IdentificationError("positive-entry count " + std::to_string(count) +
                            " matches no tau <= N(N-1) = " + std::to_string(P));
}

double flow_balance_violation(const TransitionMatrix& pi, const Eigen::VectorXd& dist) {
  const Eigen::MatrixXd flow = dist.asDiagonal() * pi.entries;
  return (flow - flow.transpose()).cwiseAbs().maxCoeff();
}

double row_sum_error(const TransitionMatrix& m) {
  return (m.entries.rowwise().sum().array() - 1.0).abs().maxCoeff();
}

void write_transition_csv(std::ostream& os, const TransitionMatrix& m) {
  os << "from,to,value\n";
  for (Eigen::Index i = 0; i < m.entries.rows(); ++i)
    for (Eigen::Index j = 0; j < m.entries.cols(); ++j)
      if (m.entries(i, j) != 0.0) os << i << ',' << j << ',' << format_double(m.entries(i, j)) << '\n';
}

void write_stationary_csv(std::ostream& os, const Eigen::VectorXd& dist) {
  os << "state,probability\n";
  for (Eigen::Index i = 0; i < dist.size(); ++i) os << i << ',' << format_double(dist(i)) << '\n';
}

}  // namespace netform
