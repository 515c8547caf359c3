#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "netform/exact_chain.hpp"

namespace netform {

/// Chain primitives for an arbitrary small game: meeting probabilities per
/// state and the utility gain of each pair's link choice. The gain of pair p
/// is keyed by the state with bit p cleared, so F_p(g, w) + F_p(w, g) = 1 holds
/// by construction (F = logistic(+gain) when adding the link, logistic(-gain)
/// when removing it).
struct ChainPrimitives {
  std::size_t n_agents = 0;
  std::vector<double> rho;   // rho[state * P + p]
  std::vector<double> gain;  // gain[p * 2^P + (state with bit p cleared)]

  std::size_t n_pairs() const noexcept { return pair_count(n_agents); }
  std::size_t n_states() const noexcept { return std::size_t{1} << n_pairs(); }
  double& rho_at(std::uint64_t state, std::size_t p) { return rho[state * n_pairs() + p]; }
  double rho_at(std::uint64_t state, std::size_t p) const { return rho[state * n_pairs() + p]; }
  double& gain_at(std::size_t p, std::uint64_t state) {
    return gain[p * n_states() + (state & ~(std::uint64_t{1} << p))];
  }
  double gain_at(std::size_t p, std::uint64_t state) const {
    return gain[p * n_states() + (state & ~(std::uint64_t{1} << p))];
  }
  /// Probability of moving from `state` to its neighbour across pair p,
  /// given that p was met.
  double move_prob(std::size_t p, std::uint64_t state) const;
};

/// Throws CapacityError when N(N-1) > kMaxExactPairs.
ChainPrimitives primitives_from_model(const GameModel& model);
TransitionMatrix transition_from_primitives(const ChainPrimitives& prims);

/// The eight free parameters of the N=2 chain. State codes: bit 0 = g12,
/// bit 1 = g21, so (0,0),(1,0),(0,1),(1,1) are codes 0,1,2,3.
struct GammaVector {
  // x = [rho12(00), rho12(10), rho12(01), rho12(11),
  //      F12(00->10), F21(00->01), F12(01->11), F21(10->11)]
  std::array<double, 8> x{};

  double rho12(std::uint64_t code) const { return x[code]; }
  double rho21(std::uint64_t code) const { return 1.0 - x[code]; }
  /// F for moving across pair p (0 = (1,2), 1 = (2,1)) from state `code`.
  double move_prob(std::size_t p, std::uint64_t code) const;

  /// Throws ValidationError unless every entry is strictly inside (0,1).
  void validate() const;

  static GammaVector symmetric();
  static GammaVector from_primitives(const ChainPrimitives& prims);
  /// Inverse of from_primitives, with gains the logits of the F entries.
  ChainPrimitives to_primitives() const;
};

/// The 4x4 transition matrix implied by gamma. Validates gamma first.
TransitionMatrix gamma_to_pi(const GammaVector& gamma);

struct RecoverOptions {
  double tolerance = 1e-12;      // max-norm residual on the off-diagonal entries
  std::size_t max_newton = 200;
  double clip = 1e-9;
};

struct GammaRecovery {
  GammaVector gamma;
  double residual = 0.0;
  bool newton_converged = false;
  std::size_t newton_iterations = 0;
  /// Every admissible gamma reproducing the input, sorted by rho12(00).
  std::vector<GammaVector> solutions;
};

/// Solves the off-diagonal equations of an N=2 chain for gamma by damped
/// Newton from the symmetric point, falling back to bisection on rho12(00)
/// along the cycle of equations. Also enumerates all admissible roots of the
/// system. Throws IdentificationError if no admissible solution meets the
/// tolerance.
GammaRecovery recover_gamma(const TransitionMatrix& pi, const RecoverOptions& opt = {});

/// Max-norm distance between two gammas.
double gamma_distance(const GammaVector& a, const GammaVector& b);

struct ProbeRow {
  double t = 0.0;
  double estimate = 0.0;
  double target = 0.0;
  double gap = 0.0;        // |estimate - target|
  double complement = 0.0; // (Pi^tau)_gw + (Pi^tau)_gg where reported, else 0
};

/// Geometric grid {start, 2 start, 4 start, ...} with `count` points.
std::vector<double> geometric_path(double start, std::size_t count);

/// Index of the first path point from which successive estimates differ by
/// less than `tol`; returns path size when never.
std::size_t converged_at(const std::vector<ProbeRow>& rows, double tol = 1e-6);

/// Shifts gains along the instrument direction so that moving across `pair`
/// from `state` has probability -> 1 and every other move out of `state` has
/// probability -> 0. Estimates rho_pair(state) as 1 - ((Pi^tau)_gg)^(1/tau).
std::vector<ProbeRow> limit_probe_rho(const ChainPrimitives& prims, std::uint64_t state,
                                      std::size_t pair, std::size_t tau,
                                      const std::vector<double>& path);

/// Drives every move out of g and out of w (the neighbour across `pair`)
/// other than g<->w to probability 0, evaluates (Pi^tau)_gw and inverts the
/// limiting recursion for F_pair(g, w) given rho estimates from
/// limit_probe_rho at the same path value. `complement` reports
/// (Pi^tau)_gw + (Pi^tau)_gg. Throws IdentificationError if the inversion
/// fails to bracket.
std::vector<ProbeRow> limit_probe_F(const ChainPrimitives& prims, std::uint64_t state,
                                    std::size_t pair, std::size_t tau,
                                    const std::vector<double>& path);

/// Limiting (Pi^tau)_gw under the t** limit as a function of rho(g), rho(w)
/// and F(g,w); the second element is the limiting (Pi^tau)_gg.
std::array<double, 2> limit_recursion(double rho_g, double rho_w, double f, std::size_t tau);

/// Inverts limit_recursion for F by bisection.
double invert_limit_recursion(double target_gw, double rho_g, double rho_w, std::size_t tau);

/// Matching-side limit: multiplies the meeting weight of `pair` at g and at w
/// by e^t, leaving gains unchanged, so (Pi^tau)_gw -> F_pair(g, w).
std::vector<ProbeRow> limit_probe_matching(const ChainPrimitives& prims, std::uint64_t state,
                                           std::size_t pair, std::size_t tau,
                                           const std::vector<double>& path);

struct NonIdentResult {
  ChainPrimitives prims;
  TransitionMatrix pi;
  Eigen::VectorXd stationary;
};

/// Builds the chain with u_i(g) = ln pi0(g) for every agent and the given
/// meeting table (rho[state * P + p]), which must not depend on the pair's
/// own link. Throws ValidationError if pi0 is not a positive distribution or
/// the meeting table depends on the own link.
NonIdentResult nonident_construct(std::size_t n_agents, const std::vector<double>& pi0,
                                  const std::vector<double>& rho);

/// Meeting table that is the same in every state.
std::vector<double> constant_rho_table(std::size_t n_agents, const std::vector<double>& weights);

void write_probe_csv(std::ostream& os, const std::vector<ProbeRow>& rows);

}  // namespace netform
