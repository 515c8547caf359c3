#include "netform/ident.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "netform/error.hpp"
#include "netform/format.hpp"

namespace netform {

double ChainPrimitives::move_prob(std::size_t p, std::uint64_t state) const {
  const double g = gain_at(p, state);
  return ((state >> p) & 1U) ? accept_prob(-g) : accept_prob(g);
}

ChainPrimitives primitives_from_model(const GameModel& model) {
  const std::size_t P = model.n_pairs();
  if (P > kMaxExactPairs)
    throw CapacityError("chain primitives need N(N-1) <= " + std::to_string(kMaxExactPairs));
  ChainPrimitives out;
  out.n_agents = model.n_agents();
  const std::size_t S = out.n_states();
  out.rho.assign(S * P, 0.0);
  out.gain.assign(P * S, 0.0);
  for (std::uint64_t s = 0; s < S; ++s) {
    double total = 0.0;
    for (std::size_t p = 0; p < P; ++p) total += model.meeting_weight(p, (s >> p) & 1U);
    for (std::size_t p = 0; p < P; ++p)
      out.rho_at(s, p) = model.meeting_weight(p, (s >> p) & 1U) / total;
  }
  for (std::size_t p = 0; p < P; ++p) {
    const Pair q = pair_from_index(out.n_agents, p);
    for (std::uint64_t s = 0; s < S; ++s) {
      if ((s >> p) & 1U) continue;
      out.gain_at(p, s) =
          model.marginal_utility(q.sender, q.receiver, Network::from_code(out.n_agents, s));
    }
  }
  return out;
}

TransitionMatrix transition_from_primitives(const ChainPrimitives& prims) {
  const std::size_t P = prims.n_pairs();
  if (P > kMaxExactPairs)
    throw CapacityError("exact chain needs N(N-1) <= " + std::to_string(kMaxExactPairs));
  const std::size_t S = prims.n_states();
  TransitionMatrix t{prims.n_agents, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(S),
                                                           static_cast<Eigen::Index>(S))};
  for (std::uint64_t s = 0; s < S; ++s)
    for (std::size_t p = 0; p < P; ++p) {
      const double rho = prims.rho_at(s, p);
      const double m = prims.move_prob(p, s);
      const auto r = static_cast<Eigen::Index>(s);
      t.entries(r, static_cast<Eigen::Index>(s ^ (std::uint64_t{1} << p))) += rho * m;
      t.entries(r, r) += rho * (1.0 - m);
    }
  return t;
}

// --- N = 2 -----------------------------------------------------------------

double GammaVector::move_prob(std::size_t p, std::uint64_t code) const {
  const bool linked = (code >> p) & 1U;
  double add;
  if (p == 0)
    add = (code & 2U) ? x[6] : x[4];
  else
    add = (code & 1U) ? x[7] : x[5];
  return linked ? 1.0 - add : add;
}

void GammaVector::validate() const {
  for (std::size_t k = 0; k < x.size(); ++k)
    if (!(x[k] > 0.0 && x[k] < 1.0))
      throw ValidationError("gamma entry " + std::to_string(k) + " = " + format_double(x[k]) +
                            " is not strictly inside (0,1)");
}

GammaVector GammaVector::symmetric() {
  GammaVector g;
  g.x.fill(0.5);
  return g;
}

GammaVector GammaVector::from_primitives(const ChainPrimitives& prims) {
  if (prims.n_agents != 2) throw ConfigError("gamma vectors describe N=2 chains only");
  GammaVector g;
  for (std::uint64_t c = 0; c < 4; ++c) g.x[c] = prims.rho_at(c, 0);
  g.x[4] = prims.move_prob(0, 0);
  g.x[5] = prims.move_prob(1, 0);
  g.x[6] = prims.move_prob(0, 2);
  g.x[7] = prims.move_prob(1, 1);
  return g;
}

ChainPrimitives GammaVector::to_primitives() const {
  validate();
  ChainPrimitives prims;
  prims.n_agents = 2;
  prims.rho.assign(8, 0.0);
  prims.gain.assign(8, 0.0);
  for (std::uint64_t c = 0; c < 4; ++c) {
    prims.rho_at(c, 0) = x[c];
    prims.rho_at(c, 1) = 1.0 - x[c];
  }
  const auto logit = [](double f) { return std::log(f / (1.0 - f)); };
  prims.gain_at(0, 0) = logit(x[4]);
  prims.gain_at(1, 0) = logit(x[5]);
  prims.gain_at(0, 2) = logit(x[6]);
  prims.gain_at(1, 1) = logit(x[7]);
  return prims;
}

TransitionMatrix gamma_to_pi(const GammaVector& gamma) {
  gamma.validate();
  TransitionMatrix t{2, Eigen::MatrixXd::Zero(4, 4)};
  for (std::uint64_t s = 0; s < 4; ++s)
    for (std::size_t p = 0; p < 2; ++p) {
      const double rho = p == 0 ? gamma.rho12(s) : gamma.rho21(s);
      const double m = gamma.move_prob(p, s);
      const auto r = static_cast<Eigen::Index>(s);
      t.entries(r, static_cast<Eigen::Index>(s ^ (1U << p))) += rho * m;
      t.entries(r, r) += rho * (1.0 - m);
    }
  return t;
}

double gamma_distance(const GammaVector& a, const GammaVector& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < 8; ++k) d = std::max(d, std::abs(a.x[k] - b.x[k]));
  return d;
}

namespace {

using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat8 = Eigen::Matrix<double, 8, 8>;

// Off-diagonal observations in the order used by the residual equations.
Vec8 observed(const TransitionMatrix& pi) {
  Vec8 p;
  p << pi(0, 1), pi(0, 2), pi(1, 0), pi(1, 3), pi(2, 0), pi(2, 3), pi(3, 1), pi(3, 2);
  return p;
}

Vec8 residual(const Vec8& x, const Vec8& p) {
  const double a = x[0], b = x[1], c = x[2], d = x[3];
  const double f1 = x[4], f2 = x[5], f3 = x[6], f4 = x[7];
  Vec8 r;
  r << a * f1, (1 - a) * f2, b * (1 - f1), (1 - b) * f4, (1 - c) * (1 - f2), c * f3,
      (1 - d) * (1 - f4), d * (1 - f3);
  return r - p;
}

Mat8 jacobian(const Vec8& x) {
  const double a = x[0], b = x[1], c = x[2], d = x[3];
  const double f1 = x[4], f2 = x[5], f3 = x[6], f4 = x[7];
  Mat8 j = Mat8::Zero();
  j(0, 0) = f1;        j(0, 4) = a;
  j(1, 0) = -f2;       j(1, 5) = 1 - a;
  j(2, 1) = 1 - f1;    j(2, 4) = -b;
  j(3, 1) = -f4;       j(3, 7) = 1 - b;
  j(4, 2) = -(1 - f2); j(4, 5) = -(1 - c);
  j(5, 2) = f3;        j(5, 6) = c;
  j(6, 3) = -(1 - f4); j(6, 7) = -(1 - d);
  j(7, 3) = 1 - f3;    j(7, 6) = -d;
  return j;
}

// Runs the cycle of equations from rho12(00) = a. Returns false when an
// intermediate leaves (0,1) or divides by zero.
bool cycle(double a, const Vec8& p, Vec8& x, double& resid) {
  auto inside = [](double v) { return v > 0.0 && v < 1.0 && std::isfinite(v); };
  x[0] = a;
  x[4] = p[0] / a;
  if (!inside(x[4])) return false;
  x[1] = p[2] / (1 - x[4]);
  if (!inside(x[1])) return false;
  x[7] = p[3] / (1 - x[1]);
  if (!inside(x[7])) return false;
  x[3] = 1 - p[6] / (1 - x[7]);
  if (!inside(x[3])) return false;
  x[6] = 1 - p[7] / x[3];
  if (!inside(x[6])) return false;
  x[2] = p[5] / x[6];
  if (!inside(x[2])) return false;
  x[5] = 1 - p[4] / (1 - x[2]);
  if (!inside(x[5])) return false;
  resid = (1 - a) * x[5] - p[1];
  return true;
}

GammaVector to_gamma(const Vec8& x) {
  GammaVector g;
  for (int k = 0; k < 8; ++k) g.x[static_cast<std::size_t>(k)] = x[k];
  return g;
}

Vec8 clip(Vec8 x, double lo) {
  for (int k = 0; k < 8; ++k) x[k] = std::clamp(x[k], lo, 1.0 - lo);
  return x;
}

struct NewtonOut {
  Vec8 x;
  double residual;
  std::size_t iterations;
};

NewtonOut newton(Vec8 x, const Vec8& p, const RecoverOptions& opt) {
  double norm = residual(x, p).cwiseAbs().maxCoeff();
  std::size_t it = 0;
  for (; it < opt.max_newton && norm > opt.tolerance * 1e-2; ++it) {
    const Vec8 step = jacobian(x).fullPivLu().solve(-residual(x, p));
    if (!step.allFinite()) break;
    double lambda = 1.0;
    bool improved = false;
    while (lambda > 1e-10) {
      const Vec8 trial = clip(x + lambda * step, opt.clip);
      const double n = residual(trial, p).cwiseAbs().maxCoeff();
      if (n < norm) {
        x = trial;
        norm = n;
        improved = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!improved) break;
  }
  return {x, norm, it};
}

// Fixed points of the cycle map a -> a' as the roots of a quadratic: every
// step of the cycle is a linear-fractional map of the previous unknown.
std::vector<double> cycle_roots(const Vec8& p) {
  using M2 = Eigen::Matrix2d;
  auto m = [](double a, double b, double c, double d) {
    M2 r;
    r << a, b, c, d;
    return r;
  };
  const M2 steps[] = {
      m(0, p[0], 1, 0),            // F1 = p1 / a
      m(0, p[2], -1, 1),           // b = p3 / (1 - F1)
      m(0, p[3], -1, 1),           // F4 = p4 / (1 - b)
      m(-1, 1 - p[6], -1, 1),      // d = 1 - p7 / (1 - F4)
      m(1, -p[7], 1, 0),           // F3 = 1 - p8 / d
      m(0, p[5], 1, 0),            // c = p6 / F3
      m(-1, 1 - p[4], -1, 1),      // F2 = 1 - p5 / (1 - c)
      m(1, -p[1], 1, 0),           // a' = 1 - p2 / F2
  };
  M2 total = M2::Identity();
  for (const auto& s : steps) total = s * total;
  total /= total.cwiseAbs().maxCoeff();
  // a = (A a + B) / (C a + D)  <=>  C a^2 + (D - A) a - B = 0
  const double A = total(0, 0), B = total(0, 1), C = total(1, 0), D = total(1, 1);
  std::vector<double> roots;
  if (std::abs(C) < 1e-300) {
    if (std::abs(D - A) > 0) roots.push_back(B / (D - A));
    return roots;
  }
  double disc = (D - A) * (D - A) + 4 * C * B;
  const double scale = (D - A) * (D - A) + std::abs(4 * C * B);
  if (disc < 0 && disc > -1e-12 * scale) disc = 0;
  if (disc < 0) return roots;
  const double sq = std::sqrt(disc);
  // numerically stable pair of roots
  const double qq = -0.5 * ((D - A) + std::copysign(sq, D - A));
  if (qq != 0) {
    roots.push_back(qq / C);
    roots.push_back(-B / qq);
  } else {
    roots.push_back(-(D - A) / (2 * C));
  }
  return roots;
}

}  // namespace

GammaRecovery recover_gamma(const TransitionMatrix& pi, const RecoverOptions& opt) {
  if (pi.n_agents != 2 || pi.dim() != 4)
    throw ConfigError("recover_gamma needs a 4x4 chain for N=2");
  const Vec8 p = observed(pi);
  for (int k = 0; k < 8; ++k)
    if (!(p[k] > 0.0))
      throw IdentificationError("off-diagonal transition " + std::to_string(k) +
                                " is not positive; the chain is not admissible");

  GammaRecovery out;

  // All admissible roots of the system.
  for (double a : cycle_roots(p)) {
    Vec8 x;
    double r;
    if (!(a > 0 && a < 1) || !cycle(a, p, x, r)) continue;
    const NewtonOut polished = newton(x, p, opt);
    if (polished.residual > opt.tolerance) continue;
    const GammaVector g = to_gamma(polished.x);
    const bool dup = std::any_of(out.solutions.begin(), out.solutions.end(),
                                 [&](const GammaVector& s) { return gamma_distance(s, g) < 1e-9; });
    if (!dup) out.solutions.push_back(g);
  }
  std::sort(out.solutions.begin(), out.solutions.end(),
            [](const GammaVector& u, const GammaVector& v) { return u.x[0] < v.x[0]; });

  // Damped Newton from the symmetric point.
  Vec8 start = Vec8::Constant(0.5);
  const NewtonOut nt = newton(start, p, opt);
  out.newton_iterations = nt.iterations;
  if (nt.residual <= opt.tolerance) {
    out.newton_converged = true;
    out.gamma = to_gamma(nt.x);
    out.residual = nt.residual;
    return out;
  }

  // Fallback: bisection on rho12(00) over the admissible part of (0,1).
  const std::size_t grid = 4096;
  Vec8 x, xl;
  double rl = 0, r = 0;
  bool have_left = false;
  for (std::size_t k = 1; k < grid; ++k) {
    const double a = static_cast<double>(k) / static_cast<double>(grid);
    if (!cycle(a, p, x, r)) {
      have_left = false;
      continue;
    }
    if (have_left && (rl <= 0) != (r <= 0)) {
      double lo = a - 1.0 / static_cast<double>(grid), hi = a;
      double flo = rl;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        double fm;
        if (!cycle(mid, p, xl, fm)) break;
        if ((fm <= 0) == (flo <= 0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      double fr;
      if (cycle(0.5 * (lo + hi), p, xl, fr)) {
        const NewtonOut polished = newton(xl, p, opt);
        if (polished.residual <= opt.tolerance) {
          out.gamma = to_gamma(polished.x);
          out.residual = polished.residual;
          return out;
        }
      }
    }
    rl = r;
    have_left = true;
  }
  if (!out.solutions.empty()) {
    out.gamma = out.solutions.front();
    out.residual = residual(Eigen::Map<const Vec8>(out.gamma.x.data()), p).cwiseAbs().maxCoeff();
    return out;
  }
  throw IdentificationError("gamma recovery failed: best Newton residual " +
                            format_double(nt.residual) + " exceeds tolerance " +
                            format_double(opt.tolerance));
}

// --- limit probes -----------------------------------------------------------

std::vector<double> geometric_path(double start, std::size_t count) {
  std::vector<double> out;
  double t = start;
  for (std::size_t k = 0; k < count; ++k, t *= 2) out.push_back(t);
  return out;
}

std::size_t converged_at(const std::vector<ProbeRow>& rows, double tol) {
  for (std::size_t k = 1; k < rows.size(); ++k)
    if (std::abs(rows[k].estimate - rows[k - 1].estimate) < tol) return k;
  return rows.size();
}

namespace {

void check_probe(const ChainPrimitives& prims, std::uint64_t state, std::size_t pair,
                 std::size_t tau) {
  if (prims.n_pairs() > kMaxExactPairs)
    throw CapacityError("limit probes need N(N-1) <= " + std::to_string(kMaxExactPairs));
  if (state >= prims.n_states()) throw ConfigError("probe state out of range");
  if (pair >= prims.n_pairs()) throw ConfigError("probe pair out of range");
  if (tau == 0) throw ConfigError("probe needs tau >= 1");
}

// Shifts the gain of pair q so the move out of `state` has probability
// logistic(base -/+ t): sign = +1 pushes it to 1, -1 to 0.
void push_move(ChainPrimitives& prims, std::size_t q, std::uint64_t state, double t, int sign) {
  const bool linked = (state >> q) & 1U;
  prims.gain_at(q, state) += (linked ? -1.0 : 1.0) * sign * t;
}

double rho_estimate(const ChainPrimitives& prims, std::uint64_t g, std::size_t pair,
                    std::size_t tau, double t) {
  ChainPrimitives shifted = prims;
  for (std::size_t q = 0; q < prims.n_pairs(); ++q) push_move(shifted, q, g, t, q == pair ? 1 : -1);
  const TransitionMatrix power = matrix_power(transition_from_primitives(shifted), tau);
  const double stay = power(g, g);
  return 1.0 - std::pow(stay, 1.0 / static_cast<double>(tau));
}

}  // namespace

std::vector<ProbeRow> limit_probe_rho(const ChainPrimitives& prims, std::uint64_t state,
                                      std::size_t pair, std::size_t tau,
                                      const std::vector<double>& path) {
  check_probe(prims, state, pair, tau);
  std::vector<ProbeRow> rows;
  const double target = prims.rho_at(state, pair);
  for (double t : path) {
    ProbeRow r;
    r.t = t;
    r.estimate = rho_estimate(prims, state, pair, tau, t);
    r.target = target;
    r.gap = std::abs(r.estimate - target);
    rows.push_back(r);
  }
  return rows;
}

std::array<double, 2> limit_recursion(double rho_g, double rho_w, double f, std::size_t tau) {
  double gg = 1.0, gw = 0.0;
  for (std::size_t s = 0; s < tau; ++s) {
    const double ngw = gg * rho_g * f + gw * (1.0 - rho_w * (1.0 - f));
    const double ngg = gg * (1.0 - rho_g * f) + gw * rho_w * (1.0 - f);
    gw = ngw;
    gg = ngg;
  }
  return {gw, gg};
}

double invert_limit_recursion(double target_gw, double rho_g, double rho_w, std::size_t tau) {
  double lo = 0.0, hi = 1.0;
  const double flo = limit_recursion(rho_g, rho_w, lo, tau)[0] - target_gw;
  const double fhi = limit_recursion(rho_g, rho_w, hi, tau)[0] - target_gw;
  if (flo > 0 || fhi < 0)
    throw IdentificationError("limit inversion: target " + format_double(target_gw) +
                              " is outside the range of the limiting map");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (limit_recursion(rho_g, rho_w, mid, tau)[0] < target_gw)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<ProbeRow> limit_probe_F(const ChainPrimitives& prims, std::uint64_t state,
                                    std::size_t pair, std::size_t tau,
                                    const std::vector<double>& path) {
  check_probe(prims, state, pair, tau);
  const std::uint64_t g = state;
  const std::uint64_t w = state ^ (std::uint64_t{1} << pair);
  const double target = prims.move_prob(pair, g);
  std::vector<ProbeRow> rows;
  for (double t : path) {
    ChainPrimitives shifted = prims;
    for (std::size_t q = 0; q < prims.n_pairs(); ++q) {
      if (q == pair) continue;
      push_move(shifted, q, g, t, -1);
      push_move(shifted, q, w, t, -1);
    }
    const TransitionMatrix power = matrix_power(transition_from_primitives(shifted), tau);
    const double rho_g = rho_estimate(prims, g, pair, tau, t);
    const double rho_w = rho_estimate(prims, w, pair, tau, t);
    ProbeRow r;
    r.t = t;
    r.estimate = invert_limit_recursion(power(g, w), rho_g, rho_w, tau);
    r.target = target;
    r.gap = std::abs(r.estimate - target);
    r.complement = power(g, w) + power(g, g);
    rows.push_back(r);
  }
  return rows;
}

std::vector<ProbeRow> limit_probe_matching(const ChainPrimitives& prims, std::uint64_t state,
                                           std::size_t pair, std::size_t tau,
                                           const std::vector<double>& path) {
  check_probe(prims, state, pair, tau);
  const std::uint64_t g = state;
  const std::uint64_t w = state ^ (std::uint64_t{1} << pair);
  const double target = prims.move_prob(pair, g);
  std::vector<ProbeRow> rows;
  for (double t : path) {
    ChainPrimitives shifted = prims;
    for (std::uint64_t s : {g, w}) {
      const double boost = std::exp(t);
      double total = 0.0;
      for (std::size_t q = 0; q < prims.n_pairs(); ++q)
        total += q == pair ? prims.rho_at(s, q) * boost : prims.rho_at(s, q);
      for (std::size_t q = 0; q < prims.n_pairs(); ++q)
        shifted.rho_at(s, q) = (q == pair ? prims.rho_at(s, q) * boost : prims.rho_at(s, q)) / total;
    }
    const TransitionMatrix power = matrix_power(transition_from_primitives(shifted), tau);
    ProbeRow r;
    r.t = t;
    r.estimate = power(g, w);
    r.target = target;
    r.gap = std::abs(r.estimate - target);
    r.complement = power(g, w) + power(g, g);
    rows.push_back(r);
  }
  return rows;
}

// --- non-identification -----------------------------------------------------

std::vector<double> constant_rho_table(std::size_t n_agents, const std::vector<double>& weights) {
  const std::size_t P = pair_count(n_agents);
  if (weights.size() != P)
    throw ConfigError("meeting weights: got " + std::to_string(weights.size()) + ", expected " +
                      std::to_string(P));
  double total = 0.0;
  for (double v : weights) {
    if (!(v > 0)) throw ValidationError("meeting weights must be positive");
    total += v;
  }
  const std::size_t S = std::size_t{1} << P;
  std::vector<double> rho(S * P);
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t p = 0; p < P; ++p) rho[s * P + p] = weights[p] / total;
  return rho;
}

NonIdentResult nonident_construct(std::size_t n_agents, const std::vector<double>& pi0,
                                  const std::vector<double>& rho) {
  const std::size_t P = pair_count(n_agents);
  if (P > kMaxExactPairs)
    throw CapacityError("non-identification construction needs N(N-1) <= " +
                        std::to_string(kMaxExactPairs));
  const std::size_t S = std::size_t{1} << P;
  if (pi0.size() != S)
    throw ValidationError("pi0 has " + std::to_string(pi0.size()) + " entries, expected " +
                          std::to_string(S));
  double total = 0.0;
  for (double v : pi0) {
    if (!(v > 0)) throw ValidationError("pi0 must be strictly positive");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-10) throw ValidationError("pi0 must sum to 1");
  if (rho.size() != S * P)
    throw ValidationError("meeting table has " + std::to_string(rho.size()) +
                          " entries, expected " + std::to_string(S * P));
  for (std::size_t s = 0; s < S; ++s) {
    double row = 0.0;
    for (std::size_t p = 0; p < P; ++p) {
      const double v = rho[s * P + p];
      if (!(v > 0)) throw ValidationError("meeting probabilities must be positive");
      row += v;
      const std::size_t flipped = s ^ (std::size_t{1} << p);
      if (std::abs(v - rho[flipped * P + p]) > 1e-12)
        throw ValidationError("meeting probability of pair " + std::to_string(p) +
                              " depends on its own link at state " + std::to_string(s));
    }
    if (std::abs(row - 1.0) > 1e-10)
      throw ValidationError("meeting probabilities at state " + std::to_string(s) +
                            " do not sum to 1");
  }

  NonIdentResult out;
  out.prims.n_agents = n_agents;
  out.prims.rho = rho;
  out.prims.gain.assign(P * S, 0.0);
  for (std::size_t p = 0; p < P; ++p)
    for (std::uint64_t s = 0; s < S; ++s) {
      if ((s >> p) & 1U) continue;
      out.prims.gain_at(p, s) = std::log(pi0[s | (std::uint64_t{1} << p)]) - std::log(pi0[s]);
    }
  out.pi = transition_from_primitives(out.prims);
  out.stationary = stationary(out.pi).pi;
  return out;
}

void write_probe_csv(std::ostream& os, const std::vector<ProbeRow>& rows) {
  os << "t,estimate,target,gap,complement\n";
  for (const auto& r : rows)
    os << format_double(r.t) << ',' << format_double(r.estimate) << ',' << format_double(r.target)
       << ',' << format_double(r.gap) << ',' << format_double(r.complement) << '\n';
}

}  // namespace netform
