#include "netform/ep.hpp"

#include <algorithm>
#include <cmath>

#include "netform/error.hpp"
#include "netform/format.hpp"
#include "netform/halton.hpp"
#include "netform/parallel.hpp"
#include "netform/rng.hpp"

namespace netform {

Eigen::MatrixXd EpState::covariance() const {
  const auto d = full.precision.rows();
  return full.precision.llt().solve(Eigen::MatrixXd::Identity(d, d));
}

Eigen::VectorXd EpState::mean() const { return full.precision.llt().solve(full.shift); }

double EpState::bookkeeping_error() const {
  Eigen::MatrixXd q = prior.precision;
  Eigen::VectorXd r = prior.shift;
  for (const auto& s : sites) {
    q += s.precision;
    r += s.shift;
  }
  return std::max((q - full.precision).cwiseAbs().maxCoeff(), (r - full.shift).cwiseAbs().maxCoeff());
}

EpState ep_init(const PriorSpec& prior, std::size_t n_sites) {
  const std::size_t d = prior.dim();
  prior.validate(d, "prior");
  const auto di = static_cast<Eigen::Index>(d);
  EpState st;
  st.prior.precision = Eigen::MatrixXd::Zero(di, di);
  st.prior.shift = Eigen::VectorXd::Zero(di);
  for (Eigen::Index j = 0; j < di; ++j) {
    const double prec = 1.0 / (prior.sd[static_cast<std::size_t>(j)] * prior.sd[static_cast<std::size_t>(j)]);
    st.prior.precision(j, j) = prec;
    st.prior.shift(j) = prec * prior.mean[static_cast<std::size_t>(j)];
  }
  st.sites.assign(n_sites, GaussianSite{Eigen::MatrixXd::Zero(di, di), Eigen::VectorXd::Zero(di)});
  st.full = st.prior;
  return st;
}

SiteDiscrepancy hamming_discrepancy(const NetworkPanel& panel) {
  return [&panel](std::size_t c, const Network& g) {
    return static_cast<double>(edge_distance(g, panel.observations[c].followup));
  };
}

namespace {

// Cholesky of m, adding growing multiples of the identity when m is not
// positive definite. Returns false if that never succeeds.
bool robust_llt(Eigen::MatrixXd m, Eigen::LLT<Eigen::MatrixXd>& llt, bool& jittered) {
  jittered = false;
  const auto d = m.rows();
  llt.compute(m);
  if (llt.info() == Eigen::Success) return true;
  double eps = 1e-8 * std::max(std::abs(m.trace()) / static_cast<double>(d), 1e-12);
  for (int attempt = 0; attempt < 40; ++attempt, eps *= 10) {
    llt.compute(m + eps * Eigen::MatrixXd::Identity(d, d));
    if (llt.info() == Eigen::Success) {
      jittered = true;
      return true;
    }
  }
  return false;
}

void symmetrize(Eigen::MatrixXd& m) { m = 0.5 * (m + m.transpose()).eval(); }

void recompute_full(EpState& st) {
  st.full = st.prior;
  for (const auto& s : st.sites) {
    st.full.precision += s.precision;
    st.full.shift += s.shift;
  }
  symmetrize(st.full.precision);
}

}  // namespace

void ep_update_site(EpState& st, std::size_t c, const NetworkPanel& panel, const Estimand& estimand,
                    const EpConfig& cfg, const SiteDiscrepancy& discrepancy) {
  if (c >= st.sites.size() || c >= panel.size()) throw ConfigError("site index out of range");
  const std::size_t d = st.dim();
  const auto di = static_cast<Eigen::Index>(d);
  SiteDiagnostics diag;
  diag.pass = st.passes;
  diag.site = c;

  GaussianSite& site = st.sites[c];
  const Eigen::MatrixXd cav_q = st.full.precision - site.precision;
  const Eigen::VectorXd cav_r = st.full.shift - site.shift;
  Eigen::LLT<Eigen::MatrixXd> cav_llt;
  if (!robust_llt(cav_q, cav_llt, diag.cavity_jitter)) {
    diag.skipped = true;
    st.log.push_back("pass " + std::to_string(st.passes) + " site " + std::to_string(c) +
                     ": cavity precision could not be regularized; site left unchanged");
    st.diagnostics.push_back(diag);
    return;
  }
  if (diag.cavity_jitter)
    st.log.push_back("pass " + std::to_string(st.passes) + " site " + std::to_string(c) +
                     ": cavity precision not positive definite; jitter applied");
  const Eigen::MatrixXd cav_cov = cav_llt.solve(Eigen::MatrixXd::Identity(di, di));
  const Eigen::VectorXd cav_mean = cav_llt.solve(cav_r);
  Eigen::MatrixXd cov_sym = cav_cov;
  symmetrize(cov_sym);
  const Eigen::MatrixXd L = cov_sym.llt().matrixL();

  const std::size_t M = cfg.draws_per_site;
  std::vector<double> theta(M * d), dist(M);
  const std::uint64_t pass = st.passes;
  const HaltonSequence seq(d, derive_seed(cfg.seed, {0xe9, pass, c}));
  const Observation& obs = panel.observations[c];
  parallel_chunks(M, cfg.threads, [&](std::size_t begin, std::size_t end) {
    GameModel model(obs.covariates, estimand.base, cfg.shocks);
    ParamVector beta = estimand.base;
    Eigen::VectorXd z(di), th(di);
    for (std::size_t m = begin; m < end; ++m) {
      if (cfg.halton) {
        seq.normal(m, z.data());
      } else {
        Rng rng(derive_seed(cfg.seed, {0xe9d, pass, c, m}));
        for (Eigen::Index j = 0; j < di; ++j) z(j) = rng.normal();
      }
      th = cav_mean + L * z;
      std::copy(th.data(), th.data() + di, theta.begin() + static_cast<std::ptrdiff_t>(m * d));
      estimand.expand_into({th.data(), d}, beta);
      model.set_params(beta);
      Network g = obs.baseline;
      Rng rng(derive_seed(cfg.seed, {0xe95, pass, c, m}));
      model.advance(g, cfg.tau, rng);
      dist[m] = discrepancy(c, g);
    }
  });

  diag.threshold = cfg.fixed_threshold ? *cfg.fixed_threshold : choose_epsilon(dist, cfg.target_accept);
  std::vector<std::size_t> acc;
  for (std::size_t m = 0; m < M; ++m)
    if (dist[m] <= diag.threshold) acc.push_back(m);
  diag.accepted = acc.size();
  const std::size_t floor = cfg.min_accept > 0 ? std::max(cfg.min_accept, d + 3) : d + 3;
  if (acc.size() < floor) {
    diag.skipped = true;
    st.log.push_back("pass " + std::to_string(st.passes) + " site " + std::to_string(c) + ": only " +
                     std::to_string(acc.size()) + " draws accepted (floor " +
                     std::to_string(floor) + "); site left unchanged");
    st.diagnostics.push_back(diag);
    return;
  }

  Eigen::VectorXd mu = Eigen::VectorXd::Zero(di);
  for (auto m : acc) mu += Eigen::Map<const Eigen::VectorXd>(&theta[m * d], di);
  mu /= static_cast<double>(acc.size());
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(di, di);
  for (auto m : acc) {
    const Eigen::VectorXd dv = Eigen::Map<const Eigen::VectorXd>(&theta[m * d], di) - mu;
    sigma.noalias() += dv * dv.transpose();
  }
  const double n_acc = static_cast<double>(acc.size());
  sigma /= n_acc - 1;
  symmetrize(sigma);
  Eigen::LLT<Eigen::MatrixXd> mom_llt;
  if (!robust_llt(sigma, mom_llt, diag.moment_jitter)) {
    diag.skipped = true;
    st.log.push_back("pass " + std::to_string(st.passes) + " site " + std::to_string(c) +
                     ": accepted-draw covariance is singular; site left unchanged");
    st.diagnostics.push_back(diag);
    return;
  }
  Eigen::MatrixXd q_new = mom_llt.solve(Eigen::MatrixXd::Identity(di, di));
  // Sigma_hat^-1 overstates the precision by (n-1)/(n-d-2) on average, and
  // the excess would accumulate across sites.
  if (cfg.unbiased_precision) q_new *= (n_acc - static_cast<double>(d) - 2) / (n_acc - 1);
  symmetrize(q_new);
  const Eigen::VectorXd r_new = q_new * mu;

  GaussianSite updated{q_new - cav_q, r_new - cav_r};
  updated.precision = cfg.damping * updated.precision + (1 - cfg.damping) * site.precision;
  updated.shift = cfg.damping * updated.shift + (1 - cfg.damping) * site.shift;
  symmetrize(updated.precision);
  diag.change = std::max((updated.precision - site.precision).cwiseAbs().maxCoeff(),
                         (updated.shift - site.shift).cwiseAbs().maxCoeff());
  site = std::move(updated);
  recompute_full(st);
  st.diagnostics.push_back(diag);
}

namespace {

EpResult run_passes(const NetworkPanel& panel, const Estimand& estimand, const EpConfig& cfg,
                    const SiteDiscrepancy& discrepancy) {
  panel.validate();
  if (panel.empty()) throw ConfigError("EP needs a nonempty panel");
  estimand.validate();
  if (estimand.base.k() != panel.k())
    throw ConfigError("parameters are sized for k=" + std::to_string(estimand.base.k()) +
                      " but the panel has k=" + std::to_string(panel.k()));
  if (!(cfg.damping > 0 && cfg.damping <= 1)) throw ConfigError("damping must lie in (0, 1]");
  if (cfg.draws_per_site == 0) throw ConfigError("draws per site must be positive");
  cfg.prior.validate(estimand.dim(), "prior");

  EpResult out{ep_init(cfg.prior, panel.size()), {}};
  EpState& st = out.state;
  std::size_t updated = 0;
  for (std::size_t pass = 0; pass < cfg.passes; ++pass) {
    double change = 0.0;
    for (std::size_t c = 0; c < panel.size(); ++c) {
      ep_update_site(st, c, panel, estimand, cfg, discrepancy);
      const auto& diag = st.diagnostics.back();
      if (!diag.skipped) ++updated;
      change = std::max(change, diag.change);
    }
    st.convergence.push_back(change);
    if (st.convergence.size() >= 2 && change > st.convergence[st.convergence.size() - 2])
      st.log.push_back("pass " + std::to_string(st.passes) +
                       ": convergence metric increased to " + format_double(change));
    ++st.passes;
    if (cfg.tolerance > 0 && change < cfg.tolerance) break;
  }
  if (updated == 0) throw NumericError("every EP site update failed; see the site diagnostics");
  out.summary = summarize_gaussian(st.mean(), st.covariance());
  out.summary.names = estimand.names(panel.observations.front().covariates.names());
  return out;
}

}  // namespace

EpResult ep_run(const NetworkPanel& panel, const Estimand& estimand, const EpConfig& cfg) {
  return run_passes(panel, estimand, cfg, hamming_discrepancy(panel));
}

Eigen::VectorXd LocalSummary::apply(const Network& g) const {
  const auto v = g.vectorized();
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) x(static_cast<Eigen::Index>(i)) = v[i];
  return intercept + slopes * x;
}

std::vector<LocalSummary> fit_local_summaries(const NetworkPanel& panel, const Estimand& estimand,
                                              const LocalSummaryConfig& cfg) {
  panel.validate();
  estimand.validate();
  const std::size_t d = estimand.dim();
  cfg.prior.validate(d, "prior");
  if (cfg.draws < 2) throw ConfigError("local summaries need at least 2 pilot draws");
  const std::size_t R = cfg.draws;

  Eigen::MatrixXd Y(static_cast<Eigen::Index>(R), static_cast<Eigen::Index>(d));
  for (std::size_t r = 0; r < R; ++r) {
    Rng rng(derive_seed(cfg.seed, {0x10ca1, r}));
    for (std::size_t j = 0; j < d; ++j)
      Y(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
          cfg.prior.mean[j] + cfg.prior.sd[j] * rng.normal();
  }

  std::vector<LocalSummary> out;
  for (std::size_t c = 0; c < panel.size(); ++c) {
    const Observation& obs = panel.observations[c];
    const std::size_t P = obs.baseline.n_pairs();
    Eigen::MatrixXd X(static_cast<Eigen::Index>(R), static_cast<Eigen::Index>(P));
    parallel_chunks(R, cfg.threads, [&](std::size_t begin, std::size_t end) {
      GameModel model(obs.covariates, estimand.base, cfg.shocks);
      ParamVector beta = estimand.base;
      std::vector<double> th(d);
      for (std::size_t r = begin; r < end; ++r) {
        for (std::size_t j = 0; j < d; ++j)
          th[j] = Y(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j));
        estimand.expand_into(th, beta);
        model.set_params(beta);
        Network g = obs.baseline;
        Rng rng(derive_seed(cfg.seed, {0x10ca5, r, c}));
        model.advance(g, cfg.tau, rng);
        const auto v = g.vectorized();
        for (std::size_t p = 0; p < P; ++p)
          X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(p)) = v[p];
      }
    });
    LocalSummary ls;
    ls.intercept.resize(static_cast<Eigen::Index>(d));
    ls.slopes = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(P));
    for (std::size_t j = 0; j < d; ++j) {
      const LassoFit fit = post_lasso(X, Y.col(static_cast<Eigen::Index>(j)), cfg.lasso);
      ls.intercept(static_cast<Eigen::Index>(j)) = fit.intercept;
      ls.slopes.row(static_cast<Eigen::Index>(j)) = fit.coef.transpose();
      ls.constant_columns.push_back(fit.constant_columns);
    }
    out.push_back(std::move(ls));
  }
  return out;
}

SiteDiscrepancy local_discrepancy(const NetworkPanel& panel,
                                  const std::vector<LocalSummary>& summaries) {
  if (summaries.size() != panel.size())
    throw ConfigError("need one local summary per network, got " +
                      std::to_string(summaries.size()) + " for " + std::to_string(panel.size()));
  std::vector<Eigen::VectorXd> observed;
  for (std::size_t c = 0; c < panel.size(); ++c) {
    if (static_cast<std::size_t>(summaries[c].slopes.cols()) != panel.observations[c].baseline.n_pairs())
      throw ConfigError("local summary " + std::to_string(c) + " does not match its network size");
    observed.push_back(summaries[c].apply(panel.observations[c].followup));
  }
  return [&summaries, observed = std::move(observed)](std::size_t c, const Network& g) {
    return (summaries[c].apply(g) - observed[c]).norm();
  };
}

EpResult ep_run_local(const NetworkPanel& panel, const Estimand& estimand, const EpConfig& cfg,
                      const std::vector<LocalSummary>& summaries) {
  for (const auto& s : summaries)
    if (static_cast<std::size_t>(s.intercept.size()) != estimand.dim())
      throw ConfigError("local summaries have " + std::to_string(s.intercept.size()) +
                        " outputs, the estimand has " + std::to_string(estimand.dim()));
  return run_passes(panel, estimand, cfg, local_discrepancy(panel, summaries));
}

}  // namespace netform
