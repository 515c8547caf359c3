#include "netform/abc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "netform/error.hpp"
#include "netform/halton.hpp"
#include "netform/parallel.hpp"
#include "netform/rng.hpp"

namespace netform {

Estimand Estimand::all(const ParamVector& base) {
  Estimand e{base, {}};
  for (std::size_t i = 0; i < base.size(); ++i) e.free.push_back(i);
  return e;
}

void Estimand::expand_into(std::span<const double> theta, ParamVector& out) const {
  out = base;
  for (std::size_t j = 0; j < free.size(); ++j) out[free[j]] = theta[j];
}

ParamVector Estimand::expand(std::span<const double> theta) const {
  if (theta.size() != free.size())
    throw ConfigError("estimand has " + std::to_string(free.size()) + " free coefficients, got " +
                      std::to_string(theta.size()));
  ParamVector out;
  expand_into(theta, out);
  return out;
}

std::vector<std::string> Estimand::names(const std::vector<std::string>& covariates) const {
  const auto all = base.names(covariates);
  std::vector<std::string> out;
  for (auto i : free) out.push_back(all[i]);
  return out;
}

void Estimand::validate() const {
  std::vector<bool> seen(base.size(), false);
  for (auto i : free) {
    if (i >= base.size())
      throw ConfigError("free coefficient index " + std::to_string(i) + " out of range");
    if (seen[i]) throw ConfigError("free coefficient index " + std::to_string(i) + " repeated");
    seen[i] = true;
  }
  if (free.empty()) throw ConfigError("estimand has no free coefficients");
}

GaussianSpec GaussianSpec::isotropic(std::size_t dim, double mean, double sd) {
  return {std::vector<double>(dim, mean), std::vector<double>(dim, sd)};
}

void GaussianSpec::validate(std::size_t d, const std::string& what) const {
  if (mean.size() != d || sd.size() != d)
    throw ConfigError(what + " has dimension " + std::to_string(mean.size()) + "/" +
                      std::to_string(sd.size()) + ", expected " + std::to_string(d));
  for (std::size_t j = 0; j < d; ++j) {
    if (!(sd[j] > 0) || !std::isfinite(sd[j]))
      throw ConfigError(what + " standard deviation " + std::to_string(j) + " must be positive");
    if (!std::isfinite(mean[j])) throw ConfigError(what + " mean " + std::to_string(j) + " is not finite");
  }
}

double GaussianSpec::log_density(std::span<const double> x) const {
  double lp = 0.0;
  for (std::size_t j = 0; j < mean.size(); ++j) {
    const double z = (x[j] - mean[j]) / sd[j];
    lp += -0.5 * z * z - std::log(sd[j]) - 0.5 * std::log(2 * std::numbers::pi);
  }
  return lp;
}

std::vector<double> summary_statistic(SummaryStat stat, const NetworkPanel& panel,
                                      const std::vector<Network>& followups) {
  if (followups.size() != panel.size())
    throw ConfigError("statistic needs one followup network per observation");
  std::vector<double> out;
  switch (stat) {
    case SummaryStat::FullPanel:
      for (const auto& g : followups)
        for (auto v : g.vectorized()) out.push_back(v);
      break;
    case SummaryStat::EdgeCounts:
      for (const auto& g : followups) out.push_back(static_cast<double>(g.edge_count()));
      break;
    case SummaryStat::CrossTab: {
      const std::size_t k = panel.k();
      out.assign(k + 1, 0.0);
      for (std::size_t c = 0; c < followups.size(); ++c) {
        const auto& g = followups[c];
        const auto& x = panel.observations[c].covariates;
        for (std::size_t i = 0; i < g.size(); ++i)
          for (std::size_t j = 0; j < g.size(); ++j) {
            if (i == j || !g(i, j)) continue;
            out[0] += 1;
            for (std::size_t l = 0; l < k; ++l) out[l + 1] += x.covariate(i, j, l);
          }
      }
      break;
    }
  }
  return out;
}

double stat_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ConfigError("statistics differ in length");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

AbcDraws abc_simulate(const NetworkPanel& panel, const Estimand& estimand, const AbcConfig& cfg) {
  panel.validate();
  if (panel.empty()) throw ConfigError("ABC needs a nonempty panel");
  estimand.validate();
  if (estimand.base.k() != panel.k())
    throw ConfigError("parameters are sized for k=" + std::to_string(estimand.base.k()) +
                      " but the panel has k=" + std::to_string(panel.k()));
  const std::size_t d = estimand.dim();
  cfg.prior.validate(d, "prior");
  const GaussianSpec& q = cfg.proposal ? cfg.proposal->gaussian : cfg.prior;
  const bool halton = cfg.proposal ? cfg.proposal->halton : cfg.halton;
  if (cfg.proposal) cfg.proposal->gaussian.validate(d, "proposal");
  const bool same = !cfg.proposal || (q.mean == cfg.prior.mean && q.sd == cfg.prior.sd);

  std::vector<Network> observed;
  for (const auto& o : panel.observations) observed.push_back(o.followup);
  const std::vector<double> t_obs = summary_statistic(cfg.stat, panel, observed);

  AbcDraws out;
  out.dim = d;
  out.theta.assign(cfg.draws * d, 0.0);
  out.log_weight.assign(cfg.draws, 0.0);
  out.distance.assign(cfg.draws, 0.0);

  const HaltonSequence seq(d, derive_seed(cfg.seed, {0x4a17}));
  parallel_chunks(cfg.draws, cfg.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<GameModel> models;
    for (const auto& o : panel.observations)
      models.emplace_back(o.covariates, estimand.base, cfg.shocks);
    std::vector<Network> sims(panel.size());
    ParamVector beta = estimand.base;
    std::vector<double> z(d);
    for (std::size_t s = begin; s < end; ++s) {
      double* th = &out.theta[s * d];
      if (halton) {
        seq.normal(s, z.data());
      } else {
        Rng rng(derive_seed(cfg.seed, {0xd1a5, s}));
        for (auto& v : z) v = rng.normal();
      }
      for (std::size_t j = 0; j < d; ++j) th[j] = q.mean[j] + q.sd[j] * z[j];
      if (!same)
        out.log_weight[s] = cfg.prior.log_density({th, d}) - q.log_density({th, d});
      estimand.expand_into({th, d}, beta);

      double hamming = 0.0;
      for (std::size_t c = 0; c < panel.size(); ++c) {
        models[c].set_params(beta);
        sims[c] = panel.observations[c].baseline;
        Rng rng(derive_seed(cfg.seed, {s, c}));
        models[c].advance(sims[c], cfg.tau, rng);
        if (cfg.stat == SummaryStat::FullPanel)
          hamming += static_cast<double>(edge_distance(sims[c], observed[c]));
      }
      out.distance[s] = cfg.stat == SummaryStat::FullPanel
                            ? std::sqrt(hamming)
                            : stat_distance(summary_statistic(cfg.stat, panel, sims), t_obs);
    }
  });
  return out;
}

AbcResult abc_accept(const AbcDraws& draws, const KernelSpec& kernel, std::uint64_t seed,
                     const std::vector<std::string>& names) {
  if (!(kernel.epsilon >= 0)) throw ConfigError("kernel tolerance must be nonnegative");
  AbcResult r;
  r.kernel = kernel;
  const double eps = kernel.epsilon;
  double max_lw = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < draws.size(); ++s) {
    const double d = draws.distance[s];
    bool accept;
    if (kernel.kind == KernelKind::Sharp || std::isinf(eps)) {
      accept = d <= eps;
    } else if (eps == 0) {
      accept = d == 0;
    } else {
      Rng rng(derive_seed(seed, {0xacc, s}));
      const double ratio = d / eps;
      accept = rng.uniform() < std::exp(-0.5 * ratio * ratio);
    }
    if (accept) {
      r.accepted.push_back(s);
      max_lw = std::max(max_lw, draws.log_weight[s]);
    }
  }
  if (r.accepted.empty())
    throw ToleranceError("no draws accepted at epsilon=" + std::to_string(eps) +
                         "; increase epsilon or the number of draws");
  r.acceptance_rate = static_cast<double>(r.accepted.size()) / static_cast<double>(draws.size());
  std::vector<double> kept;
  kept.reserve(r.accepted.size() * draws.dim);
  for (auto s : r.accepted) {
    r.weights.push_back(std::exp(draws.log_weight[s] - max_lw));
    kept.insert(kept.end(), draws.theta.begin() + static_cast<std::ptrdiff_t>(s * draws.dim),
                draws.theta.begin() + static_cast<std::ptrdiff_t>((s + 1) * draws.dim));
  }
  r.ess = effective_sample_size(r.weights);
  r.summary = summarize_weighted(kept, draws.dim, r.weights);
  r.summary.names = names;
  return r;
}

AbcResult abc_run(const NetworkPanel& panel, const Estimand& estimand, const AbcConfig& cfg,
                  const KernelSpec& kernel) {
  const AbcDraws draws = abc_simulate(panel, estimand, cfg);
  std::vector<std::string> names;
  if (!panel.empty()) names = estimand.names(panel.observations.front().covariates.names());
  return abc_accept(draws, kernel, derive_seed(cfg.seed, {0xacc}), names);
}

double choose_epsilon(std::vector<double> pilot, double target_rate) {
  if (pilot.empty()) throw ConfigError("choose_epsilon needs a nonempty pilot sample");
  if (!(target_rate > 0 && target_rate <= 1))
    throw ConfigError("target acceptance rate must lie in (0, 1]");
  const auto n = pilot.size();
  auto idx = static_cast<std::size_t>(std::ceil(target_rate * static_cast<double>(n) - 1e-9));
  idx = std::clamp<std::size_t>(idx, 1, n) - 1;
  std::nth_element(pilot.begin(), pilot.begin() + static_cast<std::ptrdiff_t>(idx), pilot.end());
  return pilot[idx];
}

}  // namespace netform
