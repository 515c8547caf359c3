#include "netform/counterfactual.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "netform/error.hpp"
#include "netform/parallel.hpp"
#include "netform/rng.hpp"

namespace netform {

Dynamics Scenario::dynamics() const noexcept {
  Dynamics d;
  if (kind == ScenarioKind::RandomMatching) d.meeting = MeetingRule::Uniform;
  if (kind == ScenarioKind::RandomFriendship) d.choice = ChoiceRule::CoinFlip;
  return d;
}

std::string scenario_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Base: return "base";
    case ScenarioKind::RandomMatching: return "random-matching";
    case ScenarioKind::Tracking: return "tracking";
    case ScenarioKind::RandomFriendship: return "random-friendship";
  }
  return "base";
}

ScenarioKind parse_scenario(const std::string& name) {
  for (auto k : {ScenarioKind::Base, ScenarioKind::RandomMatching, ScenarioKind::Tracking,
                 ScenarioKind::RandomFriendship})
    if (scenario_name(k) == name) return k;
  throw ConfigError("unknown scenario '" + name +
                    "' (expected base, random-matching, tracking or random-friendship)");
}

NetworkPanel apply_tracking(const NetworkPanel& panel, const std::string& key) {
  panel.validate();
  struct Seat {
    std::size_t classroom, agent;
    double key, order;
  };
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> groups;
  for (std::size_t c = 0; c < panel.size(); ++c) {
    const auto& o = panel.observations[c];
    if (o.agents.size() != o.baseline.size())
      throw ConfigError("tracking needs agent attributes for classroom '" + o.id + "'");
    const std::string school = o.agents.school.empty() ? "" : o.agents.school.front();
    const std::string grade = o.agents.grade.empty() ? "" : o.agents.grade.front();
    groups[{school, grade}].push_back(c);
  }

  NetworkPanel out = panel;
  for (const auto& [sg, members] : groups) {
    std::vector<Seat> seats;
    for (auto c : members) {
      const auto& a = panel.observations[c].agents;
      const std::size_t kc = a.column(key);
      const auto oc = std::find(a.columns.begin(), a.columns.end(), panel.spec.order_column);
      for (std::size_t i = 0; i < a.size(); ++i)
        seats.push_back({c, i, a.values[i][kc],
                         oc == a.columns.end() ? static_cast<double>(i)
                                               : a.values[i][static_cast<std::size_t>(oc - a.columns.begin())]});
    }
    std::stable_sort(seats.begin(), seats.end(),
                     [](const Seat& x, const Seat& y) { return x.key < y.key; });

    std::size_t next = 0;
    for (auto c : members) {
      const auto& old = panel.observations[c];
      const std::size_t n = old.baseline.size();
      std::vector<Seat> mine(seats.begin() + static_cast<std::ptrdiff_t>(next),
                             seats.begin() + static_cast<std::ptrdiff_t>(next + n));
      next += n;
      std::stable_sort(mine.begin(), mine.end(),
                       [](const Seat& x, const Seat& y) { return x.order < y.order; });

      AgentTable t;
      t.columns = old.agents.columns;
      const auto oc = std::find(t.columns.begin(), t.columns.end(), panel.spec.order_column);
      for (std::size_t i = 0; i < n; ++i) {
        const auto& src = panel.observations[mine[i].classroom].agents;
        t.ids.push_back(src.ids[mine[i].agent]);
        t.values.push_back(src.values[mine[i].agent]);
        if (oc != t.columns.end())
          t.values.back()[static_cast<std::size_t>(oc - t.columns.begin())] = static_cast<double>(i + 1);
        t.school.push_back(src.school.empty() ? "" : src.school[mine[i].agent]);
        t.grade.push_back(src.grade.empty() ? "" : src.grade[mine[i].agent]);
      }

      Observation& o = out.observations[c];
      o.agents = std::move(t);
      o.covariates = derive_covariates(o.agents, panel.spec);
      o.baseline = Network(n);
      o.followup = Network(n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          if (i == j || mine[i].classroom != mine[j].classroom) continue;
          const auto& src = panel.observations[mine[i].classroom];
          o.baseline.set_unchecked(i, j, src.baseline(mine[i].agent, mine[j].agent));
          o.followup.set_unchecked(i, j, src.followup(mine[i].agent, mine[j].agent));
        }
    }
  }
  out.validate();
  return out;
}

const std::array<std::string, kWelfareComponents>& welfare_component_names() {
  static const std::array<std::string, kWelfareComponents> names{"total", "direct", "mutual",
                                                                 "indirect", "popularity"};
  return names;
}

std::array<double, kWelfareComponents> welfare_components(const UtilityParts& p) {
  return {p.total(), p.direct, p.mutual, p.indirect, p.popularity};
}

ScenarioRun run_scenario(const NetworkPanel& panel, const std::vector<ParamVector>& draws,
                         const Scenario& scenario, const ScenarioConfig& cfg) {
  panel.validate();
  if (draws.empty()) throw ConfigError("counterfactuals need at least one parameter draw");
  if (cfg.replicates == 0) throw ConfigError("replicates must be positive");
  for (const auto& b : draws) {
    if (b.k() != panel.k())
      throw ConfigError("parameter draw sized for k=" + std::to_string(b.k()) +
                        " but the panel has k=" + std::to_string(panel.k()));
    b.validate();
  }

  ScenarioRun run;
  run.scenario = scenario;
  run.panel = scenario.kind == ScenarioKind::Tracking ? apply_tracking(panel, scenario.tracking_key)
                                                      : panel;
  const Dynamics dyn = scenario.dynamics();
  const std::size_t S = draws.size() * cfg.replicates;
  const std::size_t C = run.panel.size();
  run.trajectories.assign(S, {});
  if (cfg.keep_followups) run.followups.assign(S, {});
  std::vector<StepCounters> counters(S);

  parallel_chunks(S, cfg.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      const ParamVector& beta = draws[s / cfg.replicates];
      auto& traj = run.trajectories[s].rounds;
      traj.assign(cfg.tau + 1, {});
      std::vector<Network> finals;
      for (std::size_t c = 0; c < C; ++c) {
        const auto& o = run.panel.observations[c];
        const GameModel model(o.covariates, beta, cfg.shocks);
        Rng rng(cfg.common_random_numbers
                    ? derive_seed(cfg.seed, {s, c})
                    : derive_seed(cfg.seed, {static_cast<std::uint64_t>(scenario.kind) + 1, s, c}));
        Network g = o.baseline;
        for (std::size_t t = 0;; ++t) {
          const auto w = welfare_components(model.welfare_parts(g));
          for (std::size_t q = 0; q < kWelfareComponents; ++q) traj[t][q] += w[q];
          if (t == cfg.tau) break;
          model.step(g, rng, dyn, &counters[s]);
        }
        if (cfg.keep_followups) finals.push_back(std::move(g));
      }
      if (cfg.keep_followups) run.followups[s] = std::move(finals);
    }
  });
  for (const auto& k : counters) {
    run.counters.meetings += k.meetings;
    run.counters.chose_link += k.chose_link;
    run.counters.changed += k.changed;
  }
  return run;
}

namespace {

// Type-7 style empirical quantile on a sorted copy.
double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  if (v.size() == 1) return v.front();
  const double h = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::vector<BandRow> summarize_trajectories(const std::vector<WelfareTrajectory>& trajectories) {
  std::vector<BandRow> out;
  if (trajectories.empty()) return out;
  const std::size_t T = trajectories.front().rounds.size();
  for (const auto& tr : trajectories)
    if (tr.rounds.size() != T) throw ConfigError("trajectories differ in length");
  std::vector<double> col(trajectories.size());
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t q = 0; q < kWelfareComponents; ++q) {
      for (std::size_t s = 0; s < trajectories.size(); ++s) col[s] = trajectories[s].rounds[t][q];
      out.push_back({t, welfare_component_names()[q], mean_of(col), quantile(col, 0.025),
                     quantile(col, 0.975)});
    }
  return out;
}

WelfareDifference welfare_difference(const std::vector<WelfareTrajectory>& base,
                                     const std::vector<WelfareTrajectory>& alt, double normalizer) {
  if (normalizer == 0 || !std::isfinite(normalizer))
    throw ConfigError("welfare normalizer must be finite and nonzero");
  if (base.size() != alt.size())
    throw ConfigError("scenarios have " + std::to_string(base.size()) + " and " +
                      std::to_string(alt.size()) + " simulations");
  WelfareDifference d;
  for (std::size_t s = 0; s < base.size(); ++s) {
    if (base[s].rounds.size() != alt[s].rounds.size())
      throw ConfigError("scenarios differ in the number of rounds");
    WelfareTrajectory w;
    w.rounds.resize(base[s].rounds.size());
    for (std::size_t t = 0; t < w.rounds.size(); ++t)
      for (std::size_t q = 0; q < kWelfareComponents; ++q)
        w.rounds[t][q] = (alt[s].rounds[t][q] - base[s].rounds[t][q]) / normalizer;
    d.per_simulation.push_back(std::move(w));
  }
  d.bands = summarize_trajectories(d.per_simulation);
  return d;
}

double welfare_normalizer(const NetworkPanel& panel, double direct_coefficient) {
  std::size_t students = 0;
  for (const auto& o : panel.observations) students += o.baseline.size();
  return static_cast<double>(students) * -direct_coefficient;
}

std::vector<ProjectionRow> scenario_projection_summary(const ScenarioRun& run) {
  if (run.followups.empty()) throw ConfigError("scenario run kept no followup networks");
  std::vector<std::string> names;
  std::vector<std::vector<double>> cols;
  for (const auto& finals : run.followups) {
    const DyadFrame f = dyad_frame(run.panel, finals);
    const DyadicFit fit = dyadic_ols(f);
    if (names.empty()) {
      names = fit.names;
      names.push_back("edge_mean");
      names.push_back("edge_sd");
      cols.resize(names.size());
    }
    for (Eigen::Index j = 0; j < fit.coef.size(); ++j) cols[static_cast<std::size_t>(j)].push_back(fit.coef(j));
    const double m = f.y.mean();
    const double var = f.rows() > 1 ? (f.y.array() - m).square().sum() / static_cast<double>(f.rows() - 1) : 0.0;
    cols[names.size() - 2].push_back(m);
    cols[names.size() - 1].push_back(std::sqrt(var));
  }
  std::vector<ProjectionRow> out;
  for (std::size_t j = 0; j < names.size(); ++j)
    out.push_back({names[j], mean_of(cols[j]), quantile(cols[j], 0.025), quantile(cols[j], 0.975)});
  return out;
}

}  // namespace netform
