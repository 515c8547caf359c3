#include "netform/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <sstream>

#include "netform/abc.hpp"
#include "netform/counterfactual.hpp"
#include "netform/dyadic.hpp"
#include "netform/ep.hpp"
#include "netform/error.hpp"
#include "netform/exact_chain.hpp"
#include "netform/format.hpp"
#include "netform/ident.hpp"
#include "netform/io.hpp"
#include "netform/likelihood.hpp"
#include "netform/tau.hpp"

namespace netform {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

// Reads key from j, storing the default when absent so the manifest echoes
// every setting that was used.
template <class T>
T get(json& j, const char* key, T def) {
  if (!j.is_object()) throw ConfigError(std::string("expected an object around '") + key + "'");
  if (!j.contains(key) || j[key].is_null()) j[key] = def;
  return j[key].get<T>();
}

std::optional<double> get_optional(json& j, const char* key) {
  if (!j.contains(key)) j[key] = nullptr;
  if (j[key].is_null()) return std::nullopt;
  return j[key].get<double>();
}

json& section(json& cfg, const char* key) {
  if (!cfg.contains(key) || cfg[key].is_null()) cfg[key] = json::object();
  if (!cfg[key].is_object()) throw ConfigError(std::string("'") + key + "' must be an object");
  return cfg[key];
}

std::string num(double v) { return format_double(v); }

struct Run {
  std::string command;
  json cfg;
  json resolved = json::object();
  fs::path out;
  std::map<std::string, std::string> inputs, outputs;

  std::uint64_t seed() { return get<std::uint64_t>(cfg, "seed", 0); }
  std::size_t threads() { return get<std::size_t>(cfg, "threads", 1); }

  void input(const std::string& path) { inputs[path] = sha256_file(path); }
  void write(const std::string& name, const std::string& contents) {
    write_file((out / name).string(), contents);
    outputs[name] = sha256_hex(contents);
  }
  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

  void write_manifest() {
    json m;
    m["command"] = command;
    m["version"] = version_string();
    m["seed"] = seed();
    m["config"] = cfg;
    m["resolved"] = resolved;
    m["inputs"] = inputs;
    m["outputs"] = outputs;
    write_file((out / "manifest.json").string(), m.dump(2) + "\n");
  }
};

ShockSpec shocks_of(Run& r) {
  const auto s = get<std::string>(r.cfg, "shocks", "logistic");
  if (s == "logistic") return {ShockFamily::Logistic};
  if (s == "ev1") return {ShockFamily::IndependentEV1};
  throw ConfigError("shocks must be 'logistic' or 'ev1', got '" + s + "'");
}

NetworkPanel load(Run& r) {
  if (!r.cfg.contains("panel")) throw ConfigError("config needs a 'panel' section");
  json& p = section(r.cfg, "panel");
  if (!p.contains("networks") || !p.contains("covariates"))
    throw ConfigError("'panel' needs 'networks' and 'covariates' paths");
  const auto nets = p["networks"].get<std::string>();
  const auto covs = p["covariates"].get<std::string>();
  CovariateSpec spec;
  spec.attributes = get<std::vector<std::string>>(p, "attributes", {});
  spec.categorical = get<std::vector<std::string>>(p, "categorical", {});
  spec.order_column = get<std::string>(p, "order_column", "class_list");
  r.input(nets);
  r.input(covs);
  auto panel = load_panel(nets, covs, spec);
  if (panel.empty()) throw ConfigError("panel has no classrooms");
  return panel;
}

std::vector<std::string> covariate_names(const NetworkPanel& panel) {
  return panel.observations.front().covariates.names();
}

ParamVector params_of(Run& r, const std::vector<std::string>& names) {
  ParamVector b(names.size());
  json& j = section(r.cfg, "params");
  for (auto& [key, value] : j.items()) b[b.index_of(key, names)] = value.get<double>();
  const auto all = b.names(names);
  for (std::size_t i = 0; i < b.size(); ++i) j[all[i]] = b[i];
  b.validate();
  return b;
}

Estimand estimand_of(Run& r, const ParamVector& base, const std::vector<std::string>& names) {
  if (!r.cfg.contains("free") || r.cfg["free"].is_null()) r.cfg["free"] = "all";
  if (r.cfg["free"].is_string()) {
    if (r.cfg["free"] != "all") throw ConfigError("'free' must be \"all\" or a list of names");
    return Estimand::all(base);
  }
  Estimand e{base, {}};
  for (const auto& n : r.cfg["free"]) e.free.push_back(base.index_of(n.get<std::string>(), names));
  e.validate();
  return e;
}

std::vector<double> per_coefficient(json& j, const char* key, double def, std::size_t d) {
  if (!j.contains(key) || j[key].is_null()) j[key] = def;
  std::vector<double> v;
  if (j[key].is_number()) v.assign(d, j[key].get<double>());
  else v = j[key].get<std::vector<double>>();
  if (v.size() != d)
    throw ConfigError(std::string("'") + key + "' has " + std::to_string(v.size()) +
                      " entries for " + std::to_string(d) + " free coefficients");
  return v;
}

PriorSpec prior_of(Run& r, std::size_t d) {
  json& p = section(r.cfg, "prior");
  PriorSpec s{per_coefficient(p, "mean", 0.0, d), per_coefficient(p, "sd", 2.0, d)};
  s.validate(d, "prior");
  return s;
}

std::size_t tau_of(Run& r, const NetworkPanel& panel, const json& def = "estimate") {
  if (!r.cfg.contains("tau") || r.cfg["tau"].is_null()) r.cfg["tau"] = def;
  std::size_t tau;
  if (r.cfg["tau"].is_string()) {
    if (r.cfg["tau"] != "estimate") throw ConfigError("'tau' must be a count or \"estimate\"");
    tau = estimate_tau(panel).tau_hat;
  } else {
    tau = r.cfg["tau"].get<std::size_t>();
  }
  r.resolved["tau"] = tau;
  return tau;
}

std::string summary_csv(const PosteriorSummary& s) {
  std::string out = "coefficient,mean,sd,q025,q500,q975,prob_negative";
  const bool mc = !s.mc_se.empty();
  if (mc) out += ",mc_se";
  out += "\n";
  for (std::size_t j = 0; j < s.dim(); ++j) {
    out += (j < s.names.size() ? s.names[j] : "theta" + std::to_string(j + 1)) + "," + num(s.mean[j]) +
           "," + num(s.sd[j]) + "," + num(s.q025[j]) + "," + num(s.q500[j]) + "," + num(s.q975[j]) +
           "," + num(s.prob_negative[j]);
    if (mc) out += "," + num(s.mc_se[j]);
    out += "\n";
  }
  return out;
}

json summary_json(const PosteriorSummary& s) {
  json j;
  j["names"] = s.names;
  j["mean"] = s.mean;
  j["sd"] = s.sd;
  j["q025"] = s.q025;
  j["q500"] = s.q500;
  j["q975"] = s.q975;
  j["prob_negative"] = s.prob_negative;
  if (!s.mc_se.empty()) j["mc_se"] = s.mc_se;
  return j;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
    rows.push_back(row);
  }
  return rows;
}

// --- subcommands -------------------------------------------------------------

void cmd_simulate(Run& r) {
  NetworkPanel panel = load(r);
  const ParamVector beta = params_of(r, covariate_names(panel));
  const ShockSpec shocks = shocks_of(r);
  const std::size_t tau = tau_of(r, panel, 1);
  json& s = section(r.cfg, "simulate");
  const bool traj = get<bool>(s, "record_trajectory", false);
  const auto scenario = parse_scenario(get<std::string>(s, "scenario", "base"));
  if (scenario == ScenarioKind::Tracking)
    throw ConfigError("simulate supports base, random-matching and random-friendship dynamics");
  const Dynamics dyn = Scenario{scenario, ""}.dynamics();
  const auto seed = r.seed();

  json counters = json::object();
  std::string trajectory = "classroom_id,round,edges\n";
  for (std::size_t c = 0; c < panel.size(); ++c) {
    auto& o = panel.observations[c];
    const GameModel model(o.covariates, beta, shocks);
    const SimResult res = model.simulate(o.baseline, {tau, derive_seed(seed, {c}), traj}, dyn);
    if (traj)
      for (std::size_t t = 0; t < res.trajectory.size(); ++t)
        trajectory += o.id + "," + std::to_string(t) + "," + std::to_string(res.trajectory[t].edge_count()) + "\n";
    counters[o.id] = {{"meetings", res.counters.meetings},
                      {"chose_link", res.counters.chose_link},
                      {"changed", res.counters.changed}};
    o.followup = res.final;
  }
  r.write("networks.csv", panel_networks_csv(panel));
  r.write("covariates.csv", panel_covariates_csv(panel));
  r.write_json("counters.json", counters);
  if (traj) r.write("trajectory.csv", trajectory);
}

AttributeLaw law_of(const std::string& s) {
  if (s == "normal") return AttributeLaw::Normal;
  if (s == "uniform") return AttributeLaw::Uniform;
  if (s == "bernoulli") return AttributeLaw::Bernoulli;
  throw ConfigError("attribute law must be normal, uniform or bernoulli, got '" + s + "'");
}

InitialLaw initial_of(const std::string& s) {
  if (s == "empty") return InitialLaw::Empty;
  if (s == "bernoulli") return InitialLaw::Bernoulli;
  if (s == "burn-in") return InitialLaw::BurnIn;
  throw ConfigError("initial law must be empty, bernoulli or burn-in, got '" + s + "'");
}

void cmd_generate(Run& r) {
  json& g = section(r.cfg, "generate");
  GeneratorSpec spec;
  spec.classrooms = get<std::size_t>(g, "classrooms", 10);
  spec.n_min = get<std::size_t>(g, "n_min", 6);
  spec.n_max = get<std::size_t>(g, "n_max", spec.n_min);
  spec.schools = get<std::size_t>(g, "schools", 1);
  spec.grades = get<std::size_t>(g, "grades", 1);
  if (!g.contains("attributes")) g["attributes"] = json::array();
  std::vector<std::string> names;
  for (auto& a : g["attributes"]) {
    AttributeSpec as;
    as.name = a.at("name").get<std::string>();
    as.law = law_of(get<std::string>(a, "law", "normal"));
    as.a = get<double>(a, "a", as.law == AttributeLaw::Bernoulli ? 0.5 : 0.0);
    as.b = get<double>(a, "b", 1.0);
    as.categorical = get<bool>(a, "categorical", as.law == AttributeLaw::Bernoulli);
    names.push_back(as.name);
    spec.attributes.push_back(as);
  }
  spec.initial = initial_of(get<std::string>(g, "initial", "empty"));
  spec.initial_density = get<double>(g, "initial_density", 0.1);
  spec.burn_in = get<std::size_t>(g, "burn_in", 0);
  spec.tau = get<std::size_t>(r.cfg, "tau", 1);
  spec.shocks = shocks_of(r);
  spec.beta = params_of(r, names);
  const auto seed = r.seed();
  const NetworkPanel panel = generate_synthetic(spec, seed);
  r.write("networks.csv", panel_networks_csv(panel));
  r.write("covariates.csv", panel_covariates_csv(panel));
  json truth;
  truth["params"] = r.cfg["params"];
  truth["tau"] = spec.tau;
  truth["seed"] = seed;
  truth["classrooms"] = spec.classrooms;
  truth["attributes"] = names;
  truth["categorical"] = spec.covariate_spec().categorical;
  r.write_json("truth.json", truth);
}

void cmd_estimate_tau(Run& r) {
  const NetworkPanel panel = load(r);
  const TauEstimate est = estimate_tau(panel);
  json j;
  j["tau_hat"] = est.tau_hat;
  j["bound_violations"] = est.bound_violations;
  json d = json::object();
  for (std::size_t c = 0; c < panel.size(); ++c) d[panel.observations[c].id] = est.distances[c];
  j["distances"] = d;
  r.write_json("tau.json", j);
}

void cmd_loglik(Run& r) {
  const NetworkPanel panel = load(r);
  const ParamVector beta = params_of(r, covariate_names(panel));
  const ShockSpec shocks = shocks_of(r);
  const std::size_t tau = tau_of(r, panel);
  json& l = section(r.cfg, "loglik");
  LikelihoodOptions opt;
  opt.node_budget = get<std::size_t>(l, "node_budget", opt.node_budget);
  opt.prune = get<bool>(l, "prune", true);
  json per = json::array();
  double total = 0.0;
  for (const auto& o : panel.observations) {
    const GameModel model(o.covariates, beta, shocks);
    LikelihoodStats st;
    double ll;
    try {
      ll = exact_loglik(model, o.baseline, o.followup, tau, opt, &st);
    } catch (const CapacityError& e) {
      throw CapacityError("classroom '" + o.id + "': " + e.what());
    }
    total += ll;
    per.push_back({{"classroom", o.id}, {"loglik", num(ll)}, {"nodes", st.nodes}});
  }
  r.write_json("loglik.json", {{"total", num(total)}, {"tau", tau}, {"classrooms", per}});
}

SummaryStat stat_of(const std::string& s) {
  if (s == "full") return SummaryStat::FullPanel;
  if (s == "edge-counts") return SummaryStat::EdgeCounts;
  if (s == "cross-tab") return SummaryStat::CrossTab;
  throw ConfigError("statistic must be full, edge-counts or cross-tab, got '" + s + "'");
}

void cmd_abc(Run& r) {
  const NetworkPanel panel = load(r);
  const auto names = covariate_names(panel);
  const ParamVector base = params_of(r, names);
  const Estimand est = estimand_of(r, base, names);
  AbcConfig cfg;
  cfg.prior = prior_of(r, est.dim());
  cfg.tau = tau_of(r, panel);
  cfg.shocks = shocks_of(r);
  cfg.seed = r.seed();
  cfg.threads = r.threads();
  json& a = section(r.cfg, "abc");
  cfg.draws = get<std::size_t>(a, "draws", 10000);
  cfg.halton = get<bool>(a, "halton", false);
  cfg.stat = stat_of(get<std::string>(a, "statistic", "full"));
  if (a.contains("proposal") && !a["proposal"].is_null()) {
    json& q = a["proposal"];
    ProposalSpec ps;
    ps.gaussian = {per_coefficient(q, "mean", 0.0, est.dim()), per_coefficient(q, "sd", 2.0, est.dim())};
    ps.halton = get<bool>(q, "halton", false);
    cfg.proposal = ps;
  } else {
    a["proposal"] = nullptr;
  }
  const auto kernel_name = get<std::string>(a, "kernel", "sharp");
  KernelSpec kernel;
  if (kernel_name == "sharp") kernel.kind = KernelKind::Sharp;
  else if (kernel_name == "smooth") kernel.kind = KernelKind::SmoothGaussian;
  else throw ConfigError("kernel must be sharp or smooth, got '" + kernel_name + "'");
  const auto eps = get_optional(a, "epsilon");
  const double target = get<double>(a, "target_accept", 0.01);

  const AbcDraws draws = abc_simulate(panel, est, cfg);
  kernel.epsilon = eps ? *eps : choose_epsilon(draws.distance, target);
  r.resolved["epsilon"] = num(kernel.epsilon);
  const AbcResult res = abc_accept(draws, kernel, derive_seed(cfg.seed, {0xacc}), est.names(names));

  json j = summary_json(res.summary);
  j["acceptance_rate"] = num(res.acceptance_rate);
  j["accepted"] = res.accepted.size();
  j["ess"] = num(res.ess);
  j["epsilon"] = num(kernel.epsilon);
  r.write_json("posterior.json", j);
  r.write("summary.csv", summary_csv(res.summary));
  std::string acc = "draw,weight,distance";
  for (const auto& n : res.summary.names) acc += "," + n;
  acc += "\n";
  for (std::size_t i = 0; i < res.accepted.size(); ++i) {
    const auto s = res.accepted[i];
    acc += std::to_string(s) + "," + num(res.weights[i]) + "," + num(draws.distance[s]);
    for (std::size_t d = 0; d < draws.dim; ++d) acc += "," + num(draws.theta[s * draws.dim + d]);
    acc += "\n";
  }
  r.write("accepted.csv", acc);
}

EpConfig ep_config(Run& r, const NetworkPanel& panel, const Estimand& est) {
  EpConfig cfg;
  cfg.prior = prior_of(r, est.dim());
  cfg.tau = tau_of(r, panel);
  cfg.shocks = shocks_of(r);
  cfg.seed = r.seed();
  cfg.threads = r.threads();
  json& e = section(r.cfg, "ep");
  cfg.passes = get<std::size_t>(e, "passes", 1);
  cfg.tolerance = get<double>(e, "tolerance", 0.0);
  cfg.draws_per_site = get<std::size_t>(e, "draws_per_site", 10000);
  cfg.target_accept = get<double>(e, "target_accept", 0.01);
  cfg.fixed_threshold = get_optional(e, "threshold");
  cfg.min_accept = get<std::size_t>(e, "min_accept", 0);
  cfg.halton = get<bool>(e, "halton", true);
  cfg.damping = get<double>(e, "damping", 1.0);
  cfg.unbiased_precision = get<bool>(e, "unbiased_precision", true);
  return cfg;
}

void write_ep(Run& r, const EpResult& res) {
  json j = summary_json(res.summary);
  const Eigen::VectorXd mean = res.state.mean();
  j["mean_vector"] = std::vector<double>(mean.data(), mean.data() + mean.size());
  j["covariance"] = matrix_json(res.state.covariance());
  j["passes"] = res.state.passes;
  j["convergence"] = res.state.convergence;
  j["bookkeeping_error"] = num(res.state.bookkeeping_error());
  json diag = json::array();
  for (const auto& d : res.state.diagnostics)
    diag.push_back({{"pass", d.pass}, {"site", d.site}, {"threshold", num(d.threshold)},
                    {"accepted", d.accepted}, {"skipped", d.skipped},
                    {"cavity_jitter", d.cavity_jitter}, {"moment_jitter", d.moment_jitter},
                    {"change", num(d.change)}});
  j["sites"] = diag;
  j["log"] = res.state.log;
  r.write_json("posterior.json", j);
  r.write("summary.csv", summary_csv(res.summary));
}

void cmd_ep(Run& r) {
  const NetworkPanel panel = load(r);
  const auto names = covariate_names(panel);
  const Estimand est = estimand_of(r, params_of(r, names), names);
  const EpConfig cfg = ep_config(r, panel, est);
  write_ep(r, ep_run(panel, est, cfg));
}

void cmd_ep_local(Run& r) {
  const NetworkPanel panel = load(r);
  const auto names = covariate_names(panel);
  const Estimand est = estimand_of(r, params_of(r, names), names);
  const EpConfig cfg = ep_config(r, panel, est);
  json& l = section(r.cfg, "local");
  LocalSummaryConfig lc;
  lc.prior = cfg.prior;
  lc.tau = cfg.tau;
  lc.shocks = cfg.shocks;
  lc.seed = derive_seed(cfg.seed, {0x10ca1});
  lc.threads = cfg.threads;
  lc.draws = get<std::size_t>(l, "draws", 100000);
  lc.lasso.lambda = get_optional(l, "lambda");
  lc.lasso.plugin_c = get<double>(l, "plugin_c", 1.1);
  lc.lasso.refit = get<bool>(l, "refit", true);
  const auto summaries = fit_local_summaries(panel, est, lc);
  write_ep(r, ep_run_local(panel, est, cfg, summaries));
  json sj = json::array();
  for (std::size_t c = 0; c < summaries.size(); ++c) {
    std::vector<std::size_t> support;
    for (Eigen::Index i = 0; i < summaries[c].slopes.rows(); ++i)
      support.push_back(static_cast<std::size_t>((summaries[c].slopes.row(i).array() != 0).count()));
    sj.push_back({{"classroom", panel.observations[c].id}, {"support_sizes", support}});
  }
  r.write_json("local_summaries.json", sj);
}

std::string bands_csv(const std::vector<BandRow>& rows) {
  std::string out = "round,component,mean,lo,hi\n";
  for (const auto& b : rows)
    out += std::to_string(b.round) + "," + b.component + "," + num(b.mean) + "," + num(b.lo) + "," + num(b.hi) + "\n";
  return out;
}

void cmd_counterfactual(Run& r) {
  const NetworkPanel panel = load(r);
  const auto names = covariate_names(panel);
  const ParamVector base = params_of(r, names);
  json& c = section(r.cfg, "counterfactual");
  ScenarioConfig sc;
  sc.tau = tau_of(r, panel);
  sc.shocks = shocks_of(r);
  sc.seed = r.seed();
  sc.threads = r.threads();
  sc.replicates = get<std::size_t>(c, "replicates", 10);
  sc.common_random_numbers = get<bool>(c, "common_random_numbers", true);
  const auto key = get<std::string>(c, "tracking_key", "cognitive_skills");
  const auto scenarios = get<std::vector<std::string>>(
      c, "scenarios", {"base", "random-matching", "tracking", "random-friendship"});

  // Posterior draws: a Gaussian from an EP posterior file, or a point mass.
  std::vector<ParamVector> draws;
  ParamVector centre = base;
  if (c.contains("posterior") && !c["posterior"].is_null()) {
    const auto path = c["posterior"].get<std::string>();
    r.input(path);
    const json post = json::parse(read_file(path));
    const auto pnames = post.at("names").get<std::vector<std::string>>();
    const auto mean = post.at("mean_vector").get<std::vector<double>>();
    const auto cov = post.at("covariance").get<std::vector<std::vector<double>>>();
    Estimand est{base, {}};
    for (const auto& n : pnames) est.free.push_back(base.index_of(n, names));
    est.validate();
    const auto d = static_cast<Eigen::Index>(mean.size());
    if (static_cast<std::size_t>(d) != pnames.size() || cov.size() != mean.size())
      throw ConfigError("posterior file '" + path + "' has inconsistent dimensions");
    Eigen::MatrixXd S(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) S(i, j) = cov.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(j));
    Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() != Eigen::Success) throw NumericError("posterior covariance is not positive definite");
    const Eigen::MatrixXd L = llt.matrixL();
    const auto n_draws = get<std::size_t>(c, "draws", 100);
    centre = est.expand(mean);
    for (std::size_t s = 0; s < n_draws; ++s) {
      Rng rng(derive_seed(sc.seed, {0xc0f, s}));
      Eigen::VectorXd z(d);
      for (Eigen::Index j = 0; j < d; ++j) z(j) = rng.normal();
      const Eigen::VectorXd th = Eigen::Map<const Eigen::VectorXd>(mean.data(), d) + L * z;
      draws.push_back(est.expand({th.data(), static_cast<std::size_t>(d)}));
    }
  } else {
    c["posterior"] = nullptr;
    c["draws"] = 1;
    draws.push_back(base);
  }

  double normalizer = 1.0;
  if (!c.contains("normalizer") || c["normalizer"].is_null()) c["normalizer"] = 1.0;
  if (c["normalizer"].is_string())
    normalizer = welfare_normalizer(panel, centre[base.index_of(c["normalizer"].get<std::string>(), names)]);
  else
    normalizer = c["normalizer"].get<double>();
  r.resolved["normalizer"] = num(normalizer);

  std::map<std::string, ScenarioRun> runs;
  std::vector<std::string> order = {"base"};
  for (const auto& s : scenarios)
    if (s != "base" && std::find(order.begin(), order.end(), s) == order.end()) order.push_back(s);
  std::string table = "scenario,statistic,mean,lo,hi\n";
  json counters = json::object();
  for (const auto& s : order) {
    const Scenario scen{parse_scenario(s), key};
    runs[s] = run_scenario(panel, draws, scen, sc);
    const ScenarioRun& run = runs[s];
    r.write("trajectory_" + s + ".csv", bands_csv(summarize_trajectories(run.trajectories)));
    if (s != "base")
      r.write("difference_" + s + ".csv",
              bands_csv(welfare_difference(runs["base"].trajectories, run.trajectories, normalizer).bands));
    for (const auto& row : scenario_projection_summary(run))
      table += s + "," + row.name + "," + num(row.mean) + "," + num(row.lo) + "," + num(row.hi) + "\n";
    counters[s] = {{"meetings", run.counters.meetings},
                   {"chose_link", run.counters.chose_link},
                   {"changed", run.counters.changed}};
  }
  r.write("table3.csv", table);
  r.write_json("counters.json", counters);
}

DyadFrame read_dyads(const std::string& path) {
  const CsvTable t = read_csv(path);
  const std::size_t cc = t.column("classroom_id"), cs = t.column("sender"),
                    cr = t.column("receiver"), ce = t.column("edge");
  std::vector<std::size_t> xcols;
  DyadFrame f;
  for (std::size_t j = 0; j < t.header.size(); ++j)
    if (j != cc && j != cs && j != cr && j != ce) {
      xcols.push_back(j);
      f.names.push_back(t.header[j]);
    }
  std::map<std::string, std::size_t> classes, agents;
  const auto n = static_cast<Eigen::Index>(t.rows.size());
  f.y.resize(n);
  f.x.resize(n, static_cast<Eigen::Index>(xcols.size()));
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const auto ri = static_cast<Eigen::Index>(r);
    const auto line = t.path + ":" + std::to_string(t.lines[r]);
    f.cluster.push_back(classes.emplace(row[cc], classes.size()).first->second);
    f.sender.push_back(agents.emplace(row[cc] + "\x1f" + row[cs], agents.size()).first->second);
    f.receiver.push_back(agents.emplace(row[cc] + "\x1f" + row[cr], agents.size()).first->second);
    const auto parse = [&](const std::string& s, const std::string& what) {
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(s, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (s.empty() || used != s.size()) throw ParseError(line + ": " + what + " value '" + s + "' is not a number");
      return v;
    };
    f.y(ri) = parse(row[ce], "edge");
    for (std::size_t l = 0; l < xcols.size(); ++l)
      f.x(ri, static_cast<Eigen::Index>(l)) = parse(row[xcols[l]], t.header[xcols[l]]);
    if (f.sender.back() == f.receiver.back()) throw ParseError(line + ": self-pair");
  }
  return f;
}

void cmd_regress(Run& r) {
  json& g = section(r.cfg, "regress");
  DyadicOptions opt;
  opt.fixed_effects = get<bool>(g, "fixed_effects", false);
  const bool instrument = get<bool>(g, "instrument", false);
  DyadFrame frame;
  if (g.contains("dyads") && !g["dyads"].is_null()) {
    const auto path = g["dyads"].get<std::string>();
    r.input(path);
    frame = read_dyads(path);
  } else {
    g["dyads"] = nullptr;
    frame = dyad_frame(load(r), instrument);
  }
  const DyadicFit fit = dyadic_ols(frame, opt);
  std::string t = "coefficient,estimate,se,stars\n";
  for (std::size_t j = 0; j < fit.names.size(); ++j) {
    const auto ji = static_cast<Eigen::Index>(j);
    t += fit.names[j] + "," + num(fit.coef(ji)) + "," + num(fit.se(ji)) + "," +
         significance_stars(fit.coef(ji), fit.se(ji)) + "\n";
  }
  t += "observations," + std::to_string(fit.n) + ",,\n";
  t += "r2," + num(fit.r2) + ",,\n";
  r.write("table1.csv", t);
  json j;
  j["names"] = fit.names;
  j["coef"] = std::vector<double>(fit.coef.data(), fit.coef.data() + fit.coef.size());
  j["se"] = std::vector<double>(fit.se.data(), fit.se.data() + fit.se.size());
  j["covariance"] = matrix_json(fit.cov);
  j["r2"] = num(fit.r2);
  j["r2_within"] = num(fit.r2_within);
  j["n"] = fit.n;
  j["clusters"] = fit.clusters;
  j["fixed_effects"] = opt.fixed_effects;
  r.write_json("fit.json", j);
}

const Observation& pick_classroom(json& sec, const NetworkPanel& panel) {
  const auto id = get<std::string>(sec, "classroom", panel.observations.front().id);
  for (const auto& o : panel.observations)
    if (o.id == id) return o;
  throw ConfigError("no classroom '" + id + "' in the panel");
}

void cmd_exact(Run& r) {
  const NetworkPanel panel = load(r);
  const ParamVector beta = params_of(r, covariate_names(panel));
  const ShockSpec shocks = shocks_of(r);
  json& e = section(r.cfg, "exact");
  const Observation& o = pick_classroom(e, panel);
  const std::size_t tau = tau_of(r, panel, 1);
  const TransitionMatrix pi = build_transition(o.covariates, beta, shocks);
  const TransitionMatrix pw = matrix_power(pi, tau);
  std::ostringstream t, p, s;
  write_transition_csv(t, pi);
  write_transition_csv(p, pw);
  r.write("transition.csv", t.str());
  r.write("power.csv", p.str());
  json j;
  j["classroom"] = o.id;
  j["states"] = pi.dim();
  j["row_sum_error"] = num(row_sum_error(pi));
  j["tau"] = tau;
  j["positive_entries"] = count_positive_entries(pw);
  j["canonical_positive_entries"] = canonical_positive_count(o.baseline.size(), tau);
  if (get<bool>(e, "stationary", true)) {
    const StationaryResult st = stationary(pi);
    write_stationary_csv(s, st.pi);
    r.write("stationary.csv", s.str());
    j["stationary_iterations"] = st.iterations;
    j["stationary_residual"] = num(st.residual);
    j["flow_balance_violation"] = num(flow_balance_violation(pi, st.pi));
  }
  r.write_json("exact.json", j);
}

void cmd_probe(Run& r) {
  json& p = section(r.cfg, "probe");
  ChainPrimitives prims;
  if (p.contains("gamma") && !p["gamma"].is_null()) {
    GammaVector g;
    const auto v = p["gamma"].get<std::vector<double>>();
    if (v.size() != 8) throw ConfigError("'gamma' needs 8 entries");
    std::copy(v.begin(), v.end(), g.x.begin());
    prims = g.to_primitives();
  } else {
    p["gamma"] = nullptr;
    const NetworkPanel panel = load(r);
    const ParamVector beta = params_of(r, covariate_names(panel));
    const Observation& o = pick_classroom(p, panel);
    prims = primitives_from_model(GameModel(o.covariates, beta, shocks_of(r)));
  }
  const auto tau = get<std::size_t>(p, "tau", 1);
  const auto state = get<std::uint64_t>(p, "state", 0);
  const auto pair = get<std::size_t>(p, "pair", 0);
  const auto start = get<double>(p, "start", 1.0);
  const auto count = get<std::size_t>(p, "count", 20);
  if (pair >= prims.n_pairs() || state >= prims.n_states())
    throw ConfigError("probe state or pair out of range");
  const auto path = geometric_path(start, count);
  const auto emit = [&](const std::string& name, const std::vector<ProbeRow>& rows) {
    std::ostringstream os;
    write_probe_csv(os, rows);
    r.write(name, os.str());
  };
  emit("probe_rho.csv", limit_probe_rho(prims, state, pair, tau, path));
  emit("probe_F.csv", limit_probe_F(prims, state, pair, tau, path));
  emit("probe_matching.csv", limit_probe_matching(prims, state, pair, tau, path));
  if (prims.n_agents == 2) {
    const GammaVector truth = GammaVector::from_primitives(prims);
    const GammaRecovery rec = recover_gamma(gamma_to_pi(truth));
    json sols = json::array();
    for (const auto& s : rec.solutions) sols.push_back(std::vector<double>(s.x.begin(), s.x.end()));
    r.write_json("recovery.json", {{"gamma", std::vector<double>(truth.x.begin(), truth.x.end())},
                                   {"recovered", std::vector<double>(rec.gamma.x.begin(), rec.gamma.x.end())},
                                   {"residual", num(rec.residual)},
                                   {"solutions", sols},
                                   {"unique", rec.solutions.size() == 1}});
  }
}

using Handler = void (*)(Run&);

const std::vector<std::pair<std::string, std::pair<Handler, std::string>>>& commands() {
  static const std::vector<std::pair<std::string, std::pair<Handler, std::string>>> c = {
      {"simulate", {cmd_simulate, "Simulate followups from the panel's baselines"}},
      {"generate", {cmd_generate, "Generate a synthetic panel and its truth file"}},
      {"estimate-tau", {cmd_estimate_tau, "Estimate the number of rounds"}},
      {"loglik", {cmd_loglik, "Exact panel log-likelihood"}},
      {"abc", {cmd_abc, "Accept-reject ABC posterior"}},
      {"ep", {cmd_ep, "EP-ABC posterior"}},
      {"ep-local", {cmd_ep_local, "EP-ABC with fitted local summaries"}},
      {"counterfactual", {cmd_counterfactual, "Policy scenario welfare trajectories"}},
      {"regress", {cmd_regress, "Dyadic regression with clustered errors"}},
      {"exact", {cmd_exact, "Exact transition matrix of one classroom"}},
      {"probe-ident", {cmd_probe, "Identification-at-infinity probes"}},
  };
  return c;
}

json load_config(const std::string& path, const std::string& command) {
  if (path.empty()) return json::object();
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  // A manifest replays its recorded configuration.
  if (j.is_object() && j.contains("config") && j.contains("command")) {
    if (j["command"] != command)
      throw ConfigError("manifest '" + path + "' was written by '" + j["command"].get<std::string>() +
                        "', not '" + command + "'");
    j = j["config"];
  }
  if (!j.is_object()) throw ConfigError(path + ": configuration must be a JSON object");
  return j;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation and likelihood-free estimation for network formation games", "netform"};
  app.require_subcommand(1);
  std::string config_path, out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::map<CLI::App*, std::string> names;
  for (const auto& [name, entry] : commands()) {
    auto* sub = app.add_subcommand(name, entry.second);
    sub->add_option("-c,--config", config_path, "JSON configuration or a manifest to replay");
    sub->add_option("-o,--out", out_dir, "Output directory")->capture_default_str();
    sub->add_option("--seed", seed, "Override the configured seed");
    sub->add_option("--threads", threads, "Override the configured thread count");
    names[sub] = name;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return static_cast<int>(ErrorCategory::Config);
  }

  Run run;
  try {
    CLI::App* sub = app.get_subcommands().front();
    run.command = names.at(sub);
    run.cfg = load_config(config_path, run.command);
    if (seed) run.cfg["seed"] = *seed;
    if (threads) run.cfg["threads"] = *threads;
    run.out = out_dir;
    std::error_code ec;
    fs::create_directories(run.out, ec);
    if (ec) throw ConfigError("cannot create output directory '" + out_dir + "': " + ec.message());
    run.seed();
    run.threads();
    for (const auto& [name, entry] : commands())
      if (name == run.command) entry.first(run);
    run.write_manifest();
    out << run.command << ": wrote " << run.outputs.size() << " files to " << out_dir << "\n";
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(e.category());
  } catch (const json::parse_error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorCategory::Parse);
  } catch (const json::exception& e) {
    err << "error: configuration: " << e.what() << "\n";
    return static_cast<int>(ErrorCategory::Config);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace netform
