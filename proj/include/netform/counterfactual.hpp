#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "netform/dyadic.hpp"
#include "netform/game.hpp"
#include "netform/panel.hpp"

namespace netform {

enum class ScenarioKind { Base, RandomMatching, Tracking, RandomFriendship };

/// A policy scenario. Scenarios change how pairs meet or choose, or which
/// classroom students sit in; preferences are left alone, so welfare is
/// always computed with the unmodified utility coefficients.
struct Scenario {
  ScenarioKind kind = ScenarioKind::Base;
  std::string tracking_key = "cognitive_skills";

  Dynamics dynamics() const noexcept;
};

std::string scenario_name(ScenarioKind kind);
/// Accepts base, random-matching, tracking, random-friendship. Throws
/// ConfigError otherwise.
ScenarioKind parse_scenario(const std::string& name);

/// Reassigns students to classrooms within each (school, grade): students
/// are sorted by `key` (ties by their order in the panel) and poured into
/// that group's classrooms in panel order, keeping every classroom's size.
/// Within a new classroom students keep the relative order of their old
/// class-list positions, which are renumbered 1..n. Baseline and followup
/// links survive only between former classmates. Throws ConfigError when a
/// classroom has no agent table or the key is missing.
NetworkPanel apply_tracking(const NetworkPanel& panel, const std::string& key);

/// Welfare components in the order total, direct, mutual, indirect,
/// popularity.
constexpr std::size_t kWelfareComponents = 5;
const std::array<std::string, kWelfareComponents>& welfare_component_names();

/// Panel welfare sum_c sum_i u_i(g_c) by component, one entry per round 0..tau.
struct WelfareTrajectory {
  std::vector<std::array<double, kWelfareComponents>> rounds;
};

std::array<double, kWelfareComponents> welfare_components(const UtilityParts& parts);

struct ScenarioConfig {
  std::size_t tau = 1;
  std::size_t replicates = 1;  // simulated panels per posterior draw
  /// Same simulation streams in every scenario. Otherwise the scenario kind
  /// enters each stream's seed.
  bool common_random_numbers = true;
  bool keep_followups = true;
  ShockSpec shocks;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

struct ScenarioRun {
  Scenario scenario;
  NetworkPanel panel;  // starting panel (reallocated under tracking)
  std::vector<WelfareTrajectory> trajectories;  // draw-major: s = draw * replicates + r
  std::vector<std::vector<Network>> followups;  // per simulation, per classroom
  StepCounters counters;
};

/// Simulates every (posterior draw, replicate) for tau rounds from the
/// baseline networks. Simulation s on classroom c uses the stream
/// derive_seed(seed, {s, c}) under common random numbers.
ScenarioRun run_scenario(const NetworkPanel& panel, const std::vector<ParamVector>& draws,
                         const Scenario& scenario, const ScenarioConfig& cfg);

struct BandRow {
  std::size_t round;
  std::string component;
  double mean, lo, hi;  // lo/hi: 2.5% and 97.5% quantiles over simulations
};

/// Per-round means and 95% bands over simulations.
std::vector<BandRow> summarize_trajectories(const std::vector<WelfareTrajectory>& trajectories);

struct WelfareDifference {
  std::vector<WelfareTrajectory> per_simulation;
  std::vector<BandRow> bands;
};

/// (alt - base) / normalizer, pairing simulations by index. Throws
/// ConfigError on a zero normalizer or mismatched shapes.
WelfareDifference welfare_difference(const std::vector<WelfareTrajectory>& base,
                                     const std::vector<WelfareTrajectory>& alt, double normalizer);

/// Number of students times minus the given direct-utility coefficient.
double welfare_normalizer(const NetworkPanel& panel, double direct_coefficient);

struct ProjectionRow {
  std::string name;
  double mean, lo, hi;
};

/// Regression of each simulated followup panel's edge indicators on the
/// pair covariates (no fixed effects), plus the edge indicator mean and
/// standard deviation, summarized over simulations.
std::vector<ProjectionRow> scenario_projection_summary(const ScenarioRun& run);

}  // namespace netform
