#include <doctest.h>

#include "../support.hpp"
#include "netform/error.hpp"
#include "netform/game.hpp"
#include "netform/tau.hpp"

using namespace netform;

namespace {

Observation obs(const std::string& id, Network a, Network b) {
  Observation o;
  o.id = id;
  o.covariates = CovariateSet(a.size(), 0);
  o.baseline = std::move(a);
  o.followup = std::move(b);
  return o;
}

}  // namespace

TEST_CASE("tau_hat is the largest edge distance") {
  Rng rng(61);
  NetworkPanel panel;
  std::size_t want = 0;
  for (int c = 0; c < 8; ++c) {
    auto a = testsupport::random_network(4, rng), b = testsupport::random_network(4, rng);
    want = std::max(want, edge_distance(a, b));
    panel.observations.push_back(obs("c" + std::to_string(c), a, b));
  }
  const auto est = estimate_tau(panel);
  CHECK(est.tau_hat == want);
  CHECK(est.distances.size() == 8);
  CHECK(est.bound_violations.empty());
}

TEST_CASE("edge cases") {
  NetworkPanel same;
  same.observations.push_back(obs("a", Network(3), Network(3)));
  CHECK(estimate_tau(same).tau_hat == 0);

  NetworkPanel one;
  one.observations.push_back(obs("a", Network(3), Network(3)));
  Network g(3);
  g.set(0, 2, true);
  one.observations.push_back(obs("b", Network(3), g));
  CHECK(estimate_tau(one).tau_hat == 1);

  CHECK_THROWS_AS(estimate_tau(NetworkPanel{}), ConfigError);
}

TEST_CASE("simulated panels recover tau when every edge flips once") {
  // With links that are always chosen from an empty start, each round adds an
  // edge until the network is complete.
  CovariateSet x(4, 0);
  ParamVector b(0);
  b[b.direct_offset()] = 50;
  b[b.delta0_index()] = -50;
  NetworkPanel panel;
  for (int c = 0; c < 5; ++c) {
    SimConfig cfg{5, derive_seed(1, {std::uint64_t(c)}), false};
    const auto r = simulate(Network(4), x, b, {}, cfg);
    panel.observations.push_back(obs("c" + std::to_string(c), Network(4), r.final));
  }
  CHECK(estimate_tau(panel).tau_hat == 5);
}
