#include "netform/panel.hpp"

#include "netform/error.hpp"
#include "netform/tau.hpp"

namespace netform {

std::size_t NetworkPanel::k() const noexcept {
  return observations.empty() ? 0 : observations.front().covariates.k();
}

void NetworkPanel::validate() const {
  for (const auto& o : observations) {
    const std::size_t n = o.covariates.n_agents();
    if (o.baseline.size() != n || o.followup.size() != n)
      throw ValidationError("network '" + o.id + "': baseline has " +
                            std::to_string(o.baseline.size()) + " agents, followup " +
                            std::to_string(o.followup.size()) + ", covariates " +
                            std::to_string(n));
    if (o.covariates.k() != k())
      throw ValidationError("network '" + o.id + "' has " + std::to_string(o.covariates.k()) +
                            " covariates, expected " + std::to_string(k()));
    if (n < 2) throw ValidationError("network '" + o.id + "' has fewer than 2 agents");
  }
}

TauEstimate estimate_tau(const NetworkPanel& panel) {
  if (panel.empty()) throw ConfigError("estimate_tau needs a nonempty panel");
  TauEstimate out;
  for (const auto& o : panel.observations) {
    out.distances.push_back(edge_distance(o.baseline, o.followup));
    out.tau_hat = std::max(out.tau_hat, out.distances.back());
  }
  for (const auto& o : panel.observations)
    if (out.tau_hat > pair_count(o.baseline.size())) out.bound_violations.push_back(o.id);
  return out;
}

}  // namespace netform
