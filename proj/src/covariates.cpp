#include "netform/covariates.hpp"

#include <algorithm>
#include <cmath>

#include "netform/error.hpp"

namespace netform {

CovariateSet::CovariateSet(std::size_t n_agents, std::size_t k, std::vector<std::string> names)
    : n_(n_agents),
      k_(k),
      names_(std::move(names)),
      w_(n_agents * n_agents * k, 0.0),
      z_(n_agents * n_agents, 0.0) {
  if (!names_.empty() && names_.size() != k)
    throw ConfigError("covariate names: got " + std::to_string(names_.size()) + ", expected " +
                      std::to_string(k));
  if (names_.empty())
    for (std::size_t l = 0; l < k; ++l) names_.push_back("w" + std::to_string(l + 1));
}

std::size_t AgentTable::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw ConfigError("agent attribute '" + name + "' not present");
  return static_cast<std::size_t>(it - columns.begin());
}

std::vector<std::string> CovariateSpec::resolved_attributes(const AgentTable& agents) const {
  if (!attributes.empty()) return attributes;
  std::vector<std::string> out;
  for (const auto& c : agents.columns)
    if (c != order_column) out.push_back(c);
  return out;
}

bool CovariateSpec::is_categorical(const std::string& name) const {
  return std::find(categorical.begin(), categorical.end(), name) != categorical.end();
}

CovariateSet derive_covariates(const AgentTable& agents, const CovariateSpec& spec) {
  const auto names = spec.resolved_attributes(agents);
  const std::size_t n = agents.size();
  std::vector<std::size_t> cols;
  for (const auto& name : names) cols.push_back(agents.column(name));

  CovariateSet x(n, names.size(), names);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      for (std::size_t l = 0; l < cols.size(); ++l) {
        const double a = agents.values[i][cols[l]];
        const double b = agents.values[j][cols[l]];
        x.set_covariate(i, j, l, spec.is_categorical(names[l]) ? (a != b ? 1.0 : 0.0)
                                                              : std::abs(a - b));
      }
    }

  const auto order = std::find(agents.columns.begin(), agents.columns.end(), spec.order_column);
  if (order != agents.columns.end()) {
    const std::size_t oc = static_cast<std::size_t>(order - agents.columns.begin());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) x.set_instrument(i, j, std::abs(agents.values[i][oc] - agents.values[j][oc]));
  }
  return x;
}

}  // namespace netform
