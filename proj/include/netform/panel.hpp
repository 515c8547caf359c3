#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "netform/covariates.hpp"
#include "netform/network.hpp"

namespace netform {

/// One classroom: networks at the two survey dates plus its covariates.
struct Observation {
  std::string id;
  Network baseline;
  Network followup;
  CovariateSet covariates;
  AgentTable agents;  // raw attributes; may be empty for synthetic panels
};

struct NetworkPanel {
  std::vector<Observation> observations;
  CovariateSpec spec;

  std::size_t size() const noexcept { return observations.size(); }
  bool empty() const noexcept { return observations.empty(); }
  /// Common covariate length; 0 for an empty panel.
  std::size_t k() const noexcept;
  /// Throws ValidationError when a network's size disagrees with its
  /// covariates or covariate lengths differ across observations.
  void validate() const;
};

}  // namespace netform
