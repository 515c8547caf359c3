#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "netform/panel.hpp"

namespace netform {

struct TauEstimate {
  std::size_t tau_hat = 0;
  /// Networks where tau_hat > N_c (N_c - 1).
  std::vector<std::string> bound_violations;
  std::vector<std::size_t> distances;  // per observation
};

/// tau_hat = max_c edge_distance(baseline_c, followup_c). Throws ConfigError
/// on an empty panel.
TauEstimate estimate_tau(const NetworkPanel& panel);

}  // namespace netform
