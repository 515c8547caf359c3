#include "netform/params.hpp"

#include <algorithm>
#include <cmath>

#include "netform/error.hpp"

namespace netform {

ParamVector::ParamVector(std::size_t k, std::vector<double> values) : k_(k), v_(std::move(values)) {
  if (v_.size() != size_for(k))
    throw ConfigError("parameter vector has " + std::to_string(v_.size()) +
                      " entries, expected " + std::to_string(size_for(k)) + " for k=" +
                      std::to_string(k));
  validate();
}

std::size_t ParamVector::k_for_size(std::size_t size) {
  if (size < 5 || (size - 5) % 4 != 0)
    throw ConfigError("parameter vector length " + std::to_string(size) +
                      " is not of the form 4k+5");
  return (size - 5) / 4;
}

std::vector<std::string> ParamVector::names(const std::vector<std::string>& covariates) const {
  if (covariates.size() != k_)
    throw ConfigError("covariate names: got " + std::to_string(covariates.size()) +
                      ", parameters expect k=" + std::to_string(k_));
  std::vector<std::string> out;
  out.reserve(size());
  for (const auto& c : covariates) out.push_back("match:" + c);
  out.push_back("match:link");
  out.push_back("match:instrument");
  for (const char* block : {"direct", "mutual", "indirect"}) {
    out.push_back(std::string(block) + ":intercept");
    for (const auto& c : covariates) out.push_back(std::string(block) + ":" + c);
  }
  return out;
}

std::size_t ParamVector::index_of(const std::string& name,
                                  const std::vector<std::string>& covariates) const {
  const auto all = names(covariates);
  const auto it = std::find(all.begin(), all.end(), name);
  if (it == all.end()) throw ConfigError("unknown coefficient '" + name + "'");
  return static_cast<std::size_t>(it - all.begin());
}

void ParamVector::validate() const {
  for (std::size_t i = 0; i < v_.size(); ++i)
    if (!std::isfinite(v_[i]))
      throw ConfigError("coefficient " + std::to_string(i) + " is not finite");
}

}  // namespace netform
