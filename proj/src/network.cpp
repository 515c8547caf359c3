#include "netform/network.hpp"

#include <string>

#include "netform/error.hpp"

namespace netform {

Network::Network(std::size_t n_agents) : n_(n_agents), adj_(n_agents * n_agents, 0) {}

void Network::set(std::size_t i, std::size_t j, bool value) {
  if (i >= n_ || j >= n_)
    throw ValidationError("network index (" + std::to_string(i) + "," + std::to_string(j) +
                          ") out of range for N=" + std::to_string(n_));
  if (i == j) throw ValidationError("self-link requested for agent " + std::to_string(i));
  set_unchecked(i, j, value);
}

std::size_t Network::edge_count() const noexcept {
  std::size_t count = 0;
  for (auto v : adj_) count += v;
  return count;
}

std::vector<std::uint8_t> Network::vectorized() const {
  std::vector<std::uint8_t> out;
  out.reserve(n_pairs());
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j)
      if (i != j) out.push_back(adj_[i * n_ + j]);
  return out;
}

std::uint64_t Network::code() const {
  if (n_pairs() > 64)
    throw CapacityError("state code needs N(N-1) <= 64, got N=" + std::to_string(n_));
  std::uint64_t c = 0;
  std::size_t bit = 0;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) {
      if (i == j) continue;
      if (adj_[i * n_ + j]) c |= std::uint64_t{1} << bit;
      ++bit;
    }
  return c;
}

Network Network::from_code(std::size_t n_agents, std::uint64_t code) {
  if (pair_count(n_agents) > 64)
    throw CapacityError("state code needs N(N-1) <= 64, got N=" + std::to_string(n_agents));
  Network g(n_agents);
  std::size_t bit = 0;
  for (std::size_t i = 0; i < n_agents; ++i)
    for (std::size_t j = 0; j < n_agents; ++j) {
      if (i == j) continue;
      g.adj_[i * n_agents + j] = (code >> bit) & 1U;
      ++bit;
    }
  return g;
}

Network Network::from_dense(std::size_t n_agents, const std::vector<int>& entries) {
  if (entries.size() != n_agents * n_agents)
    throw ValidationError("dense adjacency has " + std::to_string(entries.size()) +
                          " entries, expected " + std::to_string(n_agents * n_agents));
  Network g(n_agents);
  for (std::size_t i = 0; i < n_agents; ++i)
    for (std::size_t j = 0; j < n_agents; ++j) {
      const int v = entries[i * n_agents + j];
      if (v != 0 && v != 1)
        throw ValidationError("adjacency entry (" + std::to_string(i) + "," + std::to_string(j) +
                              ") is not binary");
      if (i == j && v != 0)
        throw ValidationError("nonzero diagonal at agent " + std::to_string(i));
      g.adj_[i * n_agents + j] = static_cast<std::uint8_t>(v);
    }
  return g;
}

std::size_t edge_distance(const Network& a, const Network& b) {
  if (a.size() != b.size())
    throw ValidationError("edge_distance: networks have " + std::to_string(a.size()) + " and " +
                          std::to_string(b.size()) + " agents");
  std::size_t d = 0;
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d += a(i, j) != b(i, j);
  return d;
}

}  // namespace netform
