#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace netform {

/// Index of the ordered pair (i, j), i != j, in row-major order with the
/// diagonal skipped. This order is shared by meeting-probability vectors, the
/// bits of exact-chain state codes and vectorized followup statistics.
constexpr std::size_t pair_index(std::size_t n, std::size_t i, std::size_t j) noexcept {
  return i * (n - 1) + (j < i ? j : j - 1);
}

struct Pair {
  std::size_t sender;
  std::size_t receiver;
};

constexpr Pair pair_from_index(std::size_t n, std::size_t p) noexcept {
  const std::size_t i = p / (n - 1);
  const std::size_t r = p % (n - 1);
  return {i, r < i ? r : r + 1};
}

constexpr std::size_t pair_count(std::size_t n) noexcept { return n * (n - 1); }

/// Directed friendship network: N x N binary adjacency matrix with zero
/// diagonal. g(i, j) == 1 means i names j.
class Network {
 public:
  Network() = default;
  explicit Network(std::size_t n_agents);

  std::size_t size() const noexcept { return n_; }
  std::size_t n_pairs() const noexcept { return pair_count(n_); }

  bool operator()(std::size_t i, std::size_t j) const noexcept { return adj_[i * n_ + j] != 0; }

  /// Throws ValidationError for i == j or out-of-range indices.
  void set(std::size_t i, std::size_t j, bool value);
  void set_unchecked(std::size_t i, std::size_t j, bool value) noexcept {
    adj_[i * n_ + j] = value ? 1 : 0;
  }

  bool at_pair(std::size_t p) const noexcept {
    const Pair q = pair_from_index(n_, p);
    return (*this)(q.sender, q.receiver);
  }

  std::size_t edge_count() const noexcept;

  /// Off-diagonal entries in pair_index order, as 0/1.
  std::vector<std::uint8_t> vectorized() const;

  /// State code: bit p holds the edge at pair_index p. Requires N(N-1) <= 64.
  std::uint64_t code() const;
  static Network from_code(std::size_t n_agents, std::uint64_t code);

  /// Builds from a dense row-major 0/1 matrix; validates binary entries and
  /// zero diagonal.
  static Network from_dense(std::size_t n_agents, const std::vector<int>& entries);

  friend bool operator==(const Network&, const Network&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> adj_;
};

/// Number of ordered pairs where the two networks differ. Throws
/// ValidationError on a size mismatch.
std::size_t edge_distance(const Network& a, const Network& b);

}  // namespace netform
