#include <doctest.h>

#include <set>

#include "../support.hpp"
#include "netform/error.hpp"
#include "netform/format.hpp"

using namespace netform;

TEST_CASE("pair_index enumerates off-diagonal pairs row-major") {
  for (std::size_t n = 2; n <= 6; ++n) {
    std::size_t expected = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        CHECK(pair_index(n, i, j) == expected);
        const Pair q = pair_from_index(n, expected);
        CHECK(q.sender == i);
        CHECK(q.receiver == j);
        ++expected;
      }
    CHECK(expected == pair_count(n));
  }
}

TEST_CASE("state codes round trip") {
  Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const Network g = testsupport::random_network(4, rng);
    const auto code = g.code();
    CHECK(Network::from_code(4, code) == g);
    const auto v = g.vectorized();
    for (std::size_t p = 0; p < v.size(); ++p) CHECK(((code >> p) & 1U) == v[p]);
  }
  CHECK_THROWS_AS(Network(9).code(), CapacityError);
}

TEST_CASE("from_dense validates entries") {
  const Network g = Network::from_dense(3, {0, 1, 0, 0, 0, 1, 1, 0, 0});
  CHECK(g(0, 1));
  CHECK(g(1, 2));
  CHECK(g(2, 0));
  CHECK(g.edge_count() == 3);
  CHECK_THROWS_AS(Network::from_dense(2, {1, 0, 0, 0}), ValidationError);
  CHECK_THROWS_AS(Network::from_dense(2, {0, 2, 0, 0}), ValidationError);
  CHECK_THROWS_AS(Network::from_dense(2, {0, 1, 0}), ValidationError);
  Network h(3);
  CHECK_THROWS_AS(h.set(1, 1, true), ValidationError);
  CHECK_THROWS_AS(h.set(0, 3, true), ValidationError);
}

TEST_CASE("edge_distance counts differing pairs") {
  Rng rng(5);
  const Network a = testsupport::random_network(5, rng);
  const Network b = testsupport::random_network(5, rng);
  std::size_t d = 0;
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) d += i != j && a(i, j) != b(i, j);
  CHECK(edge_distance(a, b) == d);
  CHECK(edge_distance(a, a) == 0);
  CHECK_THROWS_AS(edge_distance(a, Network(4)), ValidationError);
}

TEST_CASE("parameter layout and names") {
  ParamVector b(2);
  CHECK(b.size() == 13);
  CHECK(ParamVector::k_for_size(13) == 2);
  CHECK(ParamVector::k_for_size(5) == 0);
  CHECK_THROWS_AS(ParamVector::k_for_size(12), ConfigError);
  const std::vector<std::string> cov{"gender", "skills"};
  const auto names = b.names(cov);
  REQUIRE(names.size() == 13);
  CHECK(names[0] == "match:gender");
  CHECK(names[2] == "match:link");
  CHECK(names[3] == "match:instrument");
  CHECK(names[4] == "direct:intercept");
  CHECK(names[6] == "direct:skills");
  CHECK(names[7] == "mutual:intercept");
  CHECK(names[10] == "indirect:intercept");
  for (std::size_t i = 0; i < names.size(); ++i) CHECK(b.index_of(names[i], cov) == i);
  CHECK_THROWS_AS(b.index_of("direct:height", cov), ConfigError);
  CHECK_THROWS_AS(ParamVector(1, {1, 2, 3}), ConfigError);
  CHECK_THROWS_AS(ParamVector(0, {1, 2, 3, 4, std::nan("")}), ConfigError);
}

TEST_CASE("format_double round trips") {
  Rng rng(9);
  for (int i = 0; i < 1000; ++i) {
    const double v = (rng.uniform() - 0.5) * std::pow(10.0, 20 * rng.uniform() - 10);
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("derived seeds are distinct along paths") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 30; ++a)
    for (std::uint64_t b = 0; b < 30; ++b) seen.insert(derive_seed(7, {a, b}));
  CHECK(seen.size() == 900);
  CHECK(derive_seed(7, {1, 2}) != derive_seed(7, {2, 1}));
  Rng r1(11), r2(11);
  for (int i = 0; i < 100; ++i) CHECK(r1() == r2());
}
