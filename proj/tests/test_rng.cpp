#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "cace/rng.hpp"

using namespace cace;

TEST_CASE("replication seeds are injective and deterministic", "[rng]") {
  for (std::uint64_t master : {0ull, 1ull, 20230401ull, 0xFFFFFFFFFFFFFFFFull}) {
    CHECK(derive_rep_seed(master, 0) != derive_rep_seed(master, 1));
    CHECK(derive_rep_seed(master, 5) == derive_rep_seed(master, 5));
  }

  SECTION("500 streams from one master seed have pairwise distinct first draws") {
    std::set<std::uint64_t> first_draws;
    for (std::uint64_t rep = 0; rep < 500; ++rep) {
      RngStream stream(derive_rep_seed(20230401, rep));
      first_draws.insert(stream.next_u64());
    }
    CHECK(first_draws.size() == 500);
  }
}

TEST_CASE("same seed reproduces the same draw sequence", "[rng]") {
  RngStream a(derive_rep_seed(7, 3));
  RngStream b(derive_rep_seed(7, 3));
  for (int i = 0; i < 100; ++i) {
    CHECK(a.uniform01() == b.uniform01());
    CHECK(a.normal(0.0, 1.0) == b.normal(0.0, 1.0));
  }
}

TEST_CASE("uniform01 stays in [0,1) and looks flat", "[rng]") {
  RngStream stream(42);
  double sum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double u = stream.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  // se of the mean is 1/sqrt(12 n) ~ 0.002
  CHECK(sum / n == Catch::Approx(0.5).margin(0.01));
}

TEST_CASE("normal draws match the requested moments", "[rng]") {
  RngStream stream(99);
  const int n = 20000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = stream.normal(74.0, 1.0);
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(mean == Catch::Approx(74.0).margin(4.0 / std::sqrt(n)));
  CHECK(var == Catch::Approx(1.0).margin(0.05));
}

TEST_CASE("bounded draws cover [0,n) without bias", "[rng]") {
  RngStream stream(5);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 14000; ++i) {
    const auto k = stream.uniform_below(7);
    REQUIRE(k < 7);
    ++counts[static_cast<std::size_t>(k)];
  }
  for (int c : counts) CHECK(c == Catch::Approx(2000).margin(300));
}

TEST_CASE("shuffle produces a permutation", "[rng]") {
  RngStream stream(11);
  std::vector<int> values(40);
  for (int i = 0; i < 40; ++i) values[static_cast<std::size_t>(i)] = i;
  auto shuffled = values;
  stream.shuffle(shuffled);
  CHECK(shuffled != values);  // 1/40! chance of failure
  std::sort(shuffled.begin(), shuffled.end());
  CHECK(shuffled == values);
}
