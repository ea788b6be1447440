#include <algorithm>
#include <set>

#include "doctest.h"
#include "sbdl/random.hpp"
#include "test_helpers.hpp"

using namespace sbdl;
using testing::Moment;

TEST_CASE("same seed, same stream") {
  Rng a(123), b(123), c(124);
  for (int i = 0; i < 100; ++i) {
    const double x = a.normal();
    CHECK(x == b.normal());
  }
  CHECK(a == b);
  CHECK(a.gamma(2.0, 1.0) == b.gamma(2.0, 1.0));
  CHECK(Rng(123).uniform() != c.uniform());
}

TEST_CASE("uniform and uniform_index stay in range") {
  Rng rng(1);
  Moment u;
  for (int i = 0; i < 100000; ++i) {
    const double v = rng.uniform();
    REQUIRE(v >= 0.0);
    REQUIRE(v < 1.0);
    u.add(v);
  }
  CHECK(u.agrees(0.5));
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[rng.uniform_index(7)];
  for (const int c : counts) CHECK(std::abs(c - 10000) < 400);
}

TEST_CASE("normal variates have unit variance") {
  Rng rng(2);
  Moment first, second;
  for (int i = 0; i < 200000; ++i) {
    const double v = rng.normal();
    first.add(v);
    second.add(v * v);
  }
  CHECK(first.agrees(0.0));
  CHECK(second.agrees(1.0));
}

TEST_CASE("gamma variates match shape/rate moments, including shape < 1") {
  for (const double shape : {0.3, 1.0, 1.5, 20.0}) {
    CAPTURE(shape);
    Rng rng(3);
    const double rate = 2.0;
    Moment first, second;
    for (int i = 0; i < 200000; ++i) {
      const double v = rng.gamma(shape, rate);
      REQUIRE(v > 0.0);
      first.add(v);
      second.add(v * v);
    }
    CHECK(first.agrees(shape / rate));
    CHECK(second.agrees(shape * (shape + 1.0) / (rate * rate)));
  }
}

TEST_CASE("sample_without_replacement draws distinct in-range indices") {
  Rng rng(4);
  const auto picks = rng.sample_without_replacement(10, 10);
  CHECK(std::set<Eigen::Index>(picks.begin(), picks.end()).size() == 10);
  std::vector<int> first_counts(5, 0);
  for (int i = 0; i < 50000; ++i) {
    const auto p = rng.sample_without_replacement(5, 2);
    REQUIRE(p[0] != p[1]);
    ++first_counts[static_cast<std::size_t>(p[0])];
  }
  for (const int c : first_counts) CHECK(std::abs(c - 10000) < 400);
}
