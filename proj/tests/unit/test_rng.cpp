#include <doctest.h>

#include <algorithm>
#include <set>

#include "gselc/rng.hpp"

using gselc::Rng;

TEST_CASE("same seed replays the same stream") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
  CHECK(a == b);
  Rng c(43);
  CHECK(a.next_u64() != c.next_u64());
}

TEST_CASE("next_double lies in [0,1) and fills the range") {
  Rng rng(7);
  double lo = 1.0, hi = 0.0, sum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("next_below stays in range and rejects bad bounds") {
  Rng rng(11);
  std::set<std::int64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = rng.next_below(7);
    CHECK(v >= 0);
    CHECK(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
  CHECK_THROWS_AS(rng.next_below(0), std::invalid_argument);
  CHECK_THROWS_AS(rng.next_below(-3), std::invalid_argument);
}

TEST_CASE("next_in covers the interval") {
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const double v = rng.next_in(-2.0, 3.0);
    CHECK(v >= -2.0);
    CHECK(v < 3.0);
  }
}

TEST_CASE("sample_indices draws distinct indices, works at either extreme") {
  Rng rng(3);
  const auto sample = rng.sample_indices(1000000000, 20);
  CHECK(sample.size() == 20);
  std::set<std::int64_t> distinct(sample.begin(), sample.end());
  CHECK(distinct.size() == 20);
  for (const auto v : sample) {
    CHECK(v >= 0);
    CHECK(v < 1000000000);
  }

  const auto all = rng.sample_indices(6, 6);
  std::set<std::int64_t> perm(all.begin(), all.end());
  CHECK(perm.size() == 6);
  CHECK(*perm.begin() == 0);
  CHECK(*perm.rbegin() == 5);

  CHECK(rng.sample_indices(5, 0).empty());
  CHECK_THROWS_AS(rng.sample_indices(3, 4), std::invalid_argument);
  CHECK_THROWS_AS(rng.sample_indices(3, -1), std::invalid_argument);
}

TEST_CASE("pick_weighted respects zero weights and validates input") {
  Rng rng(9);
  Eigen::VectorXd w(4);
  w << 0.0, 2.0, 0.0, 1.0;
  std::set<int> seen;
  for (int i = 0; i < 500; ++i) seen.insert(rng.pick_weighted(w));
  CHECK(seen == std::set<int>{1, 3});

  Eigen::VectorXd neg(2);
  neg << 1.0, -0.5;
  CHECK_THROWS_AS(rng.pick_weighted(neg), std::invalid_argument);
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(rng.pick_weighted(zero), std::invalid_argument);
  Eigen::VectorXd nan(2);
  nan << 1.0, std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(rng.pick_weighted(nan), std::invalid_argument);
}

TEST_CASE("serialize round-trips mid-stream") {
  Rng rng(123);
  for (int i = 0; i < 57; ++i) rng.next_u64();
  const std::string text = rng.serialize();
  Rng copy = Rng::deserialize(text);
  CHECK(copy == rng);
  for (int i = 0; i < 100; ++i) CHECK(copy.next_u64() == rng.next_u64());
  CHECK_THROWS(Rng::deserialize("not a stream ###"));
}

TEST_CASE("shuffle permutes deterministically") {
  std::vector<int> v{1, 2, 3, 4, 5, 6, 7};
  std::vector<int> w = v;
  Rng a(17), b(17);
  a.shuffle(v);
  b.shuffle(w);
  CHECK(v == w);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<int>{1, 2, 3, 4, 5, 6, 7});
}
