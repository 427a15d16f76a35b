#include "doctest.h"

#include <cmath>
#include <set>

#include "flock/rational.hpp"
#include "flock/rng.hpp"
#include "flock/stats.hpp"
#include "flock/threads.hpp"

using namespace flock;

TEST_CASE("rng determinism and substreams") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng base(7);
  Rng s1 = base.substream(1);
  Rng s2 = base.substream(2);
  Rng s1_again = base.substream(1);
  CHECK(s1.next_u64() == s1_again.next_u64());
  CHECK(s1.next_u64() != s2.next_u64());
}

TEST_CASE("rng uniform_int range and rough uniformity") {
  Rng rng(123);
  std::vector<long> counts(7, 0);
  const int draws = 70000;
  for (int i = 0; i < draws; ++i) {
    int x = rng.uniform_int(7);
    REQUIRE(x >= 0);
    REQUIRE(x < 7);
    counts[x]++;
  }
  double p = chi_squared_test(counts, std::vector<double>(7, 1.0 / 7));
  CHECK(p > 0.001);
}

TEST_CASE("rng normal moments") {
  Rng rng(5);
  double sum = 0.0, sq = 0.0;
  const int draws = 200000;
  for (int i = 0; i < draws; ++i) {
    double x = rng.normal();
    sum += x;
    sq += x * x;
  }
  CHECK(std::fabs(sum / draws) < 0.01);
  CHECK(std::fabs(sq / draws - 1.0) < 0.02);
}

TEST_CASE("rational arithmetic is exact") {
  Rational third(1, 3), half(1, 2);
  CHECK(third + third + third == Rational(1));
  CHECK(third * half == Rational(1, 6));
  CHECK(Rational(2, 4) == half);
  CHECK(Rational(-1, -2) == half);
  CHECK((half - third) == Rational(1, 6));
  CHECK_THROWS(Rational(1, 0));
}

TEST_CASE("chi-squared p-values at reference points") {
  // Classic critical values: P(X^2_1 >= 3.841) ~ 0.05, P(X^2_5 >= 15.086) ~ 0.01.
  CHECK(chi_squared_p_value(3.841, 1) == doctest::Approx(0.05).epsilon(0.01));
  CHECK(chi_squared_p_value(15.086, 5) == doctest::Approx(0.01).epsilon(0.01));
  CHECK(chi_squared_p_value(0.0, 3) == doctest::Approx(1.0));
}

TEST_CASE("median") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
}

TEST_CASE("parallel_for covers every index once regardless of thread count") {
  for (int threads : {1, 2, 5}) {
    std::vector<int> hits(100, 0);
    parallel_for(100, threads, [&](int i) { hits[i]++; });
    for (int h : hits) CHECK(h == 1);
  }
}
