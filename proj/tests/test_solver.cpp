#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "optdesign/error.hpp"
#include "optdesign/solver.hpp"
#include "oracles.hpp"

using namespace optdesign;

namespace {

VarianceVector random_v(std::mt19937_64& rng, double lo = 1.0, double hi = 20.0) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return VarianceVector({std::exp(u(rng)), std::exp(u(rng)), std::exp(u(rng)), std::exp(u(rng))});
}

VarianceVector random_unsaturated(std::mt19937_64& rng) {
  while (true) {
    const VarianceVector v = random_v(rng);
    if (!is_saturated(v).saturated) return v;
  }
}

double max_diff(const DesignMeasure& a, const std::array<double, 4>& b) {
  double d = 0.0;
  for (int i = 0; i < 4; ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

// Unsimplified forms of the two closed-form solutions.
std::array<double, 4> triple_literal(double v1, double v) {
  const double d = 9 * v - v1;
  return {(3 * v - v1) / d, 2 * v / d, 2 * v / d, 2 * v / d};
}

struct Cor2 {
  std::array<double, 4> p;
  double L;
};
Cor2 pairs_literal(double u, double v) {
  const double d = std::sqrt(u * u - u * v + v * v);
  const double a = (2 * u - v - d) / (6 * (u - v));
  const double b = (u - 2 * v + d) / (6 * (u - v));
  const double L = (2 * u - v - d) * (u - 2 * v + d) * (u + v + d) / (108 * (u - v) * (u - v));
  return {{a, a, b, b}, L};
}

}  // namespace

TEST_CASE("is_saturated") {
  auto s = is_saturated(VarianceVector({10, 1, 2, 3}));
  CHECK(s.saturated);
  CHECK(s.index == 0);
  s = is_saturated(VarianceVector({6, 1, 2, 3}));
  CHECK(s.saturated);
  CHECK(s.index == 0);
  s = is_saturated(VarianceVector({1, 1, 1, 1}));
  CHECK_FALSE(s.saturated);
  CHECK(s.index == 0);
  CHECK(is_saturated(VarianceVector({3, 9, 3, 9})).index == 1);
}

TEST_CASE("solve_saturated") {
  auto r = solve_saturated(VarianceVector({6, 1, 2, 3}));
  CHECK(max_diff(r.p, {0, 1.0 / 3, 1.0 / 3, 1.0 / 3}) < 1e-15);
  CHECK(r.L_max == doctest::Approx(2.0 / 9).epsilon(1e-14));
  CHECK(r.branch == Branch::saturated);
  r = solve_saturated(VarianceVector({1, 2, 3, 9}));
  CHECK(max_diff(r.p, {1.0 / 3, 1.0 / 3, 1.0 / 3, 0}) < 1e-15);
  CHECK_THROWS_AS(solve_saturated(VarianceVector({1, 2, 3, 4})), ValidationError);
}

TEST_CASE("solve_corollary1") {
  auto r = solve_corollary1(VarianceVector({2, 3, 3, 3}));
  REQUIRE(r);
  CHECK(max_diff(r->p, {0.28, 0.24, 0.24, 0.24}) < 1e-15);
  CHECK(r->L_max == doctest::Approx(108.0 / 625).epsilon(1e-14));
  CHECK(r->branch == Branch::corollary1);

  r = solve_corollary1(VarianceVector({3, 3, 3, 3}));
  REQUIRE(r);
  CHECK(max_diff(r->p, {0.25, 0.25, 0.25, 0.25}) < 1e-15);

  r = solve_corollary1(VarianceVector({9, 3, 3, 3}));
  REQUIRE(r);
  CHECK(max_diff(r->p, {0, 1.0 / 3, 1.0 / 3, 1.0 / 3}) < 1e-15);

  // odd point elsewhere, against the literal formula
  r = solve_corollary1(VarianceVector({5, 5, 1.5, 5}));
  REQUIRE(r);
  const auto lit = triple_literal(1.5, 5);
  CHECK(max_diff(r->p, {lit[1], lit[2], lit[0], lit[3]}) < 1e-15);
  CHECK(r->L_max == doctest::Approx(4 * 125.0 / ((45 - 1.5) * (45 - 1.5))).epsilon(1e-13));

  CHECK_FALSE(solve_corollary1(VarianceVector({1, 2, 3, 4})));
  CHECK_FALSE(solve_corollary1(VarianceVector({10, 3, 3, 3})));
  CHECK_FALSE(solve_corollary1(VarianceVector({2, 3, 3, 3.000001})));
}

TEST_CASE("solve_corollary2") {
  auto r = solve_corollary2(VarianceVector({2, 2, 1, 1}));
  REQUIRE(r);
  const double s3 = std::sqrt(3.0);
  CHECK(max_diff(r->p, {(3 - s3) / 6, (3 - s3) / 6, s3 / 6, s3 / 6}) < 1e-15);
  CHECK(r->p[0] == doctest::Approx(0.21132).epsilon(1e-4));
  CHECK(r->p[2] == doctest::Approx(0.28868).epsilon(1e-4));
  const Cor2 lit = pairs_literal(2, 1);
  CHECK(std::abs(r->L_max - lit.L) <= 1e-12 * lit.L);
  CHECK(max_diff(r->p, lit.p) < 1e-14);

  r = solve_corollary2(VarianceVector({1 + 1e-9, 1 + 1e-9, 1, 1}));
  REQUIRE(r);
  CHECK(max_diff(r->p, {0.25, 0.25, 0.25, 0.25}) < 1e-6);

  // matched pairs in another arrangement
  r = solve_corollary2(VarianceVector({1, 4, 4, 1}));
  REQUIRE(r);
  const Cor2 lit4 = pairs_literal(4, 1);
  CHECK(max_diff(r->p, {lit4.p[2], lit4.p[0], lit4.p[1], lit4.p[3]}) < 1e-14);

  CHECK_FALSE(solve_corollary2(VarianceVector({1, 1, 1, 1})));
  CHECK_FALSE(solve_corollary2(VarianceVector({1, 2, 3, 4})));
}

TEST_CASE("closed forms agree with the grid oracle") {
  for (const VarianceVector& v : {VarianceVector({2, 3, 3, 3}), VarianceVector({2, 2, 1, 1}),
                                  VarianceVector({1, 6, 1, 6})}) {
    const SolveResult r = solve(v);
    const DesignMeasure g = grid_oracle(v, 200);
    CHECK(max_diff(r.p, g.values()) <= 1.0 / 200);
  }
}

TEST_CASE("solve_general examples") {
  SolverConfig cfg;
  auto r = solve_general(VarianceVector({1, 2, 3, 4}), cfg);
  CHECK(max_diff(r.p, {0.3112, 0.2849, 0.2508, 0.1531}) <= 5e-4);
  CHECK(std::abs(r.L_max - 0.1645) <= 5e-4);
  CHECK(r.kkt_residual <= 1e-8);
  CHECK(r.branch == Branch::general);

  r = solve_general(VarianceVector({1, 1, 1, 1}), cfg);
  CHECK(max_diff(r.p, {0.25, 0.25, 0.25, 0.25}) < 1e-12);

  const std::array<double, 4> v{58.94, 53.81, 4.0025, 4.0025};
  const auto ref = oracle::symmetric_pair_optimum(v);
  r = solve_general(VarianceVector(v), cfg);
  CHECK(max_diff(r.p, ref) < 1e-6);
  CHECK(max_diff(r.p, {0.064, 0.276, 0.330, 0.330}) <= 3e-3);
}

TEST_CASE("solve_general errors") {
  CHECK_THROWS_AS(solve_general(VarianceVector({10, 1, 2, 3})), ValidationError);
  SolverConfig tight;
  tight.max_iter = 1;
  CHECK_THROWS_AS(solve_general(VarianceVector({1, 2, 3, 4}), tight), NumericalError);
}

TEST_CASE("near-saturated inputs converge to an interior optimum") {
  for (double eps : {1e-3, 1e-6, 1e-8}) {
    const VarianceVector v({6.0 * (1 - eps), 1, 2, 3});
    REQUIRE_FALSE(is_saturated(v).saturated);
    const SolveResult r = solve(v);
    CHECK(r.branch == Branch::general);
    CHECK(r.p[0] > 0.0);
    CHECK(r.kkt_residual <= 1e-8);
    CHECK(objective_L(v, r.p) >= objective_L(v, DesignMeasure::normalized({0, 1, 1, 1})));
  }
}

TEST_CASE("dispatcher routes by pattern") {
  CHECK(solve(VarianceVector({10, 1, 2, 3})).branch == Branch::saturated);
  CHECK(solve(VarianceVector({2, 3, 3, 3})).branch == Branch::corollary1);
  CHECK(solve(VarianceVector({2, 2, 1, 1})).branch == Branch::corollary2);
  CHECK(solve(VarianceVector({1, 2, 3, 4})).branch == Branch::general);
  CHECK(solve(VarianceVector({9, 3, 3, 3})).branch == Branch::saturated);
}

TEST_CASE("grid_oracle") {
  CHECK(max_diff(grid_oracle(VarianceVector({1, 1, 1, 1}), 4), {0.25, 0.25, 0.25, 0.25}) == 0.0);
  CHECK(max_diff(grid_oracle(VarianceVector({1, 2, 3, 4}), 200), {0.3112, 0.2849, 0.2508, 0.1531}) <=
        1.0 / 200 + 5e-4);
  CHECK(max_diff(grid_oracle(VarianceVector({6, 1, 2, 3}), 300), {0, 1.0 / 3, 1.0 / 3, 1.0 / 3}) <= 1.0 / 300);
}

TEST_CASE("allocate") {
  CHECK(allocate(DesignMeasure(), 100) == std::array<int, 4>{25, 25, 25, 25});
  CHECK(allocate(DesignMeasure::normalized({1, 1, 1, 0}), 10) == std::array<int, 4>{4, 3, 3, 0});
  CHECK(allocate(DesignMeasure::normalized({0.0573, 0.2825, 0.3301, 0.3301}), 100) ==
        std::array<int, 4>{6, 28, 33, 33});
  CHECK_THROWS_AS(allocate(DesignMeasure(), 0), ValidationError);

  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> n(1, 1000);
  for (int k = 0; k < 500; ++k) {
    const DesignMeasure p = DesignMeasure::normalized(oracle::random_simplex(rng));
    const int units = n(rng);
    const auto a = allocate(p, units);
    int total = 0;
    for (int i = 0; i < 4; ++i) {
      total += a[i];
      CHECK(a[i] >= 0);
      CHECK(std::abs(a[i] - units * p[i]) < 1.0);
    }
    CHECK(total == units);
  }
}

TEST_CASE("property: larger variance never gets more weight") {
  std::mt19937_64 rng(101);
  for (int k = 0; k < 1000; ++k) {
    VarianceVector v = random_v(rng);
    if (k % 5 == 0) v = VarianceVector({v[0], v[0], v[2], v[3]});  // exercise ties
    const SolveResult r = solve(v);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        if (v[i] > v[j]) CHECK(r.p[i] <= r.p[j] + 1e-8);
        if (std::abs(v[i] - v[j]) <= 1e-12) CHECK(std::abs(r.p[i] - r.p[j]) <= 1e-8);
      }
    }
  }
}

TEST_CASE("property: zero component iff saturated") {
  std::mt19937_64 rng(103);
  for (int k = 0; k < 1000; ++k) {
    const VarianceVector v = random_v(rng, 1.0, 40.0);
    const SolveResult r = solve(v);
    const auto s = is_saturated(v);
    const bool has_zero = std::any_of(r.p.begin(), r.p.end(), [](double x) { return x == 0.0; });
    CHECK(has_zero == s.saturated);
    if (s.saturated) CHECK(r.p[s.index] == 0.0);
  }
}

TEST_CASE("property: unique optimum from random starts") {
  std::mt19937_64 rng(107);
  for (int k = 0; k < 100; ++k) {
    const VarianceVector v = random_unsaturated(rng);
    const SolveResult ref = solve_general(v);
    for (int s = 0; s < 10; ++s) {
      const DesignMeasure start = DesignMeasure::normalized(oracle::random_simplex(rng));
      const SolveResult r = solve_general(v, start);
      CHECK(max_diff(r.p, ref.p.values()) <= 1e-8);
    }
  }
}

TEST_CASE("property: solver dominates the grid oracle") {
  std::mt19937_64 rng(109);
  for (int k = 0; k < 200; ++k) {
    const VarianceVector v = random_v(rng);
    const SolveResult r = solve(v);
    CHECK(objective_L(v, r.p) >= objective_L(v, grid_oracle(v, 200)) - 1e-9);
  }
}

TEST_CASE("property: closed forms match the forced general solver") {
  std::mt19937_64 rng(113);
  std::uniform_real_distribution<double> u(0.2, 20.0);
  for (int k = 0; k < 200; ++k) {
    const double a = u(rng), b = u(rng);
    const double lo = std::min(a, b), hi = std::max(a, b);
    if (hi < lo * (1 + 1e-6)) continue;
    const VarianceVector pairs({hi, hi, lo, lo});
    const auto c2 = solve_corollary2(pairs);
    REQUIRE(c2);
    CHECK(max_diff(solve_general(pairs).p, c2->p.values()) <= 1e-8);

    const double odd = std::min(a, 2.99 * b);
    const VarianceVector triple({odd, b, b, b});
    if (std::abs(odd - b) < 1e-9 * b) continue;
    const auto c1 = solve_corollary1(triple);
    REQUIRE(c1);
    CHECK(max_diff(solve_general(triple).p, c1->p.values()) <= 1e-8);
  }
}

TEST_CASE("property: permutation equivariance") {
  std::mt19937_64 rng(127);
  for (int k = 0; k < 60; ++k) {
    const VarianceVector v = random_v(rng);
    const SolveResult base = solve(v);
    std::array<int, 4> perm{0, 1, 2, 3};
    do {
      std::array<double, 4> pv{};
      for (int i = 0; i < 4; ++i) pv[i] = v[perm[i]];
      const SolveResult r = solve(VarianceVector(pv));
      for (int i = 0; i < 4; ++i) CHECK(std::abs(r.p[i] - base.p[perm[i]]) <= 1e-10);
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
}
