#include <doctest.h>

#include <cmath>
#include <limits>

#include "csbm/assignment.hpp"
#include "csbm/rng.hpp"
#include "oracles.hpp"

using namespace csbm;

namespace {

CostMatrix random_matrix(int n, Rng& rng, double scale = 10.0) {
  CostMatrix c(n, std::vector<double>(n));
  for (auto& row : c)
    for (auto& x : row) x = (rng.next_double() - 0.5) * scale;
  return c;
}

}  // namespace

TEST_CASE("trivial assignments") {
  CHECK(solve_lap_min({{3.5}}) == Permutation::identity(1));
  CHECK(solve_lap_max({{3.5}}) == Permutation::identity(1));

  // Strictly dominant zero diagonal.
  CostMatrix c = {{0, 5, 5}, {5, 0, 5}, {5, 5, 0}};
  CHECK(solve_lap_min(c) == Permutation::identity(3));
  CostMatrix big = {{9, 1, 1}, {1, 9, 1}, {1, 1, 9}};
  CHECK(solve_lap_max(big) == Permutation::identity(3));
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(solve_lap_min({}), std::invalid_argument);
  CHECK_THROWS_AS(solve_lap_min({{1.0, 2.0}}), std::invalid_argument);
  CHECK_THROWS_AS(solve_lap_min({{1.0, 2.0}, {3.0}}), std::invalid_argument);
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(solve_lap_min({{1.0, inf}, {0.0, 2.0}}), std::invalid_argument);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(solve_lap_max({{nan}}), std::invalid_argument);
}

TEST_CASE("optimal cost agrees with exhaustive enumeration up to n = 8") {
  Rng rng(2718);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng.next_below(8));
    const CostMatrix c = random_matrix(n, rng);
    const double best = oracles::brute_force_lap_min(c);

    const Permutation sigma = solve_lap_min(c);
    CHECK(assignment_cost(c, sigma) == doctest::Approx(best).epsilon(1e-9));

    // Maximization by negation duality.
    CostMatrix neg(c);
    for (auto& row : neg)
      for (auto& x : row) x = -x;
    const Permutation tau = solve_lap_max(neg);
    CHECK(assignment_cost(neg, tau) == doctest::Approx(-best).epsilon(1e-9));
  }
}

TEST_CASE("row and column shifts move the optimal cost by the shift") {
  Rng rng(99);
  const int n = 12;
  const CostMatrix c = random_matrix(n, rng);
  const double base = assignment_cost(c, solve_lap_min(c));

  CostMatrix shifted(c);
  for (int j = 0; j < n; ++j) shifted[4][j] += 7.5;  // one row
  for (int i = 0; i < n; ++i) shifted[i][2] -= 3.25;  // one column
  const double moved = assignment_cost(shifted, solve_lap_min(shifted));
  CHECK(moved == doctest::Approx(base + 7.5 - 3.25).epsilon(1e-9));
}

TEST_CASE("larger instances: output is a bijection beating simple assignments") {
  Rng rng(31337);
  const int n = 60;
  const CostMatrix c = random_matrix(n, rng);
  const Permutation sigma = solve_lap_min(c);
  CHECK(sigma.inverted().composed_with(sigma) == Permutation::identity(n));

  const double best = assignment_cost(c, sigma);
  CHECK(best <= assignment_cost(c, Permutation::identity(n)) + 1e-12);
  for (int trial = 0; trial < 200; ++trial) {
    const Permutation random_sigma(oracles::random_permutation_vector(n, rng));
    CHECK(best <= assignment_cost(c, random_sigma) + 1e-9);
  }
}

TEST_CASE("min and max solvers are consistent on the same matrix") {
  Rng rng(17);
  const CostMatrix c = random_matrix(20, rng);
  const double lo = assignment_cost(c, solve_lap_min(c));
  const double hi = assignment_cost(c, solve_lap_max(c));
  CHECK(lo <= hi);
  CostMatrix neg(c);
  for (auto& row : neg)
    for (auto& x : row) x = -x;
  CHECK(assignment_cost(neg, solve_lap_min(neg)) == doctest::Approx(-hi).epsilon(1e-9));
}
