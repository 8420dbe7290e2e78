#pragma once

#include <vector>

#include "csbm/graph.hpp"

namespace csbm {

// Square cost matrix, row-major: cost[i][j].
using CostMatrix = std::vector<std::vector<double>>;

// Exact O(n^3) linear assignment. Returns sigma minimizing (maximizing)
// sum_j cost[sigma(j)][j]. Throws std::invalid_argument on non-square or
// non-finite input. Only optimality of the objective is contracted, not a
// particular optimum.
Permutation solve_lap_min(const CostMatrix& cost);
Permutation solve_lap_max(const CostMatrix& cost);

double assignment_cost(const CostMatrix& cost, const Permutation& sigma);

}  // namespace csbm
