#include "csbm/assignment.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace csbm {

namespace {

void check_matrix(const CostMatrix& cost) {
  const std::size_t n = cost.size();
  if (n == 0) throw std::invalid_argument("lap: empty matrix");
  for (const auto& row : cost) {
    if (row.size() != n) throw std::invalid_argument("lap: matrix must be square");
    for (double c : row)
      if (!std::isfinite(c)) throw std::invalid_argument("lap: entries must be finite");
  }
}

// Hungarian algorithm with potentials, shortest augmenting path per column.
std::vector<int> hungarian(const CostMatrix& cost) {
  const int n = static_cast<int>(cost.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0);  // match[j] = row assigned to column j, 1-based
  std::vector<int> way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> sigma(n);  // column -> row
  for (int j = 1; j <= n; ++j) sigma[j - 1] = match[j] - 1;
  return sigma;
}

}  // namespace

Permutation solve_lap_min(const CostMatrix& cost) {
  check_matrix(cost);
  return Permutation(hungarian(cost));
}

Permutation solve_lap_max(const CostMatrix& cost) {
  check_matrix(cost);
  CostMatrix negated(cost.size());
  for (std::size_t i = 0; i < cost.size(); ++i) {
    negated[i].resize(cost.size());
    for (std::size_t j = 0; j < cost.size(); ++j) negated[i][j] = -cost[i][j];
  }
  return Permutation(hungarian(negated));
}

double assignment_cost(const CostMatrix& cost, const Permutation& sigma) {
  double total = 0.0;
  for (int j = 0; j < sigma.size(); ++j) total += cost[sigma(j)][j];
  return total;
}

}  // namespace csbm
