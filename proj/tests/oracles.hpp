// Independent reference implementations used to cross-check the library.
// Everything here is deliberately naive: adjacency matrices, exhaustive
// enumeration, direct summation.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <vector>

#include "csbm/graph.hpp"
#include "csbm/rng.hpp"

namespace oracles {

// Dense adjacency built straight from the edge list.
inline std::vector<std::vector<char>> dense_adjacency(const csbm::Graph& g) {
  const int n = g.num_vertices();
  std::vector<std::vector<char>> a(n, std::vector<char>(n, 0));
  for (auto [u, v] : g.edges()) a[u][v] = a[v][u] = 1;
  return a;
}

// BFS distances inside a restricted vertex set, dense-matrix version.
inline std::vector<int> bfs_distances(const std::vector<std::vector<char>>& adj,
                                      const std::set<int>& restrict_set, int start) {
  std::vector<int> dist(adj.size(), -1);
  dist[start] = 0;
  std::vector<int> frontier = {start};
  while (!frontier.empty()) {
    std::vector<int> next;
    for (int v : frontier)
      for (int u = 0; u < static_cast<int>(adj.size()); ++u)
        if (adj[v][u] && dist[u] == -1 && restrict_set.count(u)) {
          dist[u] = dist[v] + 1;
          next.push_back(u);
        }
    frontier = std::move(next);
  }
  return dist;
}

inline int count_neighbors_with_label(const csbm::Graph& g, int v,
                                      const csbm::CommunityPartition& part, int a) {
  int c = 0;
  for (int u = 0; u < g.num_vertices(); ++u)
    if (g.has_edge(v, u) && part.label(u) == a) ++c;
  return c;
}

// Term-by-term normalized distance, no shortcuts.
inline double naive_distance(const std::vector<double>& f, const std::vector<double>& v,
                             const std::vector<double>& f2, const std::vector<double>& v2,
                             const std::vector<std::uint64_t>& J) {
  double total = 0.0;
  for (auto s : J) {
    const double denom = v[s] + v2[s];
    if (denom > 0.0) total += (f[s] - f2[s]) * (f[s] - f2[s]) / denom;
  }
  return total;
}

// Exhaustive linear assignment over all n! permutations.
inline double brute_force_lap_min(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = 1e300;
  do {
    double total = 0.0;
    for (int j = 0; j < n; ++j) total += cost[perm[j]][j];
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Seeded-matching 2-hop weight, computed straight from the definition:
// w(i,i') = #{ j : exists z ~ i in C_t with (z, seed1_of_j) an edge of g, and
//              exists z' ~ i' in C_t with (z', seed2_of_j) an edge of g2 }.
inline int seeded_weight(const csbm::Graph& g, const csbm::Graph& g2,
                         const csbm::CommunityPartition& part,
                         const csbm::CommunityPartition& part2, int i, int ip, int t,
                         const std::vector<int>& seed1, const std::vector<int>& seed2) {
  int w = 0;
  for (std::size_t j = 0; j < seed1.size(); ++j) {
    bool reach1 = false, reach2 = false;
    for (int z = 0; z < g.num_vertices() && !reach1; ++z)
      if (part.label(z) == t && g.has_edge(i, z) && g.has_edge(z, seed1[j])) reach1 = true;
    for (int z = 0; z < g2.num_vertices() && !reach2; ++z)
      if (part2.label(z) == t && g2.has_edge(ip, z) && g2.has_edge(z, seed2[j])) reach2 = true;
    if (reach1 && reach2) ++w;
  }
  return w;
}

// Same weight with the z / z' scans swapped to the outside (transposed loop
// order) — must agree exactly with seeded_weight.
inline int seeded_weight_transposed(const csbm::Graph& g, const csbm::Graph& g2,
                                    const csbm::CommunityPartition& part,
                                    const csbm::CommunityPartition& part2, int i, int ip, int t,
                                    const std::vector<int>& seed1, const std::vector<int>& seed2) {
  std::set<std::size_t> reached1, reached2;
  for (int z = 0; z < g.num_vertices(); ++z) {
    if (part.label(z) != t || !g.has_edge(i, z)) continue;
    for (std::size_t j = 0; j < seed1.size(); ++j)
      if (g.has_edge(z, seed1[j])) reached1.insert(j);
  }
  for (int z = 0; z < g2.num_vertices(); ++z) {
    if (part2.label(z) != t || !g2.has_edge(ip, z)) continue;
    for (std::size_t j = 0; j < seed2.size(); ++j)
      if (g2.has_edge(z, seed2[j])) reached2.insert(j);
  }
  int w = 0;
  for (auto j : reached1)
    if (reached2.count(j)) ++w;
  return w;
}

// Uniform Erdos-Renyi-ish test graph.
inline csbm::Graph random_graph(int n, double density, std::uint64_t seed) {
  csbm::Rng rng(seed);
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (rng.next_double() < density) edges.emplace_back(u, v);
  return csbm::Graph::from_edges(n, edges);
}

inline std::vector<int> random_permutation_vector(int n, csbm::Rng& rng) {
  std::vector<int> fwd(n);
  std::iota(fwd.begin(), fwd.end(), 0);
  for (int i = n - 1; i > 0; --i)
    std::swap(fwd[i], fwd[static_cast<int>(rng.next_below(static_cast<std::uint64_t>(i) + 1))]);
  return fwd;
}

}  // namespace oracles
