#include "csbm/graph.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <string>

namespace csbm {

Graph Graph::from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
  if (n < 0) throw std::invalid_argument("graph: negative vertex count");
  std::vector<std::pair<int, int>> clean;
  clean.reserve(edges.size());
  for (auto [u, v] : edges) {
    if (u < 0 || u >= n || v < 0 || v >= n)
      throw std::invalid_argument("graph: edge endpoint out of range");
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    clean.emplace_back(u, v);
  }
  std::sort(clean.begin(), clean.end());
  clean.erase(std::unique(clean.begin(), clean.end()), clean.end());

  Graph g;
  g.n_ = n;
  std::vector<int> deg(n, 0);
  for (auto [u, v] : clean) {
    ++deg[u];
    ++deg[v];
  }
  g.offsets_.assign(n + 1, 0);
  for (int v = 0; v < n; ++v) g.offsets_[v + 1] = g.offsets_[v] + deg[v];
  g.adj_.resize(static_cast<std::size_t>(g.offsets_[n]));
  std::vector<std::int64_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  for (auto [u, v] : clean) {
    g.adj_[static_cast<std::size_t>(cursor[u]++)] = v;
    g.adj_[static_cast<std::size_t>(cursor[v]++)] = u;
  }
  for (int v = 0; v < n; ++v)
    std::sort(g.adj_.begin() + g.offsets_[v], g.adj_.begin() + g.offsets_[v + 1]);
  return g;
}

bool Graph::has_edge(int u, int v) const {
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

std::vector<std::pair<int, int>> Graph::edges() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(static_cast<std::size_t>(num_edges()));
  for (int u = 0; u < n_; ++u)
    for (int v : neighbors(u))
      if (u < v) out.emplace_back(u, v);
  return out;
}

CommunityPartition CommunityPartition::from_labels(const std::vector<int>& labels) {
  const int n = static_cast<int>(labels.size());
  // Collect distinct original labels with their sizes.
  std::vector<std::pair<int, int>> label_count;  // (original label, count)
  {
    std::vector<int> sorted(labels);
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size();) {
      std::size_t j = i;
      while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
      label_count.emplace_back(sorted[i], static_cast<int>(j - i));
      i = j;
    }
  }
  // Sizes non-increasing, smallest community last; ties broken by original label.
  std::stable_sort(label_count.begin(), label_count.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  CommunityPartition part;
  part.original_.reserve(label_count.size());
  std::vector<std::pair<int, int>> remap;  // (original, new index), sorted by original
  for (std::size_t a = 0; a < label_count.size(); ++a) {
    part.original_.push_back(label_count[a].first);
    remap.emplace_back(label_count[a].first, static_cast<int>(a));
  }
  std::sort(remap.begin(), remap.end());
  auto to_internal = [&remap](int orig) {
    auto it = std::lower_bound(remap.begin(), remap.end(), std::make_pair(orig, 0));
    return it->second;
  };

  part.labels_.resize(n);
  part.members_.resize(label_count.size());
  for (int v = 0; v < n; ++v) {
    const int a = to_internal(labels[v]);
    part.labels_[v] = a;
    part.members_[a].push_back(v);
  }
  part.local_.resize(n);
  for (auto& mem : part.members_)
    for (std::size_t i = 0; i < mem.size(); ++i) part.local_[mem[i]] = static_cast<int>(i);
  return part;
}

Permutation::Permutation(std::vector<int> forward) : forward_(std::move(forward)) {
  const int n = static_cast<int>(forward_.size());
  inverse_.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    const int j = forward_[i];
    if (j < 0 || j >= n || inverse_[j] != -1)
      throw std::invalid_argument("permutation: not a bijection");
    inverse_[j] = i;
  }
}

Permutation Permutation::identity(int n) {
  std::vector<int> fwd(n);
  std::iota(fwd.begin(), fwd.end(), 0);
  return Permutation(std::move(fwd));
}

Permutation Permutation::inverted() const { return Permutation(inverse_); }

Permutation Permutation::composed_with(const Permutation& other) const {
  if (size() != other.size()) throw std::invalid_argument("permutation: size mismatch");
  std::vector<int> fwd(forward_.size());
  for (int i = 0; i < size(); ++i) fwd[i] = forward_[other.forward_[i]];
  return Permutation(std::move(fwd));
}

int degree_in_community(const Graph& g, int v, const CommunityPartition& part, int a) {
  if (v < 0 || v >= g.num_vertices())
    throw std::invalid_argument("degree_in_community: vertex out of range");
  if (a < 0 || a >= part.num_communities())
    throw std::invalid_argument("degree_in_community: community out of range");
  int count = 0;
  for (int u : g.neighbors(v))
    if (part.label(u) == a) ++count;
  return count;
}

std::vector<int> sphere(const Graph& g, const std::vector<int>& restrict_set, int i, int r) {
  if (r < 0) throw std::invalid_argument("sphere: negative radius");
  if (!std::binary_search(restrict_set.begin(), restrict_set.end(), i))
    throw std::invalid_argument("sphere: center not in restrict set");
  // BFS inside the induced subgraph, stopping at distance r.
  std::vector<int> dist(g.num_vertices(), -1);
  std::vector<int> frontier = {i};
  dist[i] = 0;
  for (int d = 0; d < r && !frontier.empty(); ++d) {
    std::vector<int> next;
    for (int v : frontier)
      for (int u : g.neighbors(v)) {
        if (dist[u] != -1) continue;
        if (!std::binary_search(restrict_set.begin(), restrict_set.end(), u)) continue;
        dist[u] = d + 1;
        next.push_back(u);
      }
    frontier = std::move(next);
  }
  std::sort(frontier.begin(), frontier.end());
  return frontier;
}

Graph apply_permutation(const Graph& g, const Permutation& p) {
  if (p.size() != g.num_vertices())
    throw std::invalid_argument("apply_permutation: size mismatch");
  std::vector<std::pair<int, int>> relabeled;
  relabeled.reserve(static_cast<std::size_t>(g.num_edges()));
  for (auto [u, v] : g.edges()) relabeled.emplace_back(p(u), p(v));
  return Graph::from_edges(g.num_vertices(), relabeled);
}

Graph induced_subgraph(const Graph& g, const std::vector<int>& members) {
  std::vector<int> local(g.num_vertices(), -1);
  for (std::size_t i = 0; i < members.size(); ++i) local[members[i]] = static_cast<int>(i);
  std::vector<std::pair<int, int>> edges;
  for (std::size_t i = 0; i < members.size(); ++i)
    for (int u : g.neighbors(members[i]))
      if (local[u] > static_cast<int>(i)) edges.emplace_back(static_cast<int>(i), local[u]);
  return Graph::from_edges(static_cast<int>(members.size()), edges);
}

}  // namespace csbm
