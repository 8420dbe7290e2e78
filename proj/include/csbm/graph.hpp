#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace csbm {

// Immutable undirected simple graph. Adjacency is stored as compressed sorted
// neighbor lists; membership tests are binary searches. Safe for concurrent
// reads after construction.
class Graph {
 public:
  Graph() = default;

  // Builds from an edge list. Self-loops are dropped and duplicate edges
  // collapsed. Throws std::invalid_argument on out-of-range endpoints.
  static Graph from_edges(int n, const std::vector<std::pair<int, int>>& edges);

  int num_vertices() const { return n_; }
  std::int64_t num_edges() const { return static_cast<std::int64_t>(adj_.size()) / 2; }

  std::span<const int> neighbors(int v) const {
    return {adj_.data() + offsets_[v], adj_.data() + offsets_[v + 1]};
  }

  int degree(int v) const { return static_cast<int>(offsets_[v + 1] - offsets_[v]); }

  bool has_edge(int u, int v) const;

  // All edges as (u, v) with u < v, sorted.
  std::vector<std::pair<int, int>> edges() const;

 private:
  int n_ = 0;
  std::vector<std::int64_t> offsets_ = {0};
  std::vector<int> adj_;
};

// Vertex -> community assignment. Communities are re-indexed at construction
// so that sizes are non-increasing and the smallest community carries the
// last index (num_communities() - 1). Original labels are kept in a side map.
class CommunityPartition {
 public:
  CommunityPartition() = default;

  static CommunityPartition from_labels(const std::vector<int>& labels);

  int num_vertices() const { return static_cast<int>(labels_.size()); }
  int num_communities() const { return static_cast<int>(members_.size()); }
  int label(int v) const { return labels_[v]; }
  int size(int a) const { return static_cast<int>(members_[a].size()); }
  const std::vector<int>& members(int a) const { return members_[a]; }
  // Position of v inside the sorted member list of its own community.
  int local_index(int v) const { return local_[v]; }
  int original_label(int a) const { return original_[a]; }
  int smallest() const { return num_communities() - 1; }

 private:
  std::vector<int> labels_;
  std::vector<int> local_;
  std::vector<std::vector<int>> members_;
  std::vector<int> original_;
};

// Bijection on [n] with O(1) forward and inverse lookup.
class Permutation {
 public:
  Permutation() = default;

  // Validates that forward is a bijection; throws std::invalid_argument.
  explicit Permutation(std::vector<int> forward);

  static Permutation identity(int n);

  int size() const { return static_cast<int>(forward_.size()); }
  int operator()(int i) const { return forward_[i]; }
  int inverse(int i) const { return inverse_[i]; }
  const std::vector<int>& forward() const { return forward_; }
  const std::vector<int>& inverse_vector() const { return inverse_; }

  Permutation inverted() const;
  // (this ∘ other)(i) = this(other(i)).
  Permutation composed_with(const Permutation& other) const;

  bool operator==(const Permutation& other) const { return forward_ == other.forward_; }

 private:
  std::vector<int> forward_;
  std::vector<int> inverse_;
};

// |N_g(v) ∩ C_a|. Throws on out-of-range v or a.
int degree_in_community(const Graph& g, int v, const CommunityPartition& part, int a);

// Vertices of `restrict_set` at BFS distance exactly r from i inside the
// subgraph induced by `restrict_set`. restrict_set must be sorted; i must be
// a member. Returned sorted.
std::vector<int> sphere(const Graph& g, const std::vector<int>& restrict_set, int i, int r);

// Relabeled graph: edge (u, v) in the output iff (p.inverse(u), p.inverse(v))
// is an edge of g.
Graph apply_permutation(const Graph& g, const Permutation& p);

// Subgraph induced by the sorted vertex list `members`, relabeled to local
// indices 0..|members|-1.
Graph induced_subgraph(const Graph& g, const std::vector<int>& members);

}  // namespace csbm
