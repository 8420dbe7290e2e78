#pragma once

#include <cstdint>
#include <vector>

#include "csbm/graph.hpp"
#include "csbm/rng.hpp"

namespace csbm {

// Model parameters of a correlated pair. p and q are the edge densities of
// the subsampled children; the parent is sampled with p/(1-alpha) and
// q/(1-alpha).
struct SbmParams {
  int n = 0;
  std::vector<int> sizes;  // per-community counts, any order
  double p = 0.0;          // intra-community child density
  double q = 0.0;          // inter-community child density
  double alpha = 0.0;      // subsampling noise in [0, 1)

  static SbmParams balanced(int n, int k, double p, double q, double alpha);

  // Throws std::invalid_argument when the parameters are outside the model.
  void validate() const;
};

struct CorrelatedPair {
  Graph g_pi;            // child G^pi, relabeled by the hidden permutation
  Graph g_prime;         // child G'
  Permutation truth;     // pi: G-vertex u appears as pi(u) in g_pi
  Graph parent;          // G0 (empty when keep_parent = false)
  SbmParams params;
  CommunityPartition part;     // community structure of G' (and the parent)
  CommunityPartition part_pi;  // community structure of g_pi (labels carried through pi)
};

// Samples the parent SBM: intra pairs edged with probability p/(1-alpha),
// inter pairs with q/(1-alpha). Vertices are laid out community by community
// in the order of params.sizes.
Graph sample_parent(const SbmParams& params, std::uint64_t seed);

// Keeps each parent edge independently with probability 1-alpha.
Graph subsample_child(const Graph& parent, double alpha, std::uint64_t seed);

// Samples G0, subsamples G and G' independently, draws the hidden permutation
// (within communities unless permute_across), and relabels one side.
CorrelatedPair generate_correlated_pair(const SbmParams& params, std::uint64_t seed,
                                        bool permute_across = false, bool keep_parent = true);

}  // namespace csbm
