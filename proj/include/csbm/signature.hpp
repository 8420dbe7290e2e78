#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "csbm/graph.hpp"

namespace csbm {

// Hyperparameters of the partition-tree signature. Thresholds and centering
// values are explicit fields: callers choose between true model parameters
// and data-driven estimates, never silently.
struct SignatureHyper {
  int kprime = 0;  // community fan-out per depth
  int ell = 0;     // tree depth
  std::vector<int> selected;            // communities used for the sign tests
  std::vector<double> sign_threshold;   // per selected community: n_a * q_hat_a
  bool log_degree = false;              // use ln(1 + deg) instead of deg
  double p_hat = 0.0;                   // intra density behind center/variance
  double q_hat = 0.0;                   // inter density behind the sign thresholds
  double center = 0.0;                  // subtracted per leaf vertex (n_k * p_hat, or log-mode mean)
  double variance = 0.0;                // per-vertex variance scale (n_k * p_hat * (1 - p_hat))

  std::uint64_t leaf_count() const { return std::uint64_t{1} << (kprime * ell); }

  // Throws std::invalid_argument if inconsistent with the partition.
  void validate(const CommunityPartition& part) const;
};

// Depth-l partition tree rooted at a vertex of the smallest community.
// levels[d] lists (vertex, node code) for depth d in 0..ell; codes at depth d
// live in [0, 2^{kprime*d}).
struct PartitionTree {
  int root = -1;
  int kprime = 0;
  int ell = 0;
  std::vector<std::vector<std::pair<int, std::uint64_t>>> levels;
};

// Per-root signature vector f, variance vector v and leaf occupancy, all of
// length 2^{kprime*ell}.
struct SignatureSet {
  std::vector<double> f;
  std::vector<double> v;
  std::vector<std::int64_t> leaf_sizes;
};

// Signature vectors for every vertex of the smallest community, indexed by
// local id.
struct CommunitySignatures {
  std::uint64_t dim = 0;
  std::vector<std::vector<double>> f;
  std::vector<std::vector<double>> v;
};

// Packs k'*l signs (+1/-1, ordered depth-major: depth 1 slots first) into an
// integer leaf index; bit (r-1)*k' + (a-1) is set iff sign_r(a) = +1.
std::uint64_t encode_leaf_index(std::span<const int> signs, int kprime, int ell);
std::vector<int> decode_leaf_index(std::uint64_t code, int kprime, int ell);

// Unclamped hyperparameter formulas (natural logs), then clamped so that
// kprime <= k_available - 2 and 2^{kprime*ell} <= n_k^2. selected,
// thresholds and centering are left for the caller to fill.
SignatureHyper default_hyperparams(int n_k, double p_hat, int k_available);

// Fills selected communities (the kprime largest, excluding the target and
// the reserved community), sign thresholds n_a * q_hat, and the standard-mode
// center/variance from (p_hat, q_hat).
void configure_hyper(SignatureHyper& hyper, const CommunityPartition& part, double q_hat,
                     int reserved);

// Sign code of every vertex: bit a is set iff deg^{selected[a]}(v) >= threshold.
std::vector<std::uint32_t> compute_sign_codes(const Graph& g, const CommunityPartition& part,
                                              const SignatureHyper& hyper);

// Single BFS from i inside the smallest community; each sphere-(r+1) vertex
// attaches to the node of its smallest-id predecessor at depth r.
PartitionTree build_partition_tree(const Graph& g, const CommunityPartition& part,
                                   const SignatureHyper& hyper, int i);
PartitionTree build_partition_tree(const Graph& g, const CommunityPartition& part,
                                   const SignatureHyper& hyper, int i,
                                   const std::vector<std::uint32_t>& sign_codes);

SignatureSet compute_signature(const PartitionTree& tree, const Graph& g,
                               const CommunityPartition& part, const SignatureHyper& hyper);

// Signatures for all roots of the smallest community, data-parallel over a
// shared immutable graph.
CommunitySignatures compute_signatures(const Graph& g, const CommunityPartition& part,
                                       const SignatureHyper& hyper, int num_workers = 1);

}  // namespace csbm
