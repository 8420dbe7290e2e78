#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "csbm/assignment.hpp"
#include "csbm/graph.hpp"
#include "csbm/rng.hpp"
#include "csbm/signature.hpp"

namespace csbm {

enum class Stage1Route { thresholded, lap_similarity };
enum class RefineMode { lap, threshold };
enum class SeedMode { theory, greedy };

struct MatchHyper {
  long w = 0;                    // <= 0: floor((ln n_k)^5)
  double threshold_slack = 0.0;  // <= 0: 1/sqrt(ln n_k)
  double epsilon_refine = 0.3;
  int refine_rounds = 2;         // rounds for LAP refinement
  Stage1Route route = Stage1Route::thresholded;
  RefineMode refine_mode = RefineMode::lap;
  SeedMode seed_mode = SeedMode::greedy;
  std::uint64_t seed = 0;
  int num_workers = 0;  // 0: CSBM_WORKERS / hardware

  long effective_w(int n_k) const;
  double effective_slack(int n_k) const;
};

struct StageRecord {
  std::string stage;
  double accuracy = -1.0;  // -1 when no ground truth
  double seconds = 0.0;
};

struct MatchResult {
  Permutation overall;                     // g2 vertex -> matched g1 vertex
  std::vector<Permutation> per_community;  // local index permutations
  std::vector<StageRecord> stages;
  double overall_accuracy = -1.0;
};

// min(2w, 2^{kprime*ell}) distinct leaf indices drawn uniformly without
// replacement; the full index space when 2w covers it.
std::vector<std::uint64_t> sample_index_set(int kprime, int ell, long w, Rng& rng);

// sum over s in J of (f[s]-f2[s])^2 / (v[s]+v2[s]); zero-variance terms
// contribute 0 (both leaves empty).
double normalized_distance(std::span<const double> f, std::span<const double> v,
                           std::span<const double> f2, std::span<const double> v2,
                           std::span<const std::uint64_t> J);

// Thresholded signature comparison plus bipartite cleanup. Returns the
// permutation over the smallest community (g2-local -> g1-local).
Permutation almost_exact_match(const Graph& g, const Graph& g2, const CommunityPartition& part,
                               const CommunityPartition& part2, const SignatureHyper& sig_hyper,
                               const MatchHyper& match_hyper);

// Full-index normalized distances, suitable for LAP minimization:
// S[i][j] = distance between signature i of side A and j of side B.
CostMatrix build_similarity_matrix(const CommunitySignatures& a, const CommunitySignatures& b,
                                   int num_workers = 1);

// Iterative refinement with the common-neighbor witness threshold
// eps^2 * p_hat * n / 512 and two-sided uniqueness. Graphs are on the
// refinement domain [n]; pi0 maps g2 vertices to g1 vertices. Unmatched
// vertices carry the previous round's assignment where possible.
Permutation refine_threshold(const Graph& g, const Graph& g2, const Permutation& pi0, double eps,
                             double p_hat);

// LAP-based refinement: each round maximizes the total common-neighbor
// witness count over permutations.
Permutation refine_lap(const Graph& g, const Graph& g2, const Permutation& pi0, int rounds);

// 2-hop seeded matching from community s onto community t. seeds maps
// g2-local indices of C_s to g1-local indices.
Permutation seeded_match(const Graph& g, const Graph& g2, const CommunityPartition& part,
                         const CommunityPartition& part2, const Permutation& seeds, int s, int t,
                         double p_hat, double q_hat);

// Greedy 1-hop variant: repeatedly match the remaining pair with the most
// common seeds.
Permutation seeded_match_greedy(const Graph& g, const Graph& g2, const CommunityPartition& part,
                                const CommunityPartition& part2, const Permutation& seeds, int s,
                                int t);

// Signature matching on the smallest community, refinement, then seeded
// propagation through a reserved community to the rest.
MatchResult full_pipeline(const Graph& g, const Graph& g2, const CommunityPartition& part,
                          const CommunityPartition& part2, const SignatureHyper& sig_hyper,
                          const MatchHyper& match_hyper, const Permutation* truth = nullptr);

}  // namespace csbm
