#include "csbm/sbm.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace csbm {

SbmParams SbmParams::balanced(int n, int k, double p, double q, double alpha) {
  SbmParams params;
  params.n = n;
  params.p = p;
  params.q = q;
  params.alpha = alpha;
  params.sizes.assign(k, n / k);
  for (int i = 0; i < n % k; ++i) ++params.sizes[i];
  return params;
}

void SbmParams::validate() const {
  if (n <= 0) throw std::invalid_argument("sbm: vertex count must be positive");
  if (std::accumulate(sizes.begin(), sizes.end(), 0) != n)
    throw std::invalid_argument("sbm: community sizes must sum to n");
  if (!(p > q) || q < 0.0) throw std::invalid_argument("sbm: requires p > q >= 0");
  if (alpha < 0.0 || alpha >= 1.0) throw std::invalid_argument("sbm: alpha must be in [0, 1)");
  if (p / (1.0 - alpha) > 1.0 || q / (1.0 - alpha) > 1.0)
    throw std::invalid_argument("sbm: parent density p/(1-alpha) or q/(1-alpha) exceeds 1");
}

namespace {

// Appends the hit positions of m independent Bernoulli(prob) trials using
// geometric skips, passing each hit index to emit.
template <typename Emit>
void bernoulli_run(std::int64_t m, double prob, Rng& rng, Emit emit) {
  if (prob <= 0.0 || m <= 0) return;
  if (prob >= 1.0) {
    for (std::int64_t i = 0; i < m; ++i) emit(i);
    return;
  }
  const double log1mp = std::log1p(-prob);
  std::int64_t pos = -1;
  for (;;) {
    const double u = rng.next_double();
    pos += 1 + static_cast<std::int64_t>(std::floor(std::log1p(-u) / log1mp));
    if (pos >= m) return;
    emit(pos);
  }
}

}  // namespace

Graph sample_parent(const SbmParams& params, std::uint64_t seed) {
  params.validate();
  const int k = static_cast<int>(params.sizes.size());
  std::vector<int> start(k + 1, 0);
  for (int a = 0; a < k; ++a) start[a + 1] = start[a] + params.sizes[a];

  const double p0 = params.p / (1.0 - params.alpha);
  const double q0 = params.q / (1.0 - params.alpha);

  Rng rng = Rng(seed).derive(kStreamParent);
  std::vector<std::pair<int, int>> edges;
  // Each (a, b) block with a <= b has a constant edge probability; sample hit
  // positions within the linearized block.
  for (int a = 0; a < k; ++a) {
    const std::int64_t na = params.sizes[a];
    // Intra block: upper triangle of na x na.
    bernoulli_run(na * (na - 1) / 2, p0, rng, [&](std::int64_t pos) {
      // Row-major upper triangle: row i has (na - 1 - i) entries.
      std::int64_t i = 0, remaining = pos;
      while (remaining >= na - 1 - i) {
        remaining -= na - 1 - i;
        ++i;
      }
      const std::int64_t j = i + 1 + remaining;
      edges.emplace_back(start[a] + static_cast<int>(i), start[a] + static_cast<int>(j));
    });
    for (int b = a + 1; b < k; ++b) {
      const std::int64_t nb = params.sizes[b];
      bernoulli_run(na * nb, q0, rng, [&](std::int64_t pos) {
        edges.emplace_back(start[a] + static_cast<int>(pos / nb),
                           start[b] + static_cast<int>(pos % nb));
      });
    }
  }
  return Graph::from_edges(params.n, edges);
}

Graph subsample_child(const Graph& parent, double alpha, std::uint64_t seed) {
  if (alpha < 0.0 || alpha >= 1.0)
    throw std::invalid_argument("subsample: alpha must be in [0, 1)");
  Rng rng(seed);
  std::vector<std::pair<int, int>> kept;
  for (auto [u, v] : parent.edges())
    if (rng.next_double() >= alpha) kept.emplace_back(u, v);
  return Graph::from_edges(parent.num_vertices(), kept);
}

CorrelatedPair generate_correlated_pair(const SbmParams& params, std::uint64_t seed,
                                        bool permute_across, bool keep_parent) {
  params.validate();
  const Rng master(seed);

  Graph parent = sample_parent(params, seed);
  Graph g = subsample_child(parent, params.alpha, master.derive(kStreamChildA).seed());
  Graph g_prime = subsample_child(parent, params.alpha, master.derive(kStreamChildB).seed());

  // Community layout matches sample_parent: contiguous blocks.
  std::vector<int> labels(params.n);
  {
    int v = 0;
    for (std::size_t a = 0; a < params.sizes.size(); ++a)
      for (int i = 0; i < params.sizes[a]; ++i) labels[v++] = static_cast<int>(a);
  }

  Rng perm_rng = master.derive(kStreamPermutation);
  std::vector<int> forward(params.n);
  std::iota(forward.begin(), forward.end(), 0);
  auto shuffle_range = [&perm_rng, &forward](int lo, int hi) {
    for (int i = hi - 1; i > lo; --i) {
      const int j = lo + static_cast<int>(perm_rng.next_below(static_cast<std::uint64_t>(i - lo + 1)));
      std::swap(forward[i], forward[j]);
    }
  };
  if (permute_across) {
    shuffle_range(0, params.n);
  } else {
    int v = 0;
    for (int sz : params.sizes) {
      shuffle_range(v, v + sz);
      v += sz;
    }
  }

  CorrelatedPair pair;
  pair.truth = Permutation(std::move(forward));
  pair.g_pi = apply_permutation(g, pair.truth);
  pair.g_prime = std::move(g_prime);
  pair.params = params;
  pair.part = CommunityPartition::from_labels(labels);
  if (permute_across) {
    std::vector<int> labels_pi(params.n);
    for (int u = 0; u < params.n; ++u) labels_pi[pair.truth(u)] = labels[u];
    pair.part_pi = CommunityPartition::from_labels(labels_pi);
  } else {
    pair.part_pi = pair.part;
  }
  if (keep_parent) pair.parent = std::move(parent);
  return pair;
}

}  // namespace csbm
