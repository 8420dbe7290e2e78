#include "csbm/signature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "csbm/parallel.hpp"

namespace csbm {

void SignatureHyper::validate(const CommunityPartition& part) const {
  if (kprime < 1 || ell < 1) throw std::invalid_argument("hyper: kprime and ell must be >= 1");
  if (kprime * ell >= 62) throw std::invalid_argument("hyper: 2^{kprime*ell} not representable");
  if (static_cast<int>(selected.size()) != kprime)
    throw std::invalid_argument("hyper: selected must list kprime communities");
  if (sign_threshold.size() != selected.size())
    throw std::invalid_argument("hyper: one sign threshold per selected community");
  std::vector<int> sorted(selected);
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("hyper: selected communities must be distinct");
  for (int a : selected) {
    if (a < 0 || a >= part.num_communities())
      throw std::invalid_argument("hyper: selected community out of range");
    if (a == part.smallest())
      throw std::invalid_argument("hyper: target community cannot be used for sign tests");
  }
}

std::uint64_t encode_leaf_index(std::span<const int> signs, int kprime, int ell) {
  if (static_cast<int>(signs.size()) != kprime * ell)
    throw std::invalid_argument("encode_leaf_index: expected kprime*ell signs");
  std::uint64_t code = 0;
  for (std::size_t b = 0; b < signs.size(); ++b) {
    if (signs[b] != 1 && signs[b] != -1)
      throw std::invalid_argument("encode_leaf_index: signs must be +1 or -1");
    if (signs[b] == 1) code |= std::uint64_t{1} << b;
  }
  return code;
}

std::vector<int> decode_leaf_index(std::uint64_t code, int kprime, int ell) {
  std::vector<int> signs(static_cast<std::size_t>(kprime) * ell);
  for (std::size_t b = 0; b < signs.size(); ++b)
    signs[b] = (code >> b) & 1 ? 1 : -1;
  return signs;
}

SignatureHyper default_hyperparams(int n_k, double p_hat, int k_available) {
  if (n_k < 16) throw std::invalid_argument("default_hyperparams: n_k must be >= 16");
  if (n_k * p_hat <= 1.0)
    throw std::invalid_argument("default_hyperparams: n_k * p_hat must exceed 1");
  const double log_nk = std::log(static_cast<double>(n_k));
  const double log_nkp = std::log(n_k * p_hat);
  const double loglog_nk = std::log(log_nk);

  int ell = static_cast<int>(std::min(std::ceil(log_nk / (40.0 * log_nkp)),
                                      std::ceil(42.0 * loglog_nk)));
  ell = std::max(ell, 1);
  int kprime = static_cast<int>(std::ceil(1680.0 * loglog_nk * log_nkp / log_nk));
  kprime = std::max(kprime, 1);
  kprime = std::min(kprime, std::max(k_available - 2, 1));
  // Index-space sanity: 2^{kprime*ell} <= n_k^2.
  const double budget = 2.0 * log_nk / std::log(2.0);
  while (ell > 1 && kprime * ell > budget) --ell;
  while (kprime > 1 && kprime * ell > budget) --kprime;

  SignatureHyper hyper;
  hyper.kprime = kprime;
  hyper.ell = ell;
  hyper.p_hat = p_hat;
  return hyper;
}

void configure_hyper(SignatureHyper& hyper, const CommunityPartition& part, double q_hat,
                     int reserved) {
  const int target = part.smallest();
  hyper.selected.clear();
  hyper.sign_threshold.clear();
  // Communities are size-ordered, so the kprime largest usable ones are the
  // lowest indices not equal to the target or the reserved seed community.
  for (int a = 0; a < part.num_communities() && static_cast<int>(hyper.selected.size()) < hyper.kprime;
       ++a) {
    if (a == target || a == reserved) continue;
    hyper.selected.push_back(a);
    hyper.sign_threshold.push_back(part.size(a) * q_hat);
  }
  if (static_cast<int>(hyper.selected.size()) < hyper.kprime)
    throw std::invalid_argument("configure_hyper: not enough communities for kprime sign tests");
  hyper.q_hat = q_hat;
  const double n_k = part.size(target);
  hyper.center = n_k * hyper.p_hat;
  hyper.variance = n_k * hyper.p_hat * (1.0 - hyper.p_hat);
}

std::vector<std::uint32_t> compute_sign_codes(const Graph& g, const CommunityPartition& part,
                                              const SignatureHyper& hyper) {
  hyper.validate(part);
  std::vector<int> slot(part.num_communities(), -1);
  for (int a = 0; a < hyper.kprime; ++a) slot[hyper.selected[a]] = a;

  std::vector<std::uint32_t> codes(g.num_vertices(), 0);
  std::vector<int> counts(hyper.kprime);
  for (int v : part.members(part.smallest())) {
    std::fill(counts.begin(), counts.end(), 0);
    for (int u : g.neighbors(v)) {
      const int s = slot[part.label(u)];
      if (s >= 0) ++counts[s];
    }
    std::uint32_t code = 0;
    for (int a = 0; a < hyper.kprime; ++a)
      if (counts[a] - hyper.sign_threshold[a] >= 0.0) code |= 1u << a;  // Sign(0) = +1
    codes[v] = code;
  }
  return codes;
}

PartitionTree build_partition_tree(const Graph& g, const CommunityPartition& part,
                                   const SignatureHyper& hyper, int i) {
  return build_partition_tree(g, part, hyper, i, compute_sign_codes(g, part, hyper));
}

PartitionTree build_partition_tree(const Graph& g, const CommunityPartition& part,
                                   const SignatureHyper& hyper, int i,
                                   const std::vector<std::uint32_t>& sign_codes) {
  const int target = part.smallest();
  if (i < 0 || i >= g.num_vertices() || part.label(i) != target)
    throw std::invalid_argument("build_partition_tree: root must lie in the smallest community");

  PartitionTree tree;
  tree.root = i;
  tree.kprime = hyper.kprime;
  tree.ell = hyper.ell;
  tree.levels.resize(static_cast<std::size_t>(hyper.ell) + 1);
  tree.levels[0] = {{i, 0}};

  std::vector<int> dist(g.num_vertices(), -1);
  dist[i] = 0;
  for (int d = 0; d < hyper.ell; ++d) {
    auto& frontier = tree.levels[d];
    auto& next = tree.levels[d + 1];
    // Frontier is sorted by vertex id, so the first discovery of a sphere
    // vertex comes from its smallest-id predecessor.
    for (const auto& [v, code] : frontier) {
      for (int u : g.neighbors(v)) {
        if (dist[u] != -1 || part.label(u) != target) continue;
        dist[u] = d + 1;
        next.emplace_back(u, code | (static_cast<std::uint64_t>(sign_codes[u]) << (d * hyper.kprime)));
      }
    }
    std::sort(next.begin(), next.end());
  }
  return tree;
}

SignatureSet compute_signature(const PartitionTree& tree, const Graph& g,
                               const CommunityPartition& part, const SignatureHyper& hyper) {
  const int target = part.smallest();
  SignatureSet sig;
  const std::uint64_t dim = hyper.leaf_count();
  sig.f.assign(dim, 0.0);
  sig.v.assign(dim, 0.0);
  sig.leaf_sizes.assign(dim, 0);
  for (const auto& [j, code] : tree.levels[static_cast<std::size_t>(hyper.ell)]) {
    const int deg = degree_in_community(g, j, part, target);
    const double stat = hyper.log_degree ? std::log1p(static_cast<double>(deg))
                                         : static_cast<double>(deg);
    sig.f[code] += stat - 1.0 - hyper.center;
    ++sig.leaf_sizes[code];
  }
  for (std::uint64_t s = 0; s < dim; ++s)
    sig.v[s] = hyper.variance * static_cast<double>(sig.leaf_sizes[s]);
  return sig;
}

CommunitySignatures compute_signatures(const Graph& g, const CommunityPartition& part,
                                       const SignatureHyper& hyper, int num_workers) {
  hyper.validate(part);
  const auto codes = compute_sign_codes(g, part, hyper);
  const auto& roots = part.members(part.smallest());
  CommunitySignatures out;
  out.dim = hyper.leaf_count();
  out.f.resize(roots.size());
  out.v.resize(roots.size());
  parallel_for(static_cast<std::int64_t>(roots.size()), num_workers, [&](std::int64_t idx) {
    const auto tree = build_partition_tree(g, part, hyper, roots[static_cast<std::size_t>(idx)], codes);
    auto sig = compute_signature(tree, g, part, hyper);
    out.f[static_cast<std::size_t>(idx)] = std::move(sig.f);
    out.v[static_cast<std::size_t>(idx)] = std::move(sig.v);
  });
  return out;
}

}  // namespace csbm
