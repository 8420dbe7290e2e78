#include "csbm/matcher.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <iostream>
#include <numeric>
#include <stdexcept>

#include "csbm/parallel.hpp"

namespace csbm {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Fixed-width bitset over [n] backed by 64-bit words.
struct BitRows {
  int bits = 0;
  std::size_t words = 0;
  std::vector<std::uint64_t> data;

  BitRows(std::size_t rows, int bits_)
      : bits(bits_), words((static_cast<std::size_t>(bits_) + 63) / 64), data(rows * words, 0) {}
  std::uint64_t* row(std::size_t r) { return data.data() + r * words; }
  const std::uint64_t* row(std::size_t r) const { return data.data() + r * words; }
  void set(std::size_t r, int b) { row(r)[b >> 6] |= std::uint64_t{1} << (b & 63); }
};

void or_into(std::uint64_t* dst, const std::uint64_t* src, std::size_t words) {
  for (std::size_t w = 0; w < words; ++w) dst[w] |= src[w];
}

int and_popcount(const std::uint64_t* a, const std::uint64_t* b, std::size_t words) {
  int count = 0;
  for (std::size_t w = 0; w < words; ++w) count += std::popcount(a[w] & b[w]);
  return count;
}

// Completes a partial assignment (forward[j] = i or -1) to a bijection by
// pairing leftovers in ascending order.
Permutation complete_ascending(std::vector<int> forward) {
  const int n = static_cast<int>(forward.size());
  std::vector<char> taken(n, 0);
  for (int j = 0; j < n; ++j)
    if (forward[j] >= 0) taken[forward[j]] = 1;
  std::vector<int> free_rows;
  for (int i = 0; i < n; ++i)
    if (!taken[i]) free_rows.push_back(i);
  std::size_t next = 0;
  for (int j = 0; j < n; ++j)
    if (forward[j] < 0) forward[j] = free_rows[next++];
  return Permutation(std::move(forward));
}

// Witness counts W[i][i'] = |pi^{-1}(N_g(i)) ∩ N_g2(i')| for all pairs.
std::vector<std::vector<int>> witness_counts(const Graph& g, const Graph& g2,
                                             const Permutation& pi) {
  const int n = g.num_vertices();
  std::vector<std::vector<int>> w(n, std::vector<int>(n, 0));
  std::vector<char> mark(n, 0);
  for (int i = 0; i < n; ++i) {
    for (int u : g.neighbors(i)) mark[pi.inverse(u)] = 1;
    auto& row = w[i];
    for (int ip = 0; ip < n; ++ip) {
      int c = 0;
      for (int z : g2.neighbors(ip)) c += mark[z];
      row[ip] = c;
    }
    for (int u : g.neighbors(i)) mark[pi.inverse(u)] = 0;
  }
  return w;
}

double local_accuracy(const Permutation& local, const std::vector<int>& members_g1,
                      const std::vector<int>& members_g2, const Permutation& truth) {
  int correct = 0;
  for (int j = 0; j < local.size(); ++j)
    if (members_g1[local(j)] == truth(members_g2[j])) ++correct;
  return local.size() == 0 ? 1.0 : static_cast<double>(correct) / local.size();
}

}  // namespace

long MatchHyper::effective_w(int n_k) const {
  if (w > 0) return w;
  const double ln = std::log(static_cast<double>(n_k));
  return static_cast<long>(std::floor(std::pow(ln, 5.0)));
}

double MatchHyper::effective_slack(int n_k) const {
  if (threshold_slack > 0.0) return threshold_slack;
  return 1.0 / std::sqrt(std::log(static_cast<double>(n_k)));
}

std::vector<std::uint64_t> sample_index_set(int kprime, int ell, long w, Rng& rng) {
  if (kprime * ell < 1) throw std::invalid_argument("sample_index_set: kprime*ell must be >= 1");
  const std::uint64_t space = std::uint64_t{1} << (kprime * ell);
  const std::uint64_t want = std::min<std::uint64_t>(2 * static_cast<std::uint64_t>(std::max(w, 1L)),
                                                     space);
  std::vector<std::uint64_t> out;
  if (want == space) {
    out.resize(space);
    std::iota(out.begin(), out.end(), 0);
    return out;
  }
  // Floyd's sampling: uniform without replacement.
  out.reserve(want);
  for (std::uint64_t t = space - want; t < space; ++t) {
    const std::uint64_t r = rng.next_below(t + 1);
    if (std::find(out.begin(), out.end(), r) == out.end())
      out.push_back(r);
    else
      out.push_back(t);
  }
  std::sort(out.begin(), out.end());
  return out;
}

double normalized_distance(std::span<const double> f, std::span<const double> v,
                           std::span<const double> f2, std::span<const double> v2,
                           std::span<const std::uint64_t> J) {
  if (f.size() != v.size() || f.size() != f2.size() || f.size() != v2.size())
    throw std::invalid_argument("normalized_distance: vector length mismatch");
  double total = 0.0;
  for (std::uint64_t s : J) {
    if (s >= f.size()) throw std::invalid_argument("normalized_distance: index out of range");
    const double denom = v[s] + v2[s];
    if (denom <= 0.0) continue;  // both leaves empty
    const double diff = f[s] - f2[s];
    total += diff * diff / denom;
  }
  return total;
}

Permutation almost_exact_match(const Graph& g, const Graph& g2, const CommunityPartition& part,
                               const CommunityPartition& part2, const SignatureHyper& sig_hyper,
                               const MatchHyper& match_hyper) {
  const int target = part.smallest();
  const int n_k = part.size(target);
  if (n_k != part2.size(part2.smallest()))
    throw std::invalid_argument("almost_exact_match: community size mismatch");

  const auto sigs1 = compute_signatures(g, part, sig_hyper, match_hyper.num_workers);
  const auto sigs2 = compute_signatures(g2, part2, sig_hyper, match_hyper.num_workers);

  Rng rng = Rng(match_hyper.seed).derive(kStreamMatcher);
  Rng sel_rng = Rng(match_hyper.seed).derive(kStreamSelection);
  const auto J = sample_index_set(sig_hyper.kprime, sig_hyper.ell,
                                  match_hyper.effective_w(n_k), sel_rng);
  const double threshold =
      static_cast<double>(J.size()) * (1.0 - match_hyper.effective_slack(n_k));

  std::vector<std::pair<int, int>> edges;  // (i, j): g1-local i close to g2-local j
  for (int i = 0; i < n_k; ++i)
    for (int j = 0; j < n_k; ++j)
      if (normalized_distance(sigs1.f[i], sigs1.v[i], sigs2.f[j], sigs2.v[j], J) < threshold)
        edges.emplace_back(i, j);

  // Cleanup: fix random bipartite edges one at a time.
  for (std::size_t i = edges.size(); i > 1; --i)
    std::swap(edges[i - 1], edges[rng.next_below(i)]);
  std::vector<int> forward(n_k, -1);
  std::vector<char> used_i(n_k, 0);
  for (auto [i, j] : edges) {
    if (used_i[i] || forward[j] >= 0) continue;
    forward[j] = i;
    used_i[i] = 1;
  }
  return complete_ascending(std::move(forward));
}

CostMatrix build_similarity_matrix(const CommunitySignatures& a, const CommunitySignatures& b,
                                   int num_workers) {
  if (a.dim != b.dim) throw std::invalid_argument("similarity: signature dimension mismatch");
  std::vector<std::uint64_t> full(a.dim);
  std::iota(full.begin(), full.end(), 0);
  const std::size_t rows = a.f.size(), cols = b.f.size();
  CostMatrix s(rows, std::vector<double>(cols, 0.0));
  parallel_for(static_cast<std::int64_t>(rows), num_workers, [&](std::int64_t i) {
    for (std::size_t j = 0; j < cols; ++j)
      s[static_cast<std::size_t>(i)][j] =
          normalized_distance(a.f[static_cast<std::size_t>(i)], a.v[static_cast<std::size_t>(i)],
                              b.f[j], b.v[j], full);
  });
  return s;
}

Permutation refine_threshold(const Graph& g, const Graph& g2, const Permutation& pi0, double eps,
                             double p_hat) {
  const int n = g.num_vertices();
  if (pi0.size() != n || g2.num_vertices() != n)
    throw std::invalid_argument("refine_threshold: domain size mismatch");
  if (n <= 1) return pi0;
  const double thr = eps * eps * p_hat * n / 512.0;
  const int rounds = static_cast<int>(std::ceil(std::log2(static_cast<double>(n))));

  Permutation cur = pi0;
  for (int t = 0; t < rounds; ++t) {
    const auto w = witness_counts(g, g2, cur);
    // Per-row/column counts of threshold hits; a pair is accepted only when
    // it is the unique hit in both its row and its column.
    std::vector<int> row_hits(n, 0), row_arg(n, -1), col_hits(n, 0), col_arg(n, -1);
    for (int i = 0; i < n; ++i)
      for (int ip = 0; ip < n; ++ip)
        if (static_cast<double>(w[i][ip]) >= thr) {
          ++row_hits[i];
          row_arg[i] = ip;
          ++col_hits[ip];
          col_arg[ip] = i;
        }
    std::vector<int> forward(n, -1);
    std::vector<char> taken(n, 0);
    for (int i = 0; i < n; ++i)
      if (row_hits[i] == 1 && col_hits[row_arg[i]] == 1) {
        forward[row_arg[i]] = i;
        taken[i] = 1;
      }
    // Carry the previous assignment for unmatched vertices where possible.
    for (int j = 0; j < n; ++j)
      if (forward[j] < 0 && !taken[cur(j)]) {
        forward[j] = cur(j);
        taken[cur(j)] = 1;
      }
    cur = complete_ascending(std::move(forward));
  }
  return cur;
}

Permutation refine_lap(const Graph& g, const Graph& g2, const Permutation& pi0, int rounds) {
  const int n = g.num_vertices();
  if (pi0.size() != n || g2.num_vertices() != n)
    throw std::invalid_argument("refine_lap: domain size mismatch");
  Permutation cur = pi0;
  for (int t = 0; t < rounds; ++t) {
    const auto counts = witness_counts(g, g2, cur);
    CostMatrix w(n, std::vector<double>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) w[i][j] = static_cast<double>(counts[i][j]);
    cur = solve_lap_max(w);
  }
  return cur;
}

namespace {

// Per-vertex seed bitsets for one side: bit j of row z is set when z is
// adjacent to the seed vertex representing j on that side.
BitRows seed_adjacency(const Graph& g, const CommunityPartition& part, int s, int t,
                       const std::vector<int>& seed_vertex_of_j) {
  const auto& mem_t = part.members(t);
  const int n_s = static_cast<int>(seed_vertex_of_j.size());
  std::vector<int> j_of_vertex(g.num_vertices(), -1);
  for (int j = 0; j < n_s; ++j) j_of_vertex[seed_vertex_of_j[j]] = j;
  BitRows rows(mem_t.size(), std::max(n_s, 1));
  for (std::size_t zi = 0; zi < mem_t.size(); ++zi)
    for (int u : g.neighbors(mem_t[zi])) {
      if (part.label(u) != s) continue;
      const int j = j_of_vertex[u];
      if (j >= 0) rows.set(zi, j);
    }
  return rows;
}

}  // namespace

Permutation seeded_match(const Graph& g, const Graph& g2, const CommunityPartition& part,
                         const CommunityPartition& part2, const Permutation& seeds, int s, int t,
                         double p_hat, double q_hat) {
  if (s == t) throw std::invalid_argument("seeded_match: seed and target communities must differ");
  if (seeds.size() != part.size(s) || part.size(s) != part2.size(s))
    throw std::invalid_argument("seeded_match: seeds must be a bijection on the seed community");
  const int n_t = part.size(t);
  const int n_s = part.size(s);
  if (n_t != part2.size(t)) throw std::invalid_argument("seeded_match: target size mismatch");

  if (p_hat > 1.0 / 256.0 || n_t * p_hat * q_hat > 1.0 / 256.0)
    std::cerr << "warning: seeded matching outside the guaranteed regime "
              << "(p=" << p_hat << ", n_t*p*q=" << n_t * p_hat * q_hat << ")\n";

  const auto& mem1_t = part.members(t);
  const auto& mem2_t = part2.members(t);
  const auto& mem1_s = part.members(s);
  const auto& mem2_s = part2.members(s);

  // Side 1 indexes seed j by its matched vertex seeds(j); side 2 by j itself.
  std::vector<int> seed1(n_s), seed2(n_s);
  for (int j = 0; j < n_s; ++j) {
    seed1[j] = mem1_s[seeds(j)];
    seed2[j] = mem2_s[j];
  }
  const BitRows s1 = seed_adjacency(g, part, s, t, seed1);
  const BitRows s2 = seed_adjacency(g2, part2, s, t, seed2);

  // 2-hop reach: union over neighbors within the target community.
  std::vector<int> local1(g.num_vertices(), -1), local2(g2.num_vertices(), -1);
  for (int i = 0; i < n_t; ++i) local1[mem1_t[i]] = i;
  for (int i = 0; i < n_t; ++i) local2[mem2_t[i]] = i;
  BitRows a(static_cast<std::size_t>(n_t), std::max(n_s, 1));
  BitRows b(static_cast<std::size_t>(n_t), std::max(n_s, 1));
  for (int i = 0; i < n_t; ++i)
    for (int u : g.neighbors(mem1_t[i]))
      if (local1[u] >= 0) or_into(a.row(i), s1.row(local1[u]), s1.words);
  for (int i = 0; i < n_t; ++i)
    for (int u : g2.neighbors(mem2_t[i]))
      if (local2[u] >= 0) or_into(b.row(i), s2.row(local2[u]), s2.words);

  const double threshold = static_cast<double>(n_t) * n_s * p_hat * q_hat / 8.0;
  // Candidate per i': the heaviest i meeting the threshold, smaller id on
  // ties; duplicate targets resolved by weight.
  struct Candidate {
    int weight;
    int i;
    int ip;
  };
  std::vector<Candidate> candidates;
  for (int ip = 0; ip < n_t; ++ip) {
    int best_i = -1, best_w = -1;
    for (int i = 0; i < n_t; ++i) {
      const int w = and_popcount(a.row(i), b.row(ip), a.words);
      if (static_cast<double>(w) >= threshold && w > best_w) {
        best_w = w;
        best_i = i;
      }
    }
    if (best_i >= 0) candidates.push_back({best_w, best_i, ip});
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
    if (x.weight != y.weight) return x.weight > y.weight;
    if (x.i != y.i) return x.i < y.i;
    return x.ip < y.ip;
  });
  std::vector<int> forward(n_t, -1);
  std::vector<char> used(n_t, 0);
  for (const auto& c : candidates) {
    if (used[c.i] || forward[c.ip] >= 0) continue;
    forward[c.ip] = c.i;
    used[c.i] = 1;
  }
  return complete_ascending(std::move(forward));
}

Permutation seeded_match_greedy(const Graph& g, const Graph& g2, const CommunityPartition& part,
                                const CommunityPartition& part2, const Permutation& seeds, int s,
                                int t) {
  if (s == t) throw std::invalid_argument("seeded_match_greedy: communities must differ");
  if (seeds.size() != part.size(s) || part.size(s) != part2.size(s))
    throw std::invalid_argument("seeded_match_greedy: seeds must be a bijection on the seed community");
  const int n_t = part.size(t);
  const int n_s = part.size(s);
  if (n_t != part2.size(t)) throw std::invalid_argument("seeded_match_greedy: target size mismatch");

  const auto& mem1_t = part.members(t);
  const auto& mem2_t = part2.members(t);
  const auto& mem1_s = part.members(s);
  const auto& mem2_s = part2.members(s);

  // 1-hop common seeds: bit j set for i when seeds(j) is adjacent to i in g;
  // for i' when j is adjacent to i' in g2.
  std::vector<int> j_of_vertex1(g.num_vertices(), -1), j_of_vertex2(g2.num_vertices(), -1);
  for (int j = 0; j < n_s; ++j) {
    j_of_vertex1[mem1_s[seeds(j)]] = j;
    j_of_vertex2[mem2_s[j]] = j;
  }
  BitRows p_rows(static_cast<std::size_t>(n_t), std::max(n_s, 1));
  BitRows q_rows(static_cast<std::size_t>(n_t), std::max(n_s, 1));
  for (int i = 0; i < n_t; ++i)
    for (int u : g.neighbors(mem1_t[i]))
      if (j_of_vertex1[u] >= 0) p_rows.set(i, j_of_vertex1[u]);
  for (int i = 0; i < n_t; ++i)
    for (int u : g2.neighbors(mem2_t[i]))
      if (j_of_vertex2[u] >= 0) q_rows.set(i, j_of_vertex2[u]);

  struct Entry {
    int count;
    int i;
    int ip;
  };
  std::vector<Entry> entries;
  for (int i = 0; i < n_t; ++i)
    for (int ip = 0; ip < n_t; ++ip) {
      const int c = and_popcount(p_rows.row(i), q_rows.row(ip), p_rows.words);
      if (c > 0) entries.push_back({c, i, ip});
    }
  // Counts never change as pairs are removed, so a single sorted sweep equals
  // repeated global argmax with ties broken by (smaller i, smaller i').
  std::sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) {
    if (x.count != y.count) return x.count > y.count;
    if (x.i != y.i) return x.i < y.i;
    return x.ip < y.ip;
  });
  std::vector<int> forward(n_t, -1);
  std::vector<char> used(n_t, 0);
  for (const auto& e : entries) {
    if (used[e.i] || forward[e.ip] >= 0) continue;
    forward[e.ip] = e.i;
    used[e.i] = 1;
  }
  return complete_ascending(std::move(forward));
}

MatchResult full_pipeline(const Graph& g, const Graph& g2, const CommunityPartition& part,
                          const CommunityPartition& part2, const SignatureHyper& sig_hyper,
                          const MatchHyper& match_hyper, const Permutation* truth) {
  const int k = part.num_communities();
  if (k < 3)
    throw std::invalid_argument("full_pipeline: needs at least 3 communities "
                                "(target, reserved, and one signature community)");
  if (part2.num_communities() != k)
    throw std::invalid_argument("full_pipeline: community count mismatch");
  sig_hyper.validate(part);
  const int target = part.smallest();

  // Reserved seed community: the largest one not used for sign tests.
  int reserved = -1;
  for (int a = 0; a < k; ++a) {
    if (a == target) continue;
    if (std::find(sig_hyper.selected.begin(), sig_hyper.selected.end(), a) !=
        sig_hyper.selected.end())
      continue;
    reserved = a;
    break;
  }
  if (reserved < 0)
    throw std::invalid_argument("full_pipeline: no community left to reserve for seeding");

  MatchResult result;
  result.per_community.resize(static_cast<std::size_t>(k));

  // Stage 1: signature matching on the smallest community.
  auto t0 = std::chrono::steady_clock::now();
  Permutation stage1;
  if (match_hyper.route == Stage1Route::thresholded) {
    stage1 = almost_exact_match(g, g2, part, part2, sig_hyper, match_hyper);
  } else {
    const auto sigs1 = compute_signatures(g, part, sig_hyper, match_hyper.num_workers);
    const auto sigs2 = compute_signatures(g2, part2, sig_hyper, match_hyper.num_workers);
    const auto s = build_similarity_matrix(sigs1, sigs2, match_hyper.num_workers);
    stage1 = solve_lap_min(s);
  }
  StageRecord rec1{"signature", -1.0, seconds_since(t0)};
  if (truth) rec1.accuracy = local_accuracy(stage1, part.members(target), part2.members(target), *truth);
  result.stages.push_back(rec1);

  // Stage 2: refinement within the smallest community.
  t0 = std::chrono::steady_clock::now();
  const Graph ind1 = induced_subgraph(g, part.members(target));
  const Graph ind2 = induced_subgraph(g2, part2.members(target));
  Permutation refined =
      match_hyper.refine_mode == RefineMode::lap
          ? refine_lap(ind1, ind2, stage1, match_hyper.refine_rounds)
          : refine_threshold(ind1, ind2, stage1, match_hyper.epsilon_refine, sig_hyper.p_hat);
  StageRecord rec2{"refine", -1.0, seconds_since(t0)};
  if (truth)
    rec2.accuracy = local_accuracy(refined, part.members(target), part2.members(target), *truth);
  result.stages.push_back(rec2);
  result.per_community[static_cast<std::size_t>(target)] = refined;

  auto seed_into = [&](const Permutation& seeds, int s, int t) {
    if (match_hyper.seed_mode == SeedMode::greedy)
      return seeded_match_greedy(g, g2, part, part2, seeds, s, t);
    return seeded_match(g, g2, part, part2, seeds, s, t, sig_hyper.p_hat, sig_hyper.q_hat);
  };

  // Stage 3: seed the reserved community from the refined target matching.
  t0 = std::chrono::steady_clock::now();
  const Permutation reserved_perm = seed_into(refined, target, reserved);
  StageRecord rec3{"seed-reserved", -1.0, seconds_since(t0)};
  if (truth)
    rec3.accuracy =
        local_accuracy(reserved_perm, part.members(reserved), part2.members(reserved), *truth);
  result.stages.push_back(rec3);
  result.per_community[static_cast<std::size_t>(reserved)] = reserved_perm;

  // Stage 4: seed every remaining community from the reserved one.
  t0 = std::chrono::steady_clock::now();
  int rest_correct = 0, rest_total = 0;
  for (int t = 0; t < k; ++t) {
    if (t == target || t == reserved) continue;
    const Permutation perm = seed_into(reserved_perm, reserved, t);
    if (truth) {
      rest_correct += static_cast<int>(
          std::lround(local_accuracy(perm, part.members(t), part2.members(t), *truth) * perm.size()));
      rest_total += perm.size();
    }
    result.per_community[static_cast<std::size_t>(t)] = perm;
  }
  StageRecord rec4{"seed-rest", -1.0, seconds_since(t0)};
  if (truth && rest_total > 0) rec4.accuracy = static_cast<double>(rest_correct) / rest_total;
  if (truth && rest_total == 0) rec4.accuracy = 1.0;
  result.stages.push_back(rec4);

  // Assemble the global permutation.
  std::vector<int> forward(static_cast<std::size_t>(g.num_vertices()), -1);
  for (int c = 0; c < k; ++c) {
    const auto& perm = result.per_community[static_cast<std::size_t>(c)];
    const auto& mem1 = part.members(c);
    const auto& mem2 = part2.members(c);
    for (int j = 0; j < perm.size(); ++j) forward[mem2[j]] = mem1[perm(j)];
  }
  result.overall = Permutation(std::move(forward));
  if (truth) {
    int correct = 0;
    for (int u = 0; u < result.overall.size(); ++u)
      if (result.overall(u) == (*truth)(u)) ++correct;
    result.overall_accuracy = static_cast<double>(correct) / result.overall.size();
  }
  return result;
}

}  // namespace csbm
