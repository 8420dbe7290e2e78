#include "csbm/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "csbm/parallel.hpp"

namespace csbm {

namespace {

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double mean(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double variance_of(const std::vector<double>& values) {
  const double m = mean(values);
  double sum = 0.0;
  for (double v : values) sum += (v - m) * (v - m);
  return sum / static_cast<double>(values.size());
}

}  // namespace

ParamEstimates estimate_params(const Graph& g, const CommunityPartition& part, bool log_degree) {
  const int k = part.num_communities();
  if (part.num_vertices() != g.num_vertices())
    throw std::invalid_argument("estimate_params: partition does not cover the graph");
  for (int a = 0; a < k; ++a)
    if (part.size(a) == 0) throw std::invalid_argument("estimate_params: empty community");

  auto transform = [log_degree](int deg) {
    return log_degree ? std::log1p(static_cast<double>(deg)) : static_cast<double>(deg);
  };

  // Per-vertex degree into each community, one adjacency pass.
  std::vector<std::vector<std::vector<double>>> degs(
      static_cast<std::size_t>(k), std::vector<std::vector<double>>(static_cast<std::size_t>(k)));
  std::vector<int> counts(static_cast<std::size_t>(k));
  for (int a = 0; a < k; ++a)
    for (int v : part.members(a)) {
      std::fill(counts.begin(), counts.end(), 0);
      for (int u : g.neighbors(v)) ++counts[static_cast<std::size_t>(part.label(u))];
      for (int b = 0; b < k; ++b)
        degs[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)].push_back(
            transform(counts[static_cast<std::size_t>(b)]));
    }

  ParamEstimates est;
  est.p_hat.resize(static_cast<std::size_t>(k));
  est.q_hat.assign(static_cast<std::size_t>(k), std::vector<double>(static_cast<std::size_t>(k), 0.0));
  for (int a = 0; a < k; ++a) {
    est.p_hat[static_cast<std::size_t>(a)] =
        median(degs[static_cast<std::size_t>(a)][static_cast<std::size_t>(a)]) / part.size(a);
    for (int b = 0; b < k; ++b) {
      if (a == b) continue;
      est.q_hat[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
          median(degs[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]) / part.size(b);
    }
  }
  const auto& within_k =
      degs[static_cast<std::size_t>(part.smallest())][static_cast<std::size_t>(part.smallest())];
  est.center = log_degree ? mean(within_k) : median(within_k);
  est.variance = variance_of(within_k);
  return est;
}

double accuracy(const Permutation& candidate, const Permutation& truth,
                const std::vector<int>& domain) {
  if (candidate.size() != truth.size())
    throw std::invalid_argument("accuracy: permutation size mismatch");
  if (domain.empty()) throw std::invalid_argument("accuracy: empty domain");
  int correct = 0;
  for (int v : domain) {
    if (v < 0 || v >= candidate.size())
      throw std::invalid_argument("accuracy: domain vertex out of range");
    if (candidate(v) == truth(v)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(domain.size());
}

namespace {

// Parses "a b" integer lines, skipping blanks and '#' comments.
std::vector<std::pair<std::int64_t, std::int64_t>> parse_pairs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    std::int64_t a = 0, b = 0;
    std::string extra;
    if (!(ss >> a >> b) || (ss >> extra)) {
      throw DataError(path + ":" + std::to_string(lineno) + ": expected two integers");
    }
    out.emplace_back(a, b);
  }
  return out;
}

}  // namespace

LoadedGraph load_graph(const std::string& edge_path, const std::string& label_path) {
  const auto label_pairs = parse_pairs(label_path);
  const auto edge_pairs = parse_pairs(edge_path);

  LoadedGraph out;
  for (const auto& [id, label] : label_pairs) out.external_ids.push_back(id);
  std::sort(out.external_ids.begin(), out.external_ids.end());
  if (std::adjacent_find(out.external_ids.begin(), out.external_ids.end()) !=
      out.external_ids.end())
    throw DataError(label_path + ": duplicate vertex id");

  auto densify = [&out](std::int64_t id) {
    const auto it = std::lower_bound(out.external_ids.begin(), out.external_ids.end(), id);
    if (it == out.external_ids.end() || *it != id) return -1;
    return static_cast<int>(it - out.external_ids.begin());
  };

  std::vector<int> labels(out.external_ids.size());
  for (const auto& [id, label] : label_pairs)
    labels[static_cast<std::size_t>(densify(id))] = static_cast<int>(label);

  std::vector<std::pair<int, int>> edges;
  edges.reserve(edge_pairs.size());
  for (const auto& [a, b] : edge_pairs) {
    if (a == b) {
      ++out.dropped_self_loops;
      continue;
    }
    const int u = densify(a), v = densify(b);
    if (u < 0 || v < 0)
      throw DataError(edge_path + ": edge endpoint " + std::to_string(u < 0 ? a : b) +
                      " has no label");
    edges.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(edges.begin(), edges.end());
  const auto uniq = std::unique(edges.begin(), edges.end());
  out.duplicate_edges = edges.end() - uniq;
  edges.erase(uniq, edges.end());

  out.graph = Graph::from_edges(static_cast<int>(out.external_ids.size()), edges);
  out.part = CommunityPartition::from_labels(labels);
  if (out.dropped_self_loops > 0)
    std::fprintf(stderr, "warning: dropped %lld self-loop(s) from %s\n",
                 static_cast<long long>(out.dropped_self_loops), edge_path.c_str());
  return out;
}

void save_graph(const Graph& g, const CommunityPartition& part, const std::string& edge_path,
                const std::string& label_path) {
  std::ofstream ef(edge_path);
  if (!ef) throw DataError("cannot write " + edge_path);
  for (auto [u, v] : g.edges()) ef << u << ' ' << v << '\n';
  std::ofstream lf(label_path);
  if (!lf) throw DataError("cannot write " + label_path);
  for (int v = 0; v < g.num_vertices(); ++v)
    lf << v << ' ' << part.original_label(part.label(v)) << '\n';
}

namespace {

using nlohmann::json;

const char* mode_name(ExperimentMode mode) {
  switch (mode) {
    case ExperimentMode::synthetic: return "synthetic";
    case ExperimentMode::real_pair: return "real-pair";
    case ExperimentMode::real_resample: return "real-resample";
  }
  return "?";
}

ExperimentMode mode_from_name(const std::string& name) {
  if (name == "synthetic") return ExperimentMode::synthetic;
  if (name == "real-pair") return ExperimentMode::real_pair;
  if (name == "real-resample") return ExperimentMode::real_resample;
  throw std::invalid_argument("config: unknown mode '" + name + "'");
}

}  // namespace

std::string ExperimentConfig::to_json() const {
  json j;
  j["mode"] = mode_name(mode);
  j["n"] = n;
  j["k"] = k;
  j["p_list"] = p_list;
  j["q"] = q;
  j["q_ratio"] = q_ratio;
  j["permute_across"] = permute_across;
  j["edges1"] = edges1;
  j["labels1"] = labels1;
  j["edges2"] = edges2;
  j["labels2"] = labels2;
  j["alpha_list"] = alpha_list;
  j["kprime"] = kprime;
  j["ell"] = ell;
  if (log_degree) j["log_degree"] = *log_degree;
  j["use_true_params"] = use_true_params;
  j["w"] = match.w;
  j["threshold_slack"] = match.threshold_slack;
  j["epsilon_refine"] = match.epsilon_refine;
  j["refine_rounds"] = match.refine_rounds;
  j["route"] = match.route == Stage1Route::thresholded ? "threshold" : "lap";
  j["refine_mode"] = match.refine_mode == RefineMode::lap ? "lap" : "threshold";
  j["seed_mode"] = match.seed_mode == SeedMode::greedy ? "greedy" : "theory";
  j["repetitions"] = repetitions;
  j["master_seed"] = master_seed;
  j["record_timing"] = record_timing;
  j["num_workers"] = num_workers;
  return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  try {
    if (j.contains("mode")) cfg.mode = mode_from_name(j["mode"].get<std::string>());
    cfg.n = j.value("n", 0);
    cfg.k = j.value("k", 0);
    if (j.contains("p_list")) cfg.p_list = j["p_list"].get<std::vector<double>>();
    cfg.q = j.value("q", 0.0);
    cfg.q_ratio = j.value("q_ratio", 0.0);
    cfg.permute_across = j.value("permute_across", false);
    cfg.edges1 = j.value("edges1", "");
    cfg.labels1 = j.value("labels1", "");
    cfg.edges2 = j.value("edges2", "");
    cfg.labels2 = j.value("labels2", "");
    if (j.contains("alpha_list")) cfg.alpha_list = j["alpha_list"].get<std::vector<double>>();
    cfg.kprime = j.value("kprime", 0);
    cfg.ell = j.value("ell", 0);
    if (j.contains("log_degree") && !j["log_degree"].is_null())
      cfg.log_degree = j["log_degree"].get<bool>();
    cfg.use_true_params = j.value("use_true_params", true);
    cfg.match.w = j.value("w", 0L);
    cfg.match.threshold_slack = j.value("threshold_slack", 0.0);
    cfg.match.epsilon_refine = j.value("epsilon_refine", 0.3);
    cfg.match.refine_rounds = j.value("refine_rounds", 2);
    cfg.match.route =
        j.value("route", "threshold") == std::string("lap") ? Stage1Route::lap_similarity
                                                            : Stage1Route::thresholded;
    cfg.match.refine_mode = j.value("refine_mode", "lap") == std::string("threshold")
                                ? RefineMode::threshold
                                : RefineMode::lap;
    cfg.match.seed_mode =
        j.value("seed_mode", "greedy") == std::string("theory") ? SeedMode::theory : SeedMode::greedy;
    cfg.repetitions = j.value("repetitions", 1);
    cfg.master_seed = j.value("master_seed", std::uint64_t{0});
    cfg.record_timing = j.value("record_timing", true);
    cfg.num_workers = j.value("num_workers", 0);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: bad field: ") + e.what());
  }
  return cfg;
}

void ExperimentConfig::validate() const {
  if (repetitions < 1) throw std::invalid_argument("config: repetitions must be >= 1");
  if (alpha_list.empty()) throw std::invalid_argument("config: alpha_list must be nonempty");
  for (double a : alpha_list)
    if (a < 0.0 || a >= 1.0) throw std::invalid_argument("config: alpha must be in [0, 1)");
  if (mode == ExperimentMode::synthetic) {
    if (!edges1.empty() || !edges2.empty())
      throw std::invalid_argument("config: synthetic mode takes no input files");
    if (n <= 0 || k < 3) throw std::invalid_argument("config: synthetic mode needs n > 0, k >= 3");
    if (p_list.empty()) throw std::invalid_argument("config: synthetic mode needs a p value");
    if (q_ratio <= 0.0 && q <= 0.0)
      throw std::invalid_argument("config: synthetic mode needs q or q_ratio");
  } else {
    if (n != 0 || !p_list.empty())
      throw std::invalid_argument("config: file modes take no model parameters");
    if (edges1.empty() || labels1.empty())
      throw std::invalid_argument("config: file modes need edges1/labels1");
    if (mode == ExperimentMode::real_pair && (edges2.empty() || labels2.empty()))
      throw std::invalid_argument("config: real-pair mode needs edges2/labels2");
    if (mode == ExperimentMode::real_resample && !edges2.empty())
      throw std::invalid_argument("config: real-resample mode takes a single input graph");
  }
}

std::uint64_t repetition_seed(std::uint64_t master_seed, std::size_t grid_index, int repetition) {
  return Rng::mix(master_seed, (static_cast<std::uint64_t>(grid_index) << 24) ^
                                   static_cast<std::uint64_t>(repetition));
}

SignatureHyper build_signature_hyper(const Graph& g1, const CommunityPartition& part1,
                                     const Graph& g2, const CommunityPartition& part2, int kprime,
                                     int ell, bool log_degree, bool use_true_params, double p,
                                     double q) {
  const int target = part1.smallest();
  const int n_k = part1.size(target);
  const int k = part1.num_communities();

  double p_hat = p, q_hat = q;
  ParamEstimates est1, est2;
  if (!use_true_params) {
    est1 = estimate_params(g1, part1, false);
    est2 = estimate_params(g2, part2, false);
    p_hat = 0.5 * (est1.p_hat[static_cast<std::size_t>(target)] +
                   est2.p_hat[static_cast<std::size_t>(target)]);
  }

  SignatureHyper hyper;
  if (kprime > 0 && ell > 0) {
    hyper.kprime = kprime;
    hyper.ell = ell;
    hyper.p_hat = p_hat;
  } else {
    hyper = default_hyperparams(n_k, p_hat, k);
    if (kprime > 0) hyper.kprime = std::min(kprime, std::max(k - 2, 1));
    if (ell > 0) hyper.ell = ell;
  }
  hyper.log_degree = log_degree;

  const int reserved = hyper.kprime;  // next-largest community after the selected ones
  if (!use_true_params) {
    // Cross-density from the target community into each selected community,
    // pooled across sides.
    configure_hyper(hyper, part1, q_hat, reserved);
    double q_sum = 0.0;
    for (std::size_t idx = 0; idx < hyper.selected.size(); ++idx) {
      const int a = hyper.selected[idx];
      const double qa =
          0.5 * (est1.q_hat[static_cast<std::size_t>(target)][static_cast<std::size_t>(a)] +
                 est2.q_hat[static_cast<std::size_t>(target)][static_cast<std::size_t>(a)]);
      hyper.sign_threshold[idx] = part1.size(a) * qa;
      q_sum += qa;
    }
    hyper.q_hat = q_sum / static_cast<double>(hyper.selected.size());
    if (log_degree) {
      const auto log1 = estimate_params(g1, part1, true);
      const auto log2 = estimate_params(g2, part2, true);
      hyper.center = 0.5 * (log1.center + log2.center);
      hyper.variance = 0.5 * (log1.variance + log2.variance);
    } else {
      hyper.center = 0.5 * (est1.center + est2.center);
      hyper.variance = 0.5 * (est1.variance + est2.variance);
    }
  } else {
    configure_hyper(hyper, part1, q_hat, reserved);
  }
  return hyper;
}

namespace {

struct PipelineInputs {
  const Graph* g1;
  const Graph* g2;
  const CommunityPartition* part1;
  const CommunityPartition* part2;
  const Permutation* truth;  // may be null
};

SignatureHyper build_hyper(const PipelineInputs& in, const ExperimentConfig& cfg, double p,
                           double q, bool log_degree) {
  const bool use_true = cfg.use_true_params && cfg.mode == ExperimentMode::synthetic;
  return build_signature_hyper(*in.g1, *in.part1, *in.g2, *in.part2, cfg.kprime, cfg.ell,
                               log_degree, use_true, p, q);
}

std::vector<ResultRow> run_one(const PipelineInputs& in, const ExperimentConfig& cfg, double p,
                               double q, double alpha, std::uint64_t seed) {
  const bool log_degree =
      cfg.log_degree ? *cfg.log_degree : cfg.mode == ExperimentMode::real_pair;
  const SignatureHyper hyper = build_hyper(in, cfg, p, q, log_degree);
  MatchHyper match = cfg.match;
  match.seed = seed;
  match.num_workers = 1;  // repetitions are already parallel

  const auto t0 = std::chrono::steady_clock::now();
  MatchResult result = full_pipeline(*in.g1, *in.g2, *in.part1, *in.part2, hyper, match, in.truth);
  const double total_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::vector<ResultRow> rows;
  auto base = [&]() {
    ResultRow row;
    row.mode = mode_name(cfg.mode);
    row.n = in.g1->num_vertices();
    row.k = in.part1->num_communities();
    row.p = p;
    row.q = q;
    row.alpha = alpha;
    row.kprime = hyper.kprime;
    row.ell = hyper.ell;
    row.w = match.effective_w(in.part1->size(in.part1->smallest()));
    row.seed = seed;
    return row;
  };
  for (const auto& stage : result.stages) {
    ResultRow row = base();
    row.stage = stage.stage;
    if (stage.accuracy >= 0.0) row.accuracy = stage.accuracy;
    row.seconds = cfg.record_timing ? stage.seconds : 0.0;
    rows.push_back(std::move(row));
  }
  ResultRow overall = base();
  overall.stage = "overall";
  if (result.overall_accuracy >= 0.0) overall.accuracy = result.overall_accuracy;
  overall.seconds = cfg.record_timing ? total_seconds : 0.0;
  rows.push_back(std::move(overall));
  return rows;
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();

  // Grid of (alpha, p) points; file modes carry a placeholder p.
  std::vector<std::pair<double, double>> grid;
  if (cfg.mode == ExperimentMode::synthetic) {
    for (double alpha : cfg.alpha_list)
      for (double p : cfg.p_list) grid.emplace_back(alpha, p);
  } else if (cfg.mode == ExperimentMode::real_resample) {
    for (double alpha : cfg.alpha_list) grid.emplace_back(alpha, 0.0);
  } else {
    grid.emplace_back(0.0, 0.0);
  }

  // File inputs are loaded once, outside the worker pool.
  LoadedGraph loaded1, loaded2;
  if (cfg.mode != ExperimentMode::synthetic) {
    loaded1 = load_graph(cfg.edges1, cfg.labels1);
    if (cfg.mode == ExperimentMode::real_pair) {
      loaded2 = load_graph(cfg.edges2, cfg.labels2);
      if (loaded1.external_ids != loaded2.external_ids)
        throw DataError("real-pair mode requires both graphs to share vertex ids");
    }
  }

  const std::size_t tasks = grid.size() * static_cast<std::size_t>(cfg.repetitions);
  std::vector<std::vector<ResultRow>> slots(tasks);
  parallel_for(static_cast<std::int64_t>(tasks), cfg.num_workers, [&](std::int64_t task) {
    const std::size_t gi = static_cast<std::size_t>(task) / cfg.repetitions;
    const int rep = static_cast<int>(task % cfg.repetitions);
    const auto [alpha, p] = grid[gi];
    const std::uint64_t seed = repetition_seed(cfg.master_seed, gi, rep);
    try {
      if (cfg.mode == ExperimentMode::synthetic) {
        const double q = cfg.q_ratio > 0.0 ? p * cfg.q_ratio : cfg.q;
        const SbmParams params = SbmParams::balanced(cfg.n, cfg.k, p, q, alpha);
        const CorrelatedPair pair =
            generate_correlated_pair(params, seed, cfg.permute_across, false);
        PipelineInputs in{&pair.g_pi, &pair.g_prime, &pair.part_pi, &pair.part, &pair.truth};
        slots[task] = run_one(in, cfg, p, q, alpha, seed);
      } else if (cfg.mode == ExperimentMode::real_resample) {
        const Rng master(seed);
        const Graph child1 =
            subsample_child(loaded1.graph, alpha, master.derive(kStreamChildA).seed());
        const Graph child2 =
            subsample_child(loaded1.graph, alpha, master.derive(kStreamChildB).seed());
        // Hidden within-community permutation on the first child.
        Rng perm_rng = master.derive(kStreamPermutation);
        std::vector<int> forward(static_cast<std::size_t>(loaded1.graph.num_vertices()));
        for (std::size_t i = 0; i < forward.size(); ++i) forward[i] = static_cast<int>(i);
        for (int a = 0; a < loaded1.part.num_communities(); ++a) {
          const auto& mem = loaded1.part.members(a);
          for (std::size_t i = mem.size(); i > 1; --i) {
            const std::size_t j = perm_rng.next_below(i);
            std::swap(forward[static_cast<std::size_t>(mem[i - 1])],
                      forward[static_cast<std::size_t>(mem[j])]);
          }
        }
        const Permutation truth(forward);
        const Graph permuted = apply_permutation(child1, truth);
        PipelineInputs in{&permuted, &child2, &loaded1.part, &loaded1.part, &truth};
        slots[task] = run_one(in, cfg, 0.0, 0.0, alpha, seed);
      } else {
        // Shared vertex ids: the ground truth is the identity.
        const Permutation truth = Permutation::identity(loaded1.graph.num_vertices());
        PipelineInputs in{&loaded1.graph, &loaded2.graph, &loaded1.part, &loaded2.part, &truth};
        slots[task] = run_one(in, cfg, 0.0, 0.0, alpha, seed);
      }
    } catch (const std::exception& e) {
      ResultRow row;
      row.mode = mode_name(cfg.mode);
      row.alpha = alpha;
      row.p = p;
      row.stage = "error";
      row.seed = seed;
      std::fprintf(stderr, "repetition failed (seed %llu): %s\n",
                   static_cast<unsigned long long>(seed), e.what());
      slots[task] = {row};
    }
  });

  std::vector<ResultRow> rows;
  for (std::size_t task = 0; task < tasks; ++task)
    for (auto& row : slots[task]) {
      row.run_id = static_cast<std::int64_t>(task);
      rows.push_back(std::move(row));
    }
  return rows;
}

std::string rows_to_csv(const std::vector<ResultRow>& rows) {
  std::string out = "run_id,mode,n,k,p,q,alpha,kprime,ell,w,stage,accuracy,seconds,seed\n";
  char buf[256];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%lld,%s,%d,%d,%g,%g,%g,%d,%d,%ld,%s,",
                  static_cast<long long>(row.run_id), row.mode.c_str(), row.n, row.k, row.p, row.q,
                  row.alpha, row.kprime, row.ell, row.w, row.stage.c_str());
    out += buf;
    if (row.accuracy) {
      std::snprintf(buf, sizeof buf, "%.6f", *row.accuracy);
      out += buf;
    }
    std::snprintf(buf, sizeof buf, ",%.3f,%llu\n", row.seconds,
                  static_cast<unsigned long long>(row.seed));
    out += buf;
  }
  return out;
}

void write_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << rows_to_csv(rows);
}

}  // namespace csbm
