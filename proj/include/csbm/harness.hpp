#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "csbm/graph.hpp"
#include "csbm/matcher.hpp"
#include "csbm/sbm.hpp"
#include "csbm/signature.hpp"

namespace csbm {

// Errors raised by file ingestion; distinguishable from configuration errors
// at the CLI boundary.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParamEstimates {
  std::vector<double> p_hat;                // per community: median within-degree / n_a
  std::vector<std::vector<double>> q_hat;   // [a][b]: median degree from C_a into C_b / n_b
  double center = 0.0;    // centering statistic for the smallest community
  double variance = 0.0;  // empirical variance of within-degrees in the smallest community
};

// Medians of within- and cross-community degrees; with log_degree the same
// statistics of ln(1 + deg). Throws on an empty community.
ParamEstimates estimate_params(const Graph& g, const CommunityPartition& part,
                               bool log_degree = false);

// Signature hyperparameters for one matched pair: explicit (kprime, ell) or
// the formula defaults when <= 0, thresholds and centering from the true
// densities (use_true_params) or from pooled estimates of both graphs.
SignatureHyper build_signature_hyper(const Graph& g1, const CommunityPartition& part1,
                                     const Graph& g2, const CommunityPartition& part2, int kprime,
                                     int ell, bool log_degree, bool use_true_params, double p,
                                     double q);

// Fraction of domain vertices where candidate and truth agree. Both
// permutations are global; domain lists global vertex ids.
double accuracy(const Permutation& candidate, const Permutation& truth,
                const std::vector<int>& domain);

struct LoadedGraph {
  Graph graph;
  CommunityPartition part;
  std::vector<std::int64_t> external_ids;  // dense id -> original id
  std::int64_t dropped_self_loops = 0;
  std::int64_t duplicate_edges = 0;
};

// Edge file: one "u v" per line; label file: one "id label" per line. Ids are
// arbitrary integers, densified at load. Blank lines and '#' comments are
// skipped. Throws DataError with a line number on malformed input or when an
// edge endpoint has no label.
LoadedGraph load_graph(const std::string& edge_path, const std::string& label_path);

void save_graph(const Graph& g, const CommunityPartition& part, const std::string& edge_path,
                const std::string& label_path);

enum class ExperimentMode { synthetic, real_pair, real_resample };

struct ExperimentConfig {
  ExperimentMode mode = ExperimentMode::synthetic;

  // Synthetic mode.
  int n = 0;
  int k = 0;
  std::vector<double> p_list;      // sweep axis; singleton for a fixed p
  double q = 0.0;                  // absolute; ignored when q_ratio > 0
  double q_ratio = 0.0;            // q = p * q_ratio, tracks the p sweep
  bool permute_across = false;

  // File modes. real_resample uses graph1 as the parent; real_pair loads two
  // graphs sharing vertex ids.
  std::string edges1, labels1, edges2, labels2;

  std::vector<double> alpha_list = {0.0};

  // Hyperparameters; kprime <= 0 means the formula defaults.
  int kprime = 0;
  int ell = 0;
  std::optional<bool> log_degree;  // unset: off for synthetic, on for real modes
  bool use_true_params = true;     // synthetic only; estimates otherwise
  MatchHyper match;

  int repetitions = 1;
  std::uint64_t master_seed = 0;
  bool record_timing = true;  // false pins the seconds column to 0 for byte-stable output
  int num_workers = 0;

  std::string to_json() const;
  static ExperimentConfig from_json(const std::string& json);

  void validate() const;  // throws std::invalid_argument
};

struct ResultRow {
  std::int64_t run_id = 0;
  std::string mode;
  int n = 0;
  int k = 0;
  double p = 0.0;
  double q = 0.0;
  double alpha = 0.0;
  int kprime = 0;
  int ell = 0;
  long w = 0;
  std::string stage;
  std::optional<double> accuracy;
  double seconds = 0.0;
  std::uint64_t seed = 0;
};

// Runs the sweep grid (alpha x p) times repetitions. A failed repetition
// yields a row with stage "error" instead of aborting. Rows come back in
// deterministic (grid, repetition, stage) order regardless of scheduling.
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

std::string rows_to_csv(const std::vector<ResultRow>& rows);
void write_csv(const std::vector<ResultRow>& rows, const std::string& path);

// Derived per-repetition seed, exposed so a row can be replayed standalone.
std::uint64_t repetition_seed(std::uint64_t master_seed, std::size_t grid_index,
                              int repetition);

}  // namespace csbm
