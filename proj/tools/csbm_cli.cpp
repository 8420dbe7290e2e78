// Command-line front end. Talks to the library exclusively through the C API.
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "csbm/csbm.h"

namespace {

using nlohmann::json;

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

int exit_code_for(csbm_status st) {
  switch (st) {
    case CSBM_OK: return 0;
    case CSBM_ERR_ARGUMENT:
    case CSBM_ERR_CONFIG: return kExitConfig;
    case CSBM_ERR_DATA: return kExitData;
    default: return 1;
  }
}

int fail(csbm_status st) {
  std::cerr << "error: " << csbm_last_error() << "\n";
  return exit_code_for(st);
}

struct PairPaths {
  std::string g1_edges, g1_labels, g2_edges, g2_labels, truth;
  explicit PairPaths(const std::string& prefix)
      : g1_edges(prefix + ".g1.edges"),
        g1_labels(prefix + ".g1.labels"),
        g2_edges(prefix + ".g2.edges"),
        g2_labels(prefix + ".g2.labels"),
        truth(prefix + ".truth") {}
};

int cmd_generate(std::int64_t n, int k, double p, double q, double alpha, bool permute_across,
                 std::uint64_t seed, const std::string& prefix) {
  csbm_generate_params params{};
  params.n = n;
  params.k = k;
  params.p = p;
  params.q = q;
  params.alpha = alpha;
  params.permute_across = permute_across ? 1 : 0;
  params.seed = seed;

  csbm_graph* g1 = nullptr;
  csbm_graph* g2 = nullptr;
  std::vector<std::int64_t> truth(static_cast<std::size_t>(n));
  csbm_status st = csbm_generate_pair(&params, &g1, &g2, truth.data());
  if (st != CSBM_OK) return fail(st);

  const PairPaths paths(prefix);
  st = csbm_graph_save(g1, paths.g1_edges.c_str(), paths.g1_labels.c_str());
  if (st == CSBM_OK) st = csbm_graph_save(g2, paths.g2_edges.c_str(), paths.g2_labels.c_str());
  if (st == CSBM_OK) {
    std::ofstream tf(paths.truth);
    if (!tf) {
      std::cerr << "error: cannot write " << paths.truth << "\n";
      st = CSBM_ERR_DATA;
    } else {
      // One "g2-vertex g1-vertex" pair per line.
      for (std::size_t u = 0; u < truth.size(); ++u) tf << u << ' ' << truth[u] << '\n';
    }
  }
  if (st == CSBM_OK)
    std::cout << "wrote " << prefix << ".{g1,g2}.{edges,labels} and " << paths.truth << " ("
              << csbm_graph_vertex_count(g1) << " vertices, " << csbm_graph_edge_count(g1) << "/"
              << csbm_graph_edge_count(g2) << " edges)\n";
  csbm_graph_free(g1);
  csbm_graph_free(g2);
  return st == CSBM_OK ? 0 : fail(st);
}

bool read_truth_file(const std::string& path, std::int64_t n, std::vector<std::int64_t>& truth) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot open " << path << "\n";
    return false;
  }
  truth.assign(static_cast<std::size_t>(n), -1);
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    std::int64_t u = 0, v = 0;
    if (!(ss >> u >> v) || u < 0 || u >= n || v < 0 || v >= n) {
      std::cerr << "error: " << path << ":" << lineno << ": bad truth pair\n";
      return false;
    }
    truth[static_cast<std::size_t>(u)] = v;
  }
  for (std::size_t u = 0; u < truth.size(); ++u)
    if (truth[u] < 0) {
      std::cerr << "error: " << path << ": vertex " << u << " has no truth entry\n";
      return false;
    }
  return true;
}

int cmd_match(const PairPaths& paths, const std::string& truth_path, const json& options,
              const std::string& out_path) {
  csbm_graph* g1 = nullptr;
  csbm_graph* g2 = nullptr;
  csbm_status st = csbm_graph_load(paths.g1_edges.c_str(), paths.g1_labels.c_str(), &g1);
  if (st != CSBM_OK) return fail(st);
  st = csbm_graph_load(paths.g2_edges.c_str(), paths.g2_labels.c_str(), &g2);
  if (st != CSBM_OK) {
    csbm_graph_free(g1);
    return fail(st);
  }

  const std::int64_t n = csbm_graph_vertex_count(g2);
  std::vector<std::int64_t> truth;
  if (!truth_path.empty() && !read_truth_file(truth_path, n, truth)) {
    csbm_graph_free(g1);
    csbm_graph_free(g2);
    return kExitData;
  }

  csbm_result* result = nullptr;
  st = csbm_match(g1, g2, options.dump().c_str(), truth.empty() ? nullptr : truth.data(), &result);
  int code = 0;
  if (st != CSBM_OK) {
    code = fail(st);
  } else {
    for (int i = 0; i < csbm_result_stage_count(result); ++i) {
      std::printf("%-14s %8.3fs", csbm_result_stage_name(result, i),
                  csbm_result_stage_seconds(result, i));
      const double acc = csbm_result_stage_accuracy(result, i);
      if (acc >= 0.0) std::printf("  accuracy %.6f", acc);
      std::printf("\n");
    }
    const double overall = csbm_result_overall_accuracy(result);
    if (overall >= 0.0) std::printf("%-14s %8s   accuracy %.6f\n", "overall", "", overall);
    if (!out_path.empty()) {
      std::vector<std::int64_t> perm(static_cast<std::size_t>(n));
      st = csbm_result_permutation(result, perm.data(), n);
      if (st != CSBM_OK) {
        code = fail(st);
      } else {
        std::ofstream out(out_path);
        if (!out) {
          std::cerr << "error: cannot write " << out_path << "\n";
          code = kExitData;
        } else {
          for (std::size_t u = 0; u < perm.size(); ++u) out << u << ' ' << perm[u] << '\n';
        }
      }
    }
  }
  csbm_result_free(result);
  csbm_graph_free(g1);
  csbm_graph_free(g2);
  return code;
}

int cmd_estimate(const std::string& edges, const std::string& labels, bool log_degree) {
  csbm_graph* g = nullptr;
  csbm_status st = csbm_graph_load(edges.c_str(), labels.c_str(), &g);
  if (st != CSBM_OK) return fail(st);
  char* text = nullptr;
  st = csbm_estimate_json(g, log_degree ? 1 : 0, &text);
  int code = 0;
  if (st != CSBM_OK) {
    code = fail(st);
  } else {
    std::cout << text << "\n";
  }
  csbm_string_free(text);
  csbm_graph_free(g);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Correlated-SBM graph matching"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Sample a correlated graph pair to files");
  std::int64_t gen_n = 0;
  int gen_k = 0;
  double gen_p = 0.0, gen_q = 0.0, gen_alpha = 0.0;
  bool gen_across = false;
  std::uint64_t gen_seed = 0;
  std::string gen_prefix;
  gen->add_option("--n", gen_n, "Total vertex count")->required();
  gen->add_option("--k", gen_k, "Number of balanced communities")->required();
  gen->add_option("--p", gen_p, "Intra-community edge density")->required();
  gen->add_option("--q", gen_q, "Inter-community edge density")->required();
  gen->add_option("--alpha", gen_alpha, "Subsampling noise in [0,1)");
  gen->add_flag("--permute-across", gen_across, "Hidden permutation ignores communities");
  gen->add_option("--seed", gen_seed, "Master seed")->required();
  gen->add_option("--out", gen_prefix, "Output path prefix")->required();

  // match
  auto* match = app.add_subcommand("match", "Recover the hidden permutation for a pair of files");
  std::string match_prefix, match_truth, match_out;
  json options = json::object();
  int opt_kprime = 0, opt_ell = 0, opt_rounds = 2, opt_workers = 0;
  double opt_p = 0.0, opt_q = 0.0, opt_eps = 0.3;
  std::string opt_route = "threshold", opt_refine = "lap", opt_seed_mode = "greedy";
  bool opt_log_degree = false, opt_true_params = false;
  std::uint64_t opt_seed = 0;
  match->add_option("--pair", match_prefix,
                    "Path prefix of a generated pair (PREFIX.{g1,g2}.{edges,labels})")
      ->required();
  match->add_option("--truth", match_truth, "Ground-truth file for accuracy reporting");
  match->add_option("--out", match_out, "Write the recovered permutation here");
  match->add_option("--kprime", opt_kprime, "Sign-test communities per level (0: formula)");
  match->add_option("--ell", opt_ell, "Partition-tree depth (0: formula)");
  match->add_option("--route", opt_route, "Stage-1 route: threshold | lap")
      ->check(CLI::IsMember({"threshold", "lap"}));
  match->add_option("--refine-mode", opt_refine, "Refinement: lap | threshold")
      ->check(CLI::IsMember({"lap", "threshold"}));
  match->add_option("--refine-rounds", opt_rounds, "Refinement rounds (lap mode)");
  match->add_option("--epsilon", opt_eps, "Refinement threshold scale (threshold mode)");
  match->add_option("--seed-mode", opt_seed_mode, "Seeded propagation: greedy | theory")
      ->check(CLI::IsMember({"greedy", "theory"}));
  match->add_flag("--log-degree", opt_log_degree, "Use ln(1+deg) signature statistics");
  match->add_flag("--use-true-params", opt_true_params, "Use --p/--q instead of estimates");
  match->add_option("--p", opt_p, "True intra-community density");
  match->add_option("--q", opt_q, "True inter-community density");
  match->add_option("--seed", opt_seed, "Seed for randomized cleanup");
  match->add_option("--workers", opt_workers, "Worker threads (0: auto)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Run an experiment grid and write a CSV");
  std::string sweep_config, sweep_out = "results.csv", sweep_mode = "synthetic";
  std::string sw_edges1, sw_labels1, sw_edges2, sw_labels2;
  int sw_n = 0, sw_k = 0, sw_kprime = 0, sw_ell = 0, sw_reps = 1, sw_workers = 0;
  std::vector<double> sw_p, sw_alpha;
  double sw_q = 0.0, sw_q_ratio = 0.0;
  bool sw_estimates = false, sw_no_timing = false, sw_across = false;
  std::uint64_t sweep_seed = 0;
  std::string sw_route, sw_refine, sw_seed_mode, sw_log_degree;
  sweep->add_option("--config", sweep_config, "JSON config file (flags override it)");
  sweep->add_option("--seed", sweep_seed, "Master seed")->required();
  sweep->add_option("--out", sweep_out, "CSV output path");
  sweep->add_option("--mode", sweep_mode, "synthetic | real-pair | real-resample")
      ->check(CLI::IsMember({"synthetic", "real-pair", "real-resample"}));
  sweep->add_option("--n", sw_n, "Total vertex count (synthetic)");
  sweep->add_option("--k", sw_k, "Balanced communities (synthetic)");
  sweep->add_option("--p", sw_p, "Intra-community density sweep values");
  sweep->add_option("--q", sw_q, "Inter-community density");
  sweep->add_option("--q-ratio", sw_q_ratio, "q as a fraction of p (tracks the p sweep)");
  sweep->add_option("--alpha", sw_alpha, "Noise sweep values");
  sweep->add_flag("--permute-across", sw_across, "Hidden permutation ignores communities");
  sweep->add_option("--edges1", sw_edges1, "First edge file (file modes)");
  sweep->add_option("--labels1", sw_labels1, "First label file (file modes)");
  sweep->add_option("--edges2", sw_edges2, "Second edge file (real-pair)");
  sweep->add_option("--labels2", sw_labels2, "Second label file (real-pair)");
  sweep->add_option("--kprime", sw_kprime, "Sign-test communities per level (0: formula)");
  sweep->add_option("--ell", sw_ell, "Partition-tree depth (0: formula)");
  sweep->add_option("--route", sw_route, "Stage-1 route: threshold | lap")
      ->check(CLI::IsMember({"threshold", "lap"}));
  sweep->add_option("--refine-mode", sw_refine, "Refinement: lap | threshold")
      ->check(CLI::IsMember({"lap", "threshold"}));
  sweep->add_option("--seed-mode", sw_seed_mode, "Seeded propagation: greedy | theory")
      ->check(CLI::IsMember({"greedy", "theory"}));
  sweep->add_option("--log-degree", sw_log_degree, "on | off (default depends on mode)")
      ->check(CLI::IsMember({"on", "off"}));
  sweep->add_flag("--use-estimates", sw_estimates, "Estimate densities even on synthetic data");
  sweep->add_option("--repetitions", sw_reps, "Repetitions per grid point");
  sweep->add_flag("--no-timing", sw_no_timing, "Pin the seconds column to 0 for stable output");
  sweep->add_option("--workers", sw_workers, "Worker threads (0: auto)");

  // estimate
  auto* est = app.add_subcommand("estimate", "Print parameter estimates for one graph");
  std::string est_edges, est_labels;
  bool est_log = false;
  est->add_option("--edges", est_edges, "Edge file")->required();
  est->add_option("--labels", est_labels, "Label file")->required();
  est->add_flag("--log-degree", est_log, "Estimate ln(1+deg) statistics too");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (gen->parsed())
    return cmd_generate(gen_n, gen_k, gen_p, gen_q, gen_alpha, gen_across, gen_seed, gen_prefix);

  if (match->parsed()) {
    options["kprime"] = opt_kprime;
    options["ell"] = opt_ell;
    options["route"] = opt_route;
    options["refine_mode"] = opt_refine;
    options["refine_rounds"] = opt_rounds;
    options["epsilon_refine"] = opt_eps;
    options["seed_mode"] = opt_seed_mode;
    options["log_degree"] = opt_log_degree;
    options["use_true_params"] = opt_true_params;
    if (opt_true_params) {
      options["p"] = opt_p;
      options["q"] = opt_q;
    }
    options["seed"] = opt_seed;
    options["num_workers"] = opt_workers;
    return cmd_match(PairPaths(match_prefix), match_truth, options, match_out);
  }

  if (sweep->parsed()) {
    json cfg = json::object();
    if (!sweep_config.empty()) {
      std::ifstream in(sweep_config);
      if (!in) {
        std::cerr << "error: cannot open " << sweep_config << "\n";
        return kExitData;
      }
      try {
        in >> cfg;
      } catch (const json::exception& e) {
        std::cerr << "error: " << sweep_config << ": " << e.what() << "\n";
        return kExitConfig;
      }
    }
    auto set_if = [&cfg](const char* key, const CLI::Option* opt, auto value) {
      if (opt->count() > 0) cfg[key] = value;
    };
    set_if("mode", sweep->get_option("--mode"), sweep_mode);
    if (!cfg.contains("mode")) cfg["mode"] = sweep_mode;
    set_if("n", sweep->get_option("--n"), sw_n);
    set_if("k", sweep->get_option("--k"), sw_k);
    set_if("p_list", sweep->get_option("--p"), sw_p);
    set_if("q", sweep->get_option("--q"), sw_q);
    set_if("q_ratio", sweep->get_option("--q-ratio"), sw_q_ratio);
    if (sw_across) cfg["permute_across"] = true;
    set_if("edges1", sweep->get_option("--edges1"), sw_edges1);
    set_if("labels1", sweep->get_option("--labels1"), sw_labels1);
    set_if("edges2", sweep->get_option("--edges2"), sw_edges2);
    set_if("labels2", sweep->get_option("--labels2"), sw_labels2);
    set_if("alpha_list", sweep->get_option("--alpha"), sw_alpha);
    set_if("kprime", sweep->get_option("--kprime"), sw_kprime);
    set_if("ell", sweep->get_option("--ell"), sw_ell);
    set_if("route", sweep->get_option("--route"), sw_route);
    set_if("refine_mode", sweep->get_option("--refine-mode"), sw_refine);
    set_if("seed_mode", sweep->get_option("--seed-mode"), sw_seed_mode);
    if (!sw_log_degree.empty()) cfg["log_degree"] = sw_log_degree == "on";
    if (sw_estimates) cfg["use_true_params"] = false;
    set_if("repetitions", sweep->get_option("--repetitions"), sw_reps);
    if (sw_no_timing) cfg["record_timing"] = false;
    set_if("num_workers", sweep->get_option("--workers"), sw_workers);
    cfg["master_seed"] = sweep_seed;

    const csbm_status st = csbm_run_experiment(cfg.dump().c_str(), sweep_out.c_str());
    if (st != CSBM_OK) return fail(st);
    std::cout << "wrote " << sweep_out << "\n";
    return 0;
  }

  return cmd_estimate(est_edges, est_labels, est_log);
}
