#include "csbm/csbm.h"

#include <cstring>
#include <new>
#include <string>

#include <json.hpp>

#include "csbm/harness.hpp"
#include "csbm/matcher.hpp"
#include "csbm/sbm.hpp"

using nlohmann::json;

struct csbm_graph {
  csbm::Graph graph;
  csbm::CommunityPartition part;
};

struct csbm_result {
  csbm::MatchResult result;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

// Bad values inside an options/config JSON document, as opposed to a bad
// call argument.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Runs fn, translating C++ exceptions into status codes.
template <typename Fn>
csbm_status guarded(Fn&& fn) {
  try {
    fn();
    return CSBM_OK;
  } catch (const csbm::DataError& e) {
    set_error(e.what());
    return CSBM_ERR_DATA;
  } catch (const ConfigError& e) {
    set_error(e.what());
    return CSBM_ERR_CONFIG;
  } catch (const std::invalid_argument& e) {
    set_error(e.what());
    return CSBM_ERR_ARGUMENT;
  } catch (const json::exception& e) {
    set_error(e.what());
    return CSBM_ERR_CONFIG;
  } catch (const std::bad_alloc&) {
    set_error("out of memory");
    return CSBM_ERR_INTERNAL;
  } catch (const std::exception& e) {
    set_error(e.what());
    return CSBM_ERR_INTERNAL;
  }
}

csbm::MatchHyper parse_match_options(const json& j) {
  csbm::MatchHyper h;
  h.w = j.value("w", 0L);
  h.threshold_slack = j.value("threshold_slack", 0.0);
  h.epsilon_refine = j.value("epsilon_refine", 0.3);
  h.refine_rounds = j.value("refine_rounds", 2);
  const std::string route = j.value("route", "threshold");
  if (route == "lap")
    h.route = csbm::Stage1Route::lap_similarity;
  else if (route == "threshold")
    h.route = csbm::Stage1Route::thresholded;
  else
    throw ConfigError("options: route must be 'threshold' or 'lap'");
  const std::string refine = j.value("refine_mode", "lap");
  if (refine == "lap")
    h.refine_mode = csbm::RefineMode::lap;
  else if (refine == "threshold")
    h.refine_mode = csbm::RefineMode::threshold;
  else
    throw ConfigError("options: refine_mode must be 'lap' or 'threshold'");
  const std::string seed_mode = j.value("seed_mode", "greedy");
  if (seed_mode == "greedy")
    h.seed_mode = csbm::SeedMode::greedy;
  else if (seed_mode == "theory")
    h.seed_mode = csbm::SeedMode::theory;
  else
    throw ConfigError("options: seed_mode must be 'greedy' or 'theory'");
  h.seed = j.value("seed", std::uint64_t{0});
  h.num_workers = j.value("num_workers", 0);
  return h;
}

}  // namespace

extern "C" {

const char* csbm_version(void) { return "1.0.0"; }

const char* csbm_last_error(void) { return g_last_error.c_str(); }

csbm_status csbm_graph_load(const char* edge_path, const char* label_path, csbm_graph** out) {
  if (!edge_path || !label_path || !out) {
    set_error("null argument");
    return CSBM_ERR_ARGUMENT;
  }
  return guarded([&] {
    auto loaded = csbm::load_graph(edge_path, label_path);
    *out = new csbm_graph{std::move(loaded.graph), std::move(loaded.part)};
  });
}

csbm_status csbm_graph_save(const csbm_graph* g, const char* edge_path, const char* label_path) {
  if (!g || !edge_path || !label_path) {
    set_error("null argument");
    return CSBM_ERR_ARGUMENT;
  }
  return guarded([&] { csbm::save_graph(g->graph, g->part, edge_path, label_path); });
}

void csbm_graph_free(csbm_graph* g) { delete g; }

int64_t csbm_graph_vertex_count(const csbm_graph* g) { return g ? g->graph.num_vertices() : -1; }

int64_t csbm_graph_edge_count(const csbm_graph* g) { return g ? g->graph.num_edges() : -1; }

int csbm_graph_community_count(const csbm_graph* g) { return g ? g->part.num_communities() : -1; }

csbm_status csbm_generate_pair(const csbm_generate_params* params, csbm_graph** g1,
                               csbm_graph** g2, int64_t* truth) {
  if (!params || !g1 || !g2) {
    set_error("null argument");
    return CSBM_ERR_ARGUMENT;
  }
  return guarded([&] {
    const auto model = csbm::SbmParams::balanced(static_cast<int>(params->n), params->k,
                                                 params->p, params->q, params->alpha);
    auto pair = csbm::generate_correlated_pair(model, params->seed, params->permute_across != 0,
                                               /*keep_parent=*/false);
    if (truth)
      for (int u = 0; u < pair.truth.size(); ++u) truth[u] = pair.truth(u);
    *g1 = new csbm_graph{std::move(pair.g_pi), std::move(pair.part_pi)};
    *g2 = new csbm_graph{std::move(pair.g_prime), std::move(pair.part)};
  });
}

csbm_status csbm_match(const csbm_graph* g1, const csbm_graph* g2, const char* options_json,
                       const int64_t* truth, csbm_result** out) {
  if (!g1 || !g2 || !out) {
    set_error("null argument");
    return CSBM_ERR_ARGUMENT;
  }
  return guarded([&] {
    json j = json::object();
    if (options_json && options_json[0] != '\0') j = json::parse(options_json);
    if (!j.is_object()) throw ConfigError("options: expected a JSON object");

    const csbm::MatchHyper match = parse_match_options(j);
    const bool use_true = j.value("use_true_params", false);
    if (use_true && (!j.contains("p") || !j.contains("q")))
      throw ConfigError("options: use_true_params requires p and q");
    const auto hyper = csbm::build_signature_hyper(
        g1->graph, g1->part, g2->graph, g2->part, j.value("kprime", 0), j.value("ell", 0),
        j.value("log_degree", false), use_true, j.value("p", 0.0), j.value("q", 0.0));

    csbm::Permutation truth_perm;
    const csbm::Permutation* truth_ptr = nullptr;
    if (truth) {
      std::vector<int> forward(static_cast<std::size_t>(g2->graph.num_vertices()));
      for (std::size_t u = 0; u < forward.size(); ++u) forward[u] = static_cast<int>(truth[u]);
      truth_perm = csbm::Permutation(std::move(forward));
      truth_ptr = &truth_perm;
    }

    auto result =
        csbm::full_pipeline(g1->graph, g2->graph, g1->part, g2->part, hyper, match, truth_ptr);
    *out = new csbm_result{std::move(result)};
  });
}

int csbm_result_stage_count(const csbm_result* r) {
  return r ? static_cast<int>(r->result.stages.size()) : -1;
}

const char* csbm_result_stage_name(const csbm_result* r, int idx) {
  if (!r || idx < 0 || idx >= static_cast<int>(r->result.stages.size())) return nullptr;
  return r->result.stages[static_cast<std::size_t>(idx)].stage.c_str();
}

double csbm_result_stage_accuracy(const csbm_result* r, int idx) {
  if (!r || idx < 0 || idx >= static_cast<int>(r->result.stages.size())) return -1.0;
  return r->result.stages[static_cast<std::size_t>(idx)].accuracy;
}

double csbm_result_stage_seconds(const csbm_result* r, int idx) {
  if (!r || idx < 0 || idx >= static_cast<int>(r->result.stages.size())) return -1.0;
  return r->result.stages[static_cast<std::size_t>(idx)].seconds;
}

double csbm_result_overall_accuracy(const csbm_result* r) {
  return r ? r->result.overall_accuracy : -1.0;
}

csbm_status csbm_result_permutation(const csbm_result* r, int64_t* buf, int64_t len) {
  if (!r || !buf) {
    set_error("null argument");
    return CSBM_ERR_ARGUMENT;
  }
  if (len < r->result.overall.size()) {
    set_error("buffer too small for the permutation");
    return CSBM_ERR_ARGUMENT;
  }
  for (int u = 0; u < r->result.overall.size(); ++u) buf[u] = r->result.overall(u);
  return CSBM_OK;
}

void csbm_result_free(csbm_result* r) { delete r; }

csbm_status csbm_estimate_json(const csbm_graph* g, int log_degree, char** json_out) {
  if (!g || !json_out) {
    set_error("null argument");
    return CSBM_ERR_ARGUMENT;
  }
  return guarded([&] {
    const auto est = csbm::estimate_params(g->graph, g->part, log_degree != 0);
    json j;
    j["p_hat"] = est.p_hat;
    j["q_hat"] = est.q_hat;
    j["center"] = est.center;
    j["variance"] = est.variance;
    const std::string text = j.dump(2);
    char* buf = new char[text.size() + 1];
    std::memcpy(buf, text.c_str(), text.size() + 1);
    *json_out = buf;
  });
}

void csbm_string_free(char* s) { delete[] s; }

csbm_status csbm_run_experiment(const char* config_json, const char* csv_path) {
  if (!config_json || !csv_path) {
    set_error("null argument");
    return CSBM_ERR_ARGUMENT;
  }
  const csbm_status st = guarded([&] {
    auto cfg = csbm::ExperimentConfig::from_json(config_json);
    cfg.validate();
    const auto rows = csbm::run_experiment(cfg);
    csbm::write_csv(rows, csv_path);
  });
  // Bad configuration surfaces as invalid_argument inside the harness.
  return st == CSBM_ERR_ARGUMENT ? CSBM_ERR_CONFIG : st;
}

}  // extern "C"
