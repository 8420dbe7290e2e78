/* C API for the correlated-SBM graph matching library.
 *
 * All objects are opaque handles freed with their matching *_free function.
 * Functions return CSBM_OK (0) on success; on failure the returned status
 * classifies the error and csbm_last_error() holds a thread-local message.
 */
#ifndef CSBM_CSBM_H
#define CSBM_CSBM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef int csbm_status;

#define CSBM_OK 0
#define CSBM_ERR_ARGUMENT 1 /* bad argument or model parameter */
#define CSBM_ERR_CONFIG 2   /* invalid configuration */
#define CSBM_ERR_DATA 3     /* unreadable or malformed data files */
#define CSBM_ERR_INTERNAL 4

typedef struct csbm_graph csbm_graph;   /* graph + community partition */
typedef struct csbm_result csbm_result; /* pipeline output */

const char* csbm_version(void);

/* Message for the most recent failure on this thread. */
const char* csbm_last_error(void);

/* ---- graphs ---- */

/* Edge file: "u v" per line; label file: "id label" per line. */
csbm_status csbm_graph_load(const char* edge_path, const char* label_path, csbm_graph** out);
csbm_status csbm_graph_save(const csbm_graph* g, const char* edge_path, const char* label_path);
void csbm_graph_free(csbm_graph* g);

int64_t csbm_graph_vertex_count(const csbm_graph* g);
int64_t csbm_graph_edge_count(const csbm_graph* g);
int csbm_graph_community_count(const csbm_graph* g);

/* ---- synthetic pairs ---- */

typedef struct {
  int64_t n;
  int k;              /* balanced communities */
  double p;           /* intra-community child density */
  double q;           /* inter-community child density */
  double alpha;       /* subsampling noise in [0, 1) */
  int permute_across; /* nonzero: hidden permutation ignores communities */
  uint64_t seed;
} csbm_generate_params;

/* Samples a correlated pair. truth (length n, may be NULL) receives the
 * hidden permutation: vertex u of *g2 corresponds to truth[u] of *g1. */
csbm_status csbm_generate_pair(const csbm_generate_params* params, csbm_graph** g1,
                               csbm_graph** g2, int64_t* truth);

/* ---- matching ---- */

/* options_json: JSON object with any of
 *   kprime, ell            (integers; 0 = formula defaults)
 *   route                  ("threshold" | "lap")
 *   refine_mode            ("lap" | "threshold")
 *   refine_rounds          (integer)
 *   epsilon_refine, w, threshold_slack
 *   seed_mode              ("greedy" | "theory")
 *   log_degree             (bool)
 *   use_true_params        (bool; requires p and q)
 *   p, q                   (true model densities when use_true_params)
 *   seed                   (integer)
 *   num_workers            (integer)
 * truth: length-n ground truth as in csbm_generate_pair, or NULL. */
csbm_status csbm_match(const csbm_graph* g1, const csbm_graph* g2, const char* options_json,
                       const int64_t* truth, csbm_result** out);

int csbm_result_stage_count(const csbm_result* r);
const char* csbm_result_stage_name(const csbm_result* r, int idx);
/* Negative when no ground truth was supplied. */
double csbm_result_stage_accuracy(const csbm_result* r, int idx);
double csbm_result_stage_seconds(const csbm_result* r, int idx);
double csbm_result_overall_accuracy(const csbm_result* r);
/* Writes the recovered permutation (g2 vertex -> g1 vertex) into buf. */
csbm_status csbm_result_permutation(const csbm_result* r, int64_t* buf, int64_t len);
void csbm_result_free(csbm_result* r);

/* ---- parameter estimation ---- */

/* JSON with per-community p_hat, the q_hat matrix, center and variance.
 * Free with csbm_string_free. */
csbm_status csbm_estimate_json(const csbm_graph* g, int log_degree, char** json_out);
void csbm_string_free(char* s);

/* ---- experiment harness ---- */

/* config_json mirrors the sweep configuration (see README); writes one CSV. */
csbm_status csbm_run_experiment(const char* config_json, const char* csv_path);

#ifdef __cplusplus
}
#endif

#endif /* CSBM_CSBM_H */
