#ifndef SEEDMATCH_H
#define SEEDMATCH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

#define SM_OK 0

/**
 * A required pointer argument was null.
 */
#define SM_ERR_NULL 1

/**
 * A vertex index was out of range.
 */
#define SM_ERR_RANGE 2

/**
 * A parameter lies outside its domain.
 */
#define SM_ERR_DOMAIN 3

#define SM_ERR_MAPPING 4

#define SM_ERR_IO 5

#define SM_ERR_PARSE 6

/**
 * Malformed argument, such as an unknown algorithm name or non-UTF-8 text.
 */
#define SM_ERR_USAGE 7

/**
 * A Rust panic was caught at the boundary.
 */
#define SM_ERR_PANIC 8

/**
 * Witness counting routes for [`sm_witness_count`].
 */
#define SM_WITNESS_AUTO 0

#define SM_WITNESS_SCATTER 1

#define SM_WITNESS_BITSET 2

#define SM_WITNESS_EXPLORE 3

typedef struct SmGraph SmGraph;

typedef struct SmInstance SmInstance;

typedef struct SmMapping SmMapping;

typedef struct SmWitness SmWitness;

/**
 * Thresholds and bound quantities for one parameter point. Quantities that
 * are undefined at the point are NaN.
 */
typedef struct SmBounds {
  double epsilon;
  double psi_max;
  double tau;
  double x_min_1hop;
  double y_min_1hop;
  double l_min;
  double m_min;
  double delta_1;
  double x_max_2hop;
  double y_max_2hop;
  double z_max;
  double beta_req_1hop;
  double beta_req_2hop;
  double beta_req_1hop_prior;
  double beta_req_noisy_seeds;
  bool vacuous_1hop;
  bool vacuous_2hop;
  bool noisy_seeds_window;
  bool epsilon_small;
} SmBounds;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *sm_last_error(void);

/**
 * Graph on `n` vertices from `edge_count` pairs stored flat in `edges`.
 * Self-loops and repeated edges are dropped.
 *
 * # Safety
 * `edges` must point to `2 * edge_count` readable values (it may be null
 * when `edge_count` is 0). `out` must be writable.
 */
int sm_graph_new(uintptr_t n, const uint32_t *edges, uintptr_t edge_count, struct SmGraph **out);

/**
 * Reads a whitespace-separated edge list. Vertex ids are assigned in order
 * of first appearance.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
int sm_graph_load(const char *path, struct SmGraph **out);

/**
 * # Safety
 * `g` must be a live graph handle or null.
 */
uintptr_t sm_graph_vertex_count(const struct SmGraph *g);

/**
 * # Safety
 * `g` must be a live graph handle or null.
 */
uintptr_t sm_graph_edge_count(const struct SmGraph *g);

/**
 * # Safety
 * `g` must come from `sm_graph_new` or `sm_graph_load` and not be freed
 * twice. Graphs borrowed from an instance must not be passed here.
 */
void sm_graph_free(struct SmGraph *g);

/**
 * Partial injective map from `0..len` into `0..codomain_size`; a negative
 * image leaves the vertex unmapped.
 *
 * # Safety
 * `images` must point to `len` readable values (or be null when `len` is 0).
 */
int sm_mapping_new(const int64_t *images,
                   uintptr_t len,
                   uintptr_t codomain_size,
                   struct SmMapping **out);

/**
 * # Safety
 * `m` must be a live mapping handle or null.
 */
uintptr_t sm_mapping_len(const struct SmMapping *m);

/**
 * # Safety
 * `m` must be a live mapping handle or null.
 */
uintptr_t sm_mapping_defined_count(const struct SmMapping *m);

/**
 * Image of `u`, or -1 when `u` is unmapped.
 *
 * # Safety
 * `m` must be a live mapping handle and `out` writable.
 */
int sm_mapping_get(const struct SmMapping *m, uintptr_t u, int64_t *out);

/**
 * # Safety
 * `m` must come from this library, be owned by the caller and not be freed
 * twice.
 */
void sm_mapping_free(struct SmMapping *m);

/**
 * Samples a correlated pair with its hidden alignment and seeds. The same
 * arguments always give the same instance.
 *
 * # Safety
 * `out` must be writable.
 */
int sm_instance_new(uintptr_t n,
                    double p,
                    double s,
                    double beta,
                    uint64_t trial_id,
                    struct SmInstance **out);

/**
 * Borrowed; valid while the instance lives.
 *
 * # Safety
 * `inst` must be a live instance handle or null.
 */
const struct SmGraph *sm_instance_g1(const struct SmInstance *inst);

/**
 * # Safety
 * As for [`sm_instance_g1`].
 */
const struct SmGraph *sm_instance_g2(const struct SmInstance *inst);

/**
 * # Safety
 * As for [`sm_instance_g1`].
 */
const struct SmMapping *sm_instance_truth(const struct SmInstance *inst);

/**
 * # Safety
 * As for [`sm_instance_g1`].
 */
const struct SmMapping *sm_instance_seeds(const struct SmInstance *inst);

/**
 * # Safety
 * `inst` must come from `sm_instance_new` and not be freed twice.
 */
void sm_instance_free(struct SmInstance *inst);

/**
 * j-hop witness counts between every vertex of `g1` and every vertex of `g2`.
 * `method` is one of the `SM_WITNESS_*` constants.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
int sm_witness_count(const struct SmGraph *g1,
                     const struct SmGraph *g2,
                     const struct SmMapping *seeds,
                     uintptr_t j,
                     int method,
                     struct SmWitness **out);

/**
 * # Safety
 * `w` must be a live witness handle and `out` writable.
 */
int sm_witness_get(const struct SmWitness *w, uintptr_t u, uintptr_t v, uint32_t *out);

/**
 * # Safety
 * `w` must come from `sm_witness_count` and not be freed twice.
 */
void sm_witness_free(struct SmWitness *w);

/**
 * Greedy maximal matching on witness counts, heaviest pairs first.
 *
 * # Safety
 * `w` must be a live witness handle and `out` writable.
 */
int sm_gmwm(const struct SmWitness *w, struct SmMapping **out);

/**
 * Runs `algorithm` (`one_hop`, `two_hop`, `j_hop:J`, `noisy_seeds:R`,
 * `parallel_argmax[:J]`) for `iterations + 1` rounds. `failure` may be null;
 * otherwise it receives the column-collision flag of the last round.
 *
 * # Safety
 * Handles must be live, `algorithm` NUL-terminated and `out` writable.
 */
int sm_match(const struct SmGraph *g1,
             const struct SmGraph *g2,
             const struct SmMapping *seeds,
             const char *algorithm,
             uintptr_t iterations,
             struct SmMapping **out,
             bool *failure);

/**
 * Fraction of `truth`'s domain that `mapping` sends to the true image.
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
int sm_accuracy(const struct SmMapping *mapping, const struct SmMapping *truth, double *out);

/**
 * # Safety
 * `out` must be writable.
 */
int sm_bounds(uintptr_t n, double p, double s, double beta, struct SmBounds *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEEDMATCH_H */
