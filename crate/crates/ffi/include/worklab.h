#ifndef WORKLAB_H
#define WORKLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Smallest grid for which brute-force estimates are certified.
#define WL_CERTIFIED_GRID 24

typedef enum WlStatus {
  WL_STATUS_OK = 0,
  WL_STATUS_NULL_POINTER = 1,
  WL_STATUS_INVALID_ARGUMENT = 2,
  WL_STATUS_DIMENSION_MISMATCH = 3,
  WL_STATUS_TOO_LARGE = 4,
  WL_STATUS_INVALID_GRAPH = 5,
  WL_STATUS_INCOMPATIBLE = 6,
  WL_STATUS_NUMERICAL = 7,
  WL_STATUS_PANIC = 8,
} WlStatus;

typedef enum WlCertification {
  WL_CERTIFICATION_BRUTEFORCE_CERTIFIED = 0,
  WL_CERTIFICATION_SCHMIDT_EXACT = 1,
  WL_CERTIFICATION_HEURISTIC_LOCAL_MAX = 2,
} WlCertification;

typedef enum WlProtocol {
  // No measurement: `W_Λ = W_local`.
  WL_PROTOCOL_NULL = 0,
  // Null protocol followed by a rank-one refinement round.
  WL_PROTOCOL_NULL_REFINED = 1,
  // Computational basis on every qubit.
  WL_PROTOCOL_SUBSET = 2,
  // Greedy independent set of the supplied graph.
  WL_PROTOCOL_INDEPENDENT_SET = 3,
} WlProtocol;

typedef enum WlLattice {
  WL_LATTICE_CYCLE = 0,
  WL_LATTICE_SQUARE_TORUS = 1,
  WL_LATTICE_TRIANGULAR_TORUS = 2,
  WL_LATTICE_HEXAGONAL = 3,
} WlLattice;

// Opaque simple undirected graph.
typedef struct WlGraph WlGraph;

// Opaque pure state.
typedef struct WlState WlState;

// `E_g` result. Values in nats.
typedef struct WlEg {
  double value;
  // `N ln d − E_g`, clamped at zero.
  double w_locc_upper;
  enum WlCertification certification;
} WlEg;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *wl_last_error(void);

// State from `dim = local_dim^num_sites` amplitudes, little-endian site
// order. `im` may be null for real amplitudes. The vector is normalized.
//
// # Safety
// `re` (and `im` if non-null) must point to `len` readable doubles; `out`
// must be writable.
enum WlStatus wl_state_from_amplitudes(const double *re,
                                       const double *im,
                                       size_t len,
                                       size_t num_sites,
                                       size_t local_dim,
                                       struct WlState **out);

// Haar-random state of `n` sites of dimension `d`.
//
// # Safety
// `out` must be writable.
enum WlStatus wl_state_haar(size_t n, size_t d, uint64_t seed, struct WlState **out);

// `(|0…0⟩ + … + |d−1…d−1⟩)/√d`.
//
// # Safety
// `out` must be writable.
enum WlStatus wl_state_ghz(size_t n, size_t d, struct WlState **out);

// Qubit W state.
//
// # Safety
// `out` must be writable.
enum WlStatus wl_state_w(size_t n, struct WlState **out);

// Graph state of `graph`; the graph handle is not consumed.
//
// # Safety
// `graph` must be a live handle or null; `out` must be writable.
enum WlStatus wl_state_graph(const struct WlGraph *graph, struct WlState **out);

// # Safety
// `state` must be null or a handle not yet freed.
void wl_state_free(struct WlState *state);

// Number of sites, or 0 for a null handle.
//
// # Safety
// `state` must be null or a live handle.
size_t wl_state_num_sites(const struct WlState *state);

// Hilbert-space dimension, or 0 for a null handle.
//
// # Safety
// `state` must be null or a live handle.
size_t wl_state_dim(const struct WlState *state);

// `N ln d`.
//
// # Safety
// `state` must be null or a live handle; `out` must be writable.
enum WlStatus wl_w_global(const struct WlState *state, double *out);

// `N ln d − Σ S(ρ_n)`.
//
// # Safety
// `state` must be null or a live handle; `out` must be writable.
enum WlStatus wl_w_local(const struct WlState *state, double *out);

// Geometric entanglement by alternating optimization over `restarts`
// random starts. Never certified.
//
// # Safety
// `state` must be null or a live handle; `out` must be writable.
enum WlStatus wl_eg_alternating(const struct WlState *state,
                                size_t restarts,
                                uint64_t seed,
                                struct WlEg *out);

// Grid search for qubit states with `N ≤ 4`. Grids of
// `WL_CERTIFIED_GRID` points per axis or more are certified.
//
// # Safety
// `state` must be null or a live handle; `out` must be writable.
enum WlStatus wl_eg_bruteforce(const struct WlState *state, size_t grid, struct WlEg *out);

// `W_Λ` of a built-in protocol. `graph` is required for
// `WlProtocol::IndependentSet` and ignored otherwise.
//
// # Safety
// `state` and `graph` must be null or live handles; `out` must be writable.
enum WlStatus wl_protocol_work(const struct WlState *state,
                               enum WlProtocol protocol,
                               const struct WlGraph *graph,
                               double *out);

// Graph from `num_edges` vertex pairs stored flat in `edges`.
//
// # Safety
// `edges` must point to `2 * num_edges` readable values (or be null when
// `num_edges` is 0); `out` must be writable.
enum WlStatus wl_graph_from_edges(size_t num_vertices,
                                  const size_t *edges,
                                  size_t num_edges,
                                  struct WlGraph **out);

// Periodic lattice. `cols` is ignored for a cycle of `rows` vertices.
//
// # Safety
// `out` must be writable.
enum WlStatus wl_graph_lattice(enum WlLattice kind, size_t rows, size_t cols, struct WlGraph **out);

// Connected random graph on `n` vertices.
//
// # Safety
// `out` must be writable.
enum WlStatus wl_graph_random(size_t n, uint64_t seed, struct WlGraph **out);

// # Safety
// `graph` must be null or a handle not yet freed.
void wl_graph_free(struct WlGraph *graph);

// # Safety
// `graph` must be null or a live handle.
size_t wl_graph_num_vertices(const struct WlGraph *graph);

// # Safety
// `graph` must be null or a live handle.
size_t wl_graph_num_edges(const struct WlGraph *graph);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WORKLAB_H */
