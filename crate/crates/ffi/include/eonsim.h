#ifndef EONSIM_H
#define EONSIM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EonsimStatus {
  EONSIM_STATUS_OK = 0,
  EONSIM_STATUS_NULL_POINTER = 1,
  EONSIM_STATUS_INVALID_ARGUMENT = 2,
  EONSIM_STATUS_TOPOLOGY = 3,
  EONSIM_STATUS_SIMULATION = 4,
  EONSIM_STATUS_PANIC = 5,
} EonsimStatus;

/**
 * Opaque network handle: topology plus precomputed k-shortest paths.
 */
typedef struct EonsimNetwork EonsimNetwork;

/**
 * Timing constants in microseconds; mirrors the simulator defaults when
 * obtained from [`eonsim_timing_default`].
 */
typedef struct EonsimTiming {
  double failure_detection_us;
  double processing_us;
  double setup_us;
  double propagation_us_per_km;
  double span_km;
} EonsimTiming;

/**
 * Scalar results of one simulation run.
 */
typedef struct EonsimMetrics {
  uint64_t requests;
  uint64_t accepted;
  uint64_t blocked;
  uint64_t static_lightpaths;
  double bbr;
  double mean_st_us;
  double mean_expected_pst_us;
  double mean_unavailability_us;
  double mean_optimum_us;
  double overhead_pct;
} EonsimMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *eonsim_last_error(void);

struct EonsimTiming eonsim_timing_default(void);

/**
 * Builds a network from topology JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum EonsimStatus eonsim_network_from_json(const char *json,
                                           uint32_t k,
                                           struct EonsimNetwork **out);

/**
 * Builds a network from a bundled topology (`usanet` or `paneuro`).
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a writable pointer.
 */
enum EonsimStatus eonsim_network_bundled(const char *name, uint32_t k, struct EonsimNetwork **out);

/**
 * Releases a handle; null is ignored.
 *
 * # Safety
 * `net` must come from an `eonsim_network_*` constructor and not be used afterwards.
 */
void eonsim_network_free(struct EonsimNetwork *net);

/**
 * Node count, or 0 for a null handle.
 *
 * # Safety
 * `net` must be null or a live handle.
 */
size_t eonsim_network_node_count(const struct EonsimNetwork *net);

/**
 * Link count, or 0 for a null handle.
 *
 * # Safety
 * `net` must be null or a live handle.
 */
size_t eonsim_network_link_count(const struct EonsimNetwork *net);

/**
 * Runs one replication of `algorithm` (for example `preprovDLP-provDPP`).
 *
 * # Safety
 * `net` must be a live handle, `algorithm` a NUL-terminated string and
 * `out` a writable pointer.
 */
enum EonsimStatus eonsim_run(const struct EonsimNetwork *net,
                             const char *algorithm,
                             double preprov_bw,
                             double load,
                             uint64_t requests,
                             uint64_t seed,
                             struct EonsimMetrics *out);

/**
 * Setup time of a new path from its per-hop lengths in km. A null
 * `timing` selects the defaults.
 *
 * # Safety
 * `hops_km` must point to `n` doubles; `out` must be writable.
 */
enum EonsimStatus eonsim_st_primary(const double *hops_km,
                                    size_t n,
                                    const struct EonsimTiming *timing_params,
                                    double *out);

/**
 * Switching time of dedicated path protection when hop `failed_hop`
 * (0-based) of the primary fails.
 *
 * # Safety
 * `primary_km` must point to `n` doubles, `backup_km` to `m`; `out` must be writable.
 */
enum EonsimStatus eonsim_pst_dpp(const double *primary_km,
                                 size_t n,
                                 const double *backup_km,
                                 size_t m,
                                 size_t failed_hop,
                                 const struct EonsimTiming *timing_params,
                                 double *out);

/**
 * Switching time of dedicated link protection over a detour of `m` hops.
 *
 * # Safety
 * `backup_km` must point to `m` doubles; `out` must be writable.
 */
enum EonsimStatus eonsim_pst_dlp(const double *backup_km,
                                 size_t m,
                                 const struct EonsimTiming *timing_params,
                                 double *out);

/**
 * Switching time of shared protection over a p-cycle arc.
 *
 * # Safety
 * `primary_km` must point to `n` doubles, `arc_km` to `m`; `out` must be writable.
 */
enum EonsimStatus eonsim_pst_spp(const double *primary_km,
                                 size_t n,
                                 const double *arc_km,
                                 size_t m,
                                 size_t failed_hop,
                                 const struct EonsimTiming *timing_params,
                                 double *out);

/**
 * Name of the algorithm at `index` as accepted by [`eonsim_run`], or null
 * past the end.
 */
const char *eonsim_algorithm_name(size_t index);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EONSIM_H */
