#ifndef EITMEM_H
#define EITMEM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EitmemStatus {
  EITMEM_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  EITMEM_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  EITMEM_STATUS_INVALID_UTF8 = 2,
  /**
   * Bad config, unknown key/preset/parameter or violated invariant.
   */
  EITMEM_STATUS_CONFIG = 3,
  /**
   * Numerical abort (step too large, non-finite values).
   */
  EITMEM_STATUS_NUMERICAL = 4,
  /**
   * File-system or serialization failure.
   */
  EITMEM_STATUS_IO = 5,
  /**
   * A metric could not be computed.
   */
  EITMEM_STATUS_METRIC = 6,
  /**
   * A Rust panic was caught at the boundary.
   */
  EITMEM_STATUS_PANIC = 7,
} EitmemStatus;

/**
 * Opaque handle to the in-memory result of a simulation.
 */
typedef struct EitmemRun EitmemRun;

/**
 * Opaque scenario handle.
 */
typedef struct EitmemScenario EitmemScenario;

/**
 * Scalar metrics of one run. `has_*` flags mark which optional values are set.
 */
typedef struct EitmemMetrics {
  double eta_ch1;
  double eta_ch2;
  double visibility;
  double crosstalk_db;
  double correlation;
  uint64_t camera_total_counts;
  double camera_pgm_scale;
  bool has_visibility;
  bool has_crosstalk_db;
  bool has_correlation;
} EitmemMetrics;

/**
 * Energy bookkeeping of one channel, in photons.
 */
typedef struct EitmemLedger {
  double input;
  double leaked;
  double retrieved;
  double absorbed;
  double residual;
} EitmemLedger;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failing call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *eitmem_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *eitmem_version(void);

/**
 * Loads a scenario from an INI config file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum EitmemStatus eitmem_scenario_load(const char *path, struct EitmemScenario **out);

/**
 * Parses a scenario from INI text.
 *
 * # Safety
 * `config` must be a NUL-terminated string; `out` must be writable.
 */
enum EitmemStatus eitmem_scenario_parse(const char *config, struct EitmemScenario **out);

/**
 * Loads a bundled preset by name.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
enum EitmemStatus eitmem_scenario_preset(const char *name, struct EitmemScenario **out);

/**
 * Sets the numeric parameter `path` (e.g. `control.write_angle_deg`) in place.
 * On failure the scenario is left unchanged.
 *
 * # Safety
 * `s` must be a live scenario handle; `path` a NUL-terminated string.
 */
enum EitmemStatus eitmem_scenario_set(struct EitmemScenario *s, const char *path, double value);

/**
 * Renders the scenario as INI text. The returned string must be released
 * with [`eitmem_string_free`].
 *
 * # Safety
 * `s` must be a live scenario handle; `out` must be writable.
 */
enum EitmemStatus eitmem_scenario_to_ini(const struct EitmemScenario *s, char **out);

/**
 * # Safety
 * `s` must be null or a handle not yet freed.
 */
void eitmem_scenario_free(struct EitmemScenario *s);

/**
 * # Safety
 * `p` must be null or a string returned by this library and not yet freed.
 */
void eitmem_string_free(char *p);

/**
 * Simulates the scenario in memory.
 *
 * # Safety
 * `s` must be a live scenario handle; `out` must be writable.
 */
enum EitmemStatus eitmem_simulate(const struct EitmemScenario *s, struct EitmemRun **out);

/**
 * Simulates the scenario and writes all artifacts into `out_dir`. `out`
 * may be null if the in-memory result is not needed.
 *
 * # Safety
 * `s` must be a live scenario handle; `out_dir` a NUL-terminated string;
 * `out` null or writable.
 */
enum EitmemStatus eitmem_run(const struct EitmemScenario *s,
                             const char *out_dir,
                             struct EitmemRun **out);

/**
 * # Safety
 * `r` must be a live run handle; `out` must be writable.
 */
enum EitmemStatus eitmem_run_metrics(const struct EitmemRun *r, struct EitmemMetrics *out);

/**
 * Energy ledger of channel 1 or 2.
 *
 * # Safety
 * `r` must be a live run handle; `out` must be writable.
 */
enum EitmemStatus eitmem_run_ledger(const struct EitmemRun *r,
                                    uint32_t channel_index,
                                    struct EitmemLedger *out);

/**
 * Grid size of the run's images.
 *
 * # Safety
 * `r` must be a live run handle; `nx`, `ny` must be writable.
 */
enum EitmemStatus eitmem_run_image_shape(const struct EitmemRun *r, size_t *nx, size_t *ny);

/**
 * Copies the noiseless retrieved camera image of a channel into `buf`
 * (row-major over (x, y), `len` = nx·ny).
 *
 * # Safety
 * `r` must be a live run handle; `buf` must hold `len` doubles.
 */
enum EitmemStatus eitmem_run_image(const struct EitmemRun *r,
                                   uint32_t channel_index,
                                   double *buf,
                                   size_t len);

/**
 * # Safety
 * `r` must be null or a handle not yet freed.
 */
void eitmem_run_free(struct EitmemRun *r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EITMEM_H */
