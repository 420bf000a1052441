#ifndef LTE_SCHED_H
#define LTE_SCHED_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stdint.h>

typedef enum LteStatus {
  LTE_STATUS_OK = 0,
  LTE_STATUS_NULL_POINTER = 1,
  LTE_STATUS_INVALID_UTF8 = 2,
  // Unreadable config file, unknown key or invalid value.
  LTE_STATUS_CONFIG = 3,
  // Trace or other output failure.
  LTE_STATUS_IO = 4,
  // The simulation has already reached `sim_ttis`.
  LTE_STATUS_FINISHED = 5,
  LTE_STATUS_PANIC = 6,
} LteStatus;

// Simulation parameters.
typedef struct LteConfig LteConfig;

// Kalman SINR predictor for a single (user, PRB) link.
typedef struct LtePredictor LtePredictor;

// One simulation run.
typedef struct LteSim LteSim;

// Result row of a run.
typedef struct LteSummary {
  double throughput_bps;
  double plr_ratio;
  uint64_t n_users;
  uint64_t seed;
  uint64_t sim_ttis;
  uint64_t ttis_done;
} LteSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Most recent error message on this thread, or null. Valid until the next
// call into this library from the same thread.
const char *lte_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *lte_version(void);

// Default configuration.
//
// # Safety
// `out` must be a valid pointer to writable storage.
enum LteStatus lte_config_new(struct LteConfig **out);

// Defaults overlaid with a `key = value` file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` writable.
enum LteStatus lte_config_load(const char *path, struct LteConfig **out);

// Sets one key, with the same syntax as a config file line.
//
// # Safety
// `config` must come from `lte_config_new` or `lte_config_load`; `key` and
// `value` must be NUL-terminated strings.
enum LteStatus lte_config_set(struct LteConfig *config, const char *key, const char *value);

// Checks every field; reports the first invalid one.
//
// # Safety
// `config` must be a live handle.
enum LteStatus lte_config_validate(const struct LteConfig *config);

// # Safety
// `config` must be a live handle or null; it is invalid afterwards.
void lte_config_free(struct LteConfig *config);

// Starts a run from a copy of `config`.
//
// # Safety
// `config` must be a live handle and `out` writable.
enum LteStatus lte_sim_new(const struct LteConfig *config, struct LteSim **out);

// Advances one TTI. Returns `LTE_STATUS_FINISHED` once the run is over.
//
// # Safety
// `sim` must be a live handle.
enum LteStatus lte_sim_step(struct LteSim *sim);

// Runs the remaining TTIs.
//
// # Safety
// `sim` must be a live handle.
enum LteStatus lte_sim_run(struct LteSim *sim);

// Metrics so far.
//
// # Safety
// `sim` must be a live handle and `out` writable.
enum LteStatus lte_sim_summary(const struct LteSim *sim, struct LteSummary *out);

// # Safety
// `sim` must be a live handle or null; it is invalid afterwards.
void lte_sim_free(struct LteSim *sim);

// Predictor using the Kalman settings of `config`, or the defaults when
// `config` is null.
//
// # Safety
// `config` must be a live handle or null; `out` must be writable.
enum LteStatus lte_predictor_new(const struct LteConfig *config, struct LtePredictor **out);

// Feeds one TTI. `has_report` false means the report is missing or
// blanked. On success `*valid` tells whether `*estimate_db` holds an
// estimate; it is false until the first report arrives.
//
// # Safety
// `predictor` must be a live handle; `estimate_db` and `valid` writable.
enum LteStatus lte_predictor_estimate(struct LtePredictor *predictor,
                                      bool has_report,
                                      double report_db,
                                      uint32_t delay_ttis,
                                      double *estimate_db,
                                      bool *valid);

// # Safety
// `predictor` must be a live handle or null; it is invalid afterwards.
void lte_predictor_free(struct LtePredictor *predictor);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* LTE_SCHED_H */
