/* C interface to the rwndqsim engine: opaque simulation handles, integer
 * status codes, and string getters for the emitted artifacts. All strings
 * returned by getters are owned by the handle and stay valid until
 * rwndq_sim_destroy. The handle is not thread-safe; distinct handles are
 * independent and may be used from different threads. */

#ifndef RWNDQ_RWNDQ_C_H
#define RWNDQ_RWNDQ_C_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct rwndq_sim rwndq_sim;

/* Status codes double as CLI exit codes. */
typedef enum rwndq_status {
    RWNDQ_OK = 0,
    RWNDQ_ERR_ARG = 1,      /* null handle / bad argument */
    RWNDQ_ERR_CONFIG = 2,   /* config failed to parse or validate */
    RWNDQ_ERR_DEADLOCK = 3, /* simulation finished with zero completions */
    RWNDQ_ERR_INTERNAL = 4, /* engine invariant violated */
    RWNDQ_ERR_STATE = 5,    /* call out of sequence (e.g. csv before run) */
} rwndq_status;

typedef enum rwndq_artifact {
    RWNDQ_CSV_FLOWS = 0,
    RWNDQ_CSV_PORTS = 1,
    RWNDQ_CSV_SUMMARY = 2,
    RWNDQ_RESOLVED_CONFIG = 3,
    RWNDQ_TRACE = 4,
} rwndq_artifact;

const char* rwndq_version(void);

/* Parses and validates a scenario JSON document. On success *out receives a
 * handle to destroy with rwndq_sim_destroy; on failure *out is NULL and
 * rwndq_last_error() describes the problem. */
rwndq_status rwndq_sim_create(const char* config_json, rwndq_sim** out);

void rwndq_sim_destroy(rwndq_sim* sim);

/* Overrides the seed from the config document. Call before rwndq_sim_run. */
rwndq_status rwndq_sim_set_seed(rwndq_sim* sim, uint64_t seed);

/* Enables the per-event trace dump (RWNDQ_TRACE artifact). */
rwndq_status rwndq_sim_set_trace(rwndq_sim* sim, int enabled);

/* Runs the scenario to completion. Artifacts are available afterwards even
 * for DEADLOCK / INTERNAL results (partial metrics). Run once per handle. */
rwndq_status rwndq_sim_run(rwndq_sim* sim);

/* Returns an artifact produced by the run (NULL before rwndq_sim_run,
 * except RWNDQ_RESOLVED_CONFIG which is available from creation). */
const char* rwndq_sim_artifact(const rwndq_sim* sim, rwndq_artifact which);

/* Looks up a numeric metric from summary.csv by name (e.g. "total_drops").
 * Returns RWNDQ_ERR_ARG when the metric is unknown or non-numeric. */
rwndq_status rwndq_sim_summary_value(const rwndq_sim* sim, const char* metric,
                                     double* out);

/* Message for the most recent failure on this thread. Never NULL. */
const char* rwndq_last_error(void);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif
