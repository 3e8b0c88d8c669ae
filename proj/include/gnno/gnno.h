/* C interface to the gnno pipeline: graph-based hard-negative mining for
 * sequential recommendation. Handles are opaque; every function returns a
 * status code and the last error message is retrievable per handle. */
#ifndef GNNO_H
#define GNNO_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gnno_status {
  GNNO_OK = 0,
  GNNO_USAGE_ERROR = 1, /* bad flags, keys, or argument combinations */
  GNNO_DATA_ERROR = 2,  /* malformed input data or artifacts */
  GNNO_INTERNAL_ERROR = 3
} gnno_status;

typedef struct gnno_experiment gnno_experiment;

const char* gnno_version(void);

/* Creates an experiment from a key=value config file; config_path may be
 * NULL for the built-in defaults. On success *out owns the handle. */
gnno_status gnno_experiment_open(const char* config_path, gnno_experiment** out);

void gnno_experiment_close(gnno_experiment* exp);

/* Last error message for this handle; empty string when none. */
const char* gnno_experiment_last_error(const gnno_experiment* exp);

/* Overrides one config key, e.g. ("sampler.kind", "uniform"). */
gnno_status gnno_experiment_set(gnno_experiment* exp, const char* key,
                                const char* value);

/* Runs pipeline stages. stages_csv is "all" or a comma-separated subset of
 * ingest,graph,overlap,train,eval,analyze. Completed stages are skipped
 * unless force is nonzero; cached artifacts from a different config are an
 * error unless force is nonzero. */
gnno_status gnno_experiment_run(gnno_experiment* exp, const char* stages_csv,
                                int force);

/* Trains and evaluates one model per sampler ("uniform,dns,gnno") over
 * num_seeds seeds and writes the comparison table to out_path (CSV; a JSON
 * summary lands next to it). */
gnno_status gnno_experiment_compare(gnno_experiment* exp,
                                    const char* samplers_csv, int num_seeds,
                                    const char* out_path);

/* Writes a synthetic block-structured interaction log (TSV: user, item,
 * timestamp) to out_path. */
gnno_status gnno_synth_corpus(uint32_t num_items, uint32_t num_blocks,
                              uint32_t num_users, uint32_t sequence_length,
                              double stay_prob, uint64_t seed,
                              const char* out_path);

/* Error message from the most recent handle-less call on this thread. */
const char* gnno_last_error(void);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* GNNO_H */
