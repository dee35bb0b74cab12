/* C interface to the changing-contact control benchmark library.
 *
 * All functions return cct_status; on failure cct_last_error() describes
 * the problem for the calling thread. Strings returned through out
 * parameters are heap-allocated and must be released with
 * cct_string_free().
 */
#ifndef CCT_CCT_H
#define CCT_CCT_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cct_status {
  CCT_OK = 0,
  CCT_ERR_INVALID_ARGUMENT = 1,
  CCT_ERR_IO = 2,
  CCT_ERR_RUNTIME = 3,
} cct_status;

/* Opaque handles. */
typedef struct cct_scenario cct_scenario;
typedef struct cct_run cct_run;

const char* cct_version(void);
const char* cct_last_error(void);
void cct_string_free(char* s);

/* Scenario configuration ------------------------------------------------ */
cct_status cct_scenario_load(const char* path, cct_scenario** out);
void cct_scenario_free(cct_scenario* scenario);

cct_status cct_scenario_set_seed(cct_scenario* scenario, uint64_t seed);
cct_status cct_scenario_set_trials(cct_scenario* scenario, int trials);
/* "avic", "fixed_gain" or "avic_no_anticipation". */
cct_status cct_scenario_set_controller(cct_scenario* scenario, const char* kind);
/* "incremental" or "frozen_pretrained". */
cct_status cct_scenario_set_model_policy(cct_scenario* scenario, const char* policy);
/* Resume learned state from a store.json written by an earlier run. */
cct_status cct_scenario_set_resume_store(cct_scenario* scenario, const char* store_path);

/* Execution -------------------------------------------------------------- */
cct_status cct_run_scenario(cct_scenario* scenario, cct_run** out);
void cct_run_free(cct_run* run);

/* Write trial CSV logs, mode-event logs, summary.json and store.json. */
cct_status cct_run_write(const cct_run* run, const char* out_dir);
cct_status cct_run_summary_json(const cct_run* run, char** json_out);
cct_status cct_run_trial_count(const cct_run* run, int* out);
cct_status cct_run_trial_failed(const cct_run* run, int trial, int* out);
/* Metric names: rms_tracking_error, max_abs_acceleration, max_abs_jerk,
 * transition_time, mean_kp, prediction_rmse, mode_count, duration,
 * peak_impact_force, estimate_error. */
cct_status cct_run_metric(const cct_run* run, int trial, const char* metric, double* out);

/* Post-processing -------------------------------------------------------- */
cct_status cct_compare_dirs(const char* run_dir_a, const char* run_dir_b, const char* metric,
                            char** json_out, char** text_out);
/* format: "csv" for plottable per-tick series, "json" for a summary
 * recomputed from the logs. */
cct_status cct_export_run(const char* run_dir, const char* format, const char* out_path);

#ifdef __cplusplus
}
#endif

#endif /* CCT_CCT_H */
