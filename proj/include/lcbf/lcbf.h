/* C interface to the learned-barrier library. All handles are opaque; every fallible call
 * returns an lcbf_status and leaves a message retrievable with lcbf_last_error() on the
 * calling thread. */
#ifndef LCBF_LCBF_H
#define LCBF_LCBF_H

#include <stddef.h>
#include <stdint.h>

#if defined(LCBF_BUILDING_LIBRARY)
#define LCBF_API __attribute__((visibility("default")))
#else
#define LCBF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lcbf_status {
    LCBF_OK = 0,
    LCBF_ERR_PARSE = 1,
    LCBF_ERR_VALIDATION = 2,
    LCBF_ERR_INVALID_ARGUMENT = 3,
    LCBF_ERR_GEOMETRY = 4,
    LCBF_ERR_DEGENERATE_TRAINING_SET = 5,
    LCBF_ERR_HARD_MARGIN_INFEASIBLE = 6,
    LCBF_ERR_START_UNSAFE = 7,
    LCBF_ERR_IO = 8,
    LCBF_ERR_INTERNAL = 99
} lcbf_status;

typedef enum lcbf_mode {
    LCBF_MODE_GROUND_TRUTH = 0,
    LCBF_MODE_OFFLINE = 1,
    LCBF_MODE_ONLINE_AGGREGATE = 2,
    LCBF_MODE_ONLINE_INSTANT = 3
} lcbf_mode;

typedef struct lcbf_scenario lcbf_scenario;
typedef struct lcbf_offline lcbf_offline; /* trained offline model, shareable across starts */
typedef struct lcbf_run lcbf_run;         /* one rollout and its report */

typedef struct lcbf_run_summary {
    lcbf_mode mode;
    int reached_goal;
    size_t steps;
    size_t training_set_size;
    size_t retrain_count;
    size_t safety_violations;
    size_t unconstrained_steps;
    size_t infeasible_steps;
    double wall_time;
    double min_h_hat;
    double min_true_sdf;
    double gamma;
} lcbf_run_summary;

LCBF_API const char* lcbf_version(void);
LCBF_API const char* lcbf_last_error(void);
LCBF_API const char* lcbf_status_name(lcbf_status status);

LCBF_API lcbf_status lcbf_mode_parse(const char* name, lcbf_mode* out);
LCBF_API const char* lcbf_mode_name(lcbf_mode mode);

LCBF_API lcbf_status lcbf_scenario_load(const char* path, lcbf_scenario** out);
LCBF_API lcbf_status lcbf_scenario_parse(const char* text, const char* source_name,
                                         lcbf_scenario** out);
LCBF_API void lcbf_scenario_free(lcbf_scenario* scenario);
/* "table.key=value", e.g. "control.gamma=2.0". The scenario is re-validated. */
LCBF_API lcbf_status lcbf_scenario_override(lcbf_scenario* scenario, const char* assignment);
LCBF_API const char* lcbf_scenario_name(const lcbf_scenario* scenario);
LCBF_API size_t lcbf_scenario_start_count(const lcbf_scenario* scenario);
LCBF_API lcbf_status lcbf_scenario_start(const lcbf_scenario* scenario, size_t index, double* x,
                                         double* y);
LCBF_API lcbf_status lcbf_scenario_goal(const lcbf_scenario* scenario, double* x, double* y);
/* Returns NULL when the sensor resolves every obstacle; the string lives as long as the handle. */
LCBF_API const char* lcbf_scenario_resolution_warning(const lcbf_scenario* scenario);
LCBF_API lcbf_status lcbf_scenario_write_sdf(const lcbf_scenario* scenario, double spacing,
                                             const char* path);

LCBF_API lcbf_status lcbf_offline_build(const lcbf_scenario* scenario, uint64_t seed,
                                        lcbf_offline** out);
LCBF_API void lcbf_offline_free(lcbf_offline* offline);
LCBF_API size_t lcbf_offline_training_size(const lcbf_offline* offline);
LCBF_API lcbf_status lcbf_offline_write_levelset(const lcbf_offline* offline,
                                                 const lcbf_scenario* scenario, double spacing,
                                                 const char* path);

LCBF_API lcbf_status lcbf_offline_write_model(const lcbf_offline* offline, const char* path);

/* offline may be NULL; offline mode then trains its own model. */
LCBF_API lcbf_status lcbf_run_start(const lcbf_scenario* scenario, size_t start_index,
                                    lcbf_mode mode, uint64_t seed, const lcbf_offline* offline,
                                    lcbf_run** out);
LCBF_API void lcbf_run_free(lcbf_run* run);
LCBF_API lcbf_status lcbf_run_summary_get(const lcbf_run* run, lcbf_run_summary* out);
LCBF_API lcbf_status lcbf_run_write_trajectory(const lcbf_run* run, const char* path);
/* Learned modes only; fails with LCBF_ERR_INVALID_ARGUMENT when the run has no model. */
LCBF_API lcbf_status lcbf_run_write_levelset(const lcbf_run* run, const lcbf_scenario* scenario,
                                             double spacing, const char* path);
LCBF_API lcbf_status lcbf_write_report(const lcbf_scenario* scenario, uint64_t seed,
                                       const lcbf_run* const* runs, size_t count,
                                       const char* path);

LCBF_API lcbf_status lcbf_eval(const char* trajectory_a, const char* trajectory_b, double* r,
                               double* f);
LCBF_API lcbf_status lcbf_metrics_append(const char* path, const char* case_name,
                                         const char* mode_a, const char* mode_b, double r,
                                         double f);
/* Builds the comparison table of a run directory. csv_path may be NULL. *text receives the
 * aligned rendering and must be released with lcbf_string_free. */
LCBF_API lcbf_status lcbf_table(const char* run_dir, const char* csv_path, char** text);
LCBF_API void lcbf_string_free(char* text);

#ifdef __cplusplus
}
#endif

#endif
