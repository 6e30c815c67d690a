/* spd.h - C API for the spd planar-linkage and gripper analysis library.
 *
 * The library is consumed through an opaque run handle: configure it, execute
 * it, then read the summary. All functions returning spd_status report
 * SPD_OK (0) on success; on failure spd_run_error() carries the message and
 * the status value doubles as the suggested process exit code.
 */

#ifndef SPD_H
#define SPD_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum spd_status {
  SPD_OK = 0,
  SPD_ERR_INTERNAL = 1,   /* unexpected failure                    */
  SPD_ERR_CONFIG = 2,     /* config file / schema / option error   */
  SPD_ERR_KINEMATICS = 3, /* geometry or mechanism analysis error  */
  SPD_ERR_SIMULATION = 4, /* grasp simulation error                */
  SPD_ERR_IO = 5          /* filesystem error                      */
} spd_status;

/* Opaque handle for one configured analysis run. Not thread-safe; use one
 * handle per thread. */
typedef struct spd_run spd_run;

/* Library version string, e.g. "0.1.0". */
const char* spd_version(void);

/* Creates a run with built-in defaults. Returns NULL on allocation failure. */
spd_run* spd_run_new(void);
void spd_run_free(spd_run* run);

/* Loads and validates a JSON config file into the run. */
spd_status spd_run_load_config(spd_run* run, const char* path);

/* Option overrides; applied on top of the loaded config. */
spd_status spd_run_set_command(spd_run* run, const char* command);
spd_status spd_run_set_out_dir(spd_run* run, const char* dir);
spd_status spd_run_set_seed(spd_run* run, uint64_t seed);
spd_status spd_run_set_svg(spd_run* run, int enabled);
spd_status spd_run_set_steps(spd_run* run, uint64_t steps);
spd_status spd_run_set_samples(spd_run* run, uint64_t samples);
/* Angle inputs are radians unless `degrees` is nonzero. */
spd_status spd_run_set_theta_max(spd_run* run, double value, int degrees);

/* Executes the configured command and writes CSV / JSON / optional SVG
 * outputs to the run's output directory. */
spd_status spd_run_execute(spd_run* run);

/* Message of the last failed call on this handle ("" when none). The pointer
 * stays valid until the next call on the same handle. */
const char* spd_run_error(const spd_run* run);

/* Summary JSON of the last successful execute ("" before that). */
const char* spd_run_summary_json(const spd_run* run);

/* Number of output files written by the last execute, and their paths. */
uint64_t spd_run_output_count(const spd_run* run);
const char* spd_run_output_path(const spd_run* run, uint64_t index);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SPD_H */
