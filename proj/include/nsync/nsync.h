/*
 * nsync C API.
 *
 * Every object is an opaque handle created by an nsync_*_create / producing
 * call and released with the matching *_destroy. Functions return an
 * nsync_status; on failure nsync_last_error() holds a message for the calling
 * thread. Matrices cross the boundary as row-major double arrays.
 */
#ifndef NSYNC_NSYNC_H
#define NSYNC_NSYNC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define NSYNC_API __declspec(dllexport)
#else
#define NSYNC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nsync_status {
  NSYNC_OK = 0,
  NSYNC_ERR_INVALID_ARGUMENT = 1,
  NSYNC_ERR_CONFIG = 2,
  NSYNC_ERR_ASSUMPTION = 3,
  NSYNC_ERR_NUMERICAL = 4,
  NSYNC_ERR_RUNTIME = 5,
  NSYNC_ERR_INTERNAL = 6
} nsync_status;

typedef enum nsync_method { NSYNC_METHOD_EXACT_EXPM = 0, NSYNC_METHOD_RK4 = 1 } nsync_method;

typedef struct nsync_matrix nsync_matrix;
typedef struct nsync_topology nsync_topology;
typedef struct nsync_agent nsync_agent;
typedef struct nsync_gain nsync_gain;
typedef struct nsync_run nsync_run;
typedef struct nsync_scenario nsync_scenario;
typedef struct nsync_report nsync_report;

NSYNC_API const char* nsync_version(void);
NSYNC_API const char* nsync_status_string(nsync_status status);
/* Message of the last failed call on this thread; "" if none. */
NSYNC_API const char* nsync_last_error(void);
/* Assumption tag ("A1", "A2", "B1", "B2", "connectivity") of the last
 * NSYNC_ERR_ASSUMPTION on this thread; "" otherwise. */
NSYNC_API const char* nsync_last_assumption(void);
/* CLI exit code for a status: 0 ok, 1 config, 2 assumption, 3 runtime. */
NSYNC_API int nsync_exit_code(nsync_status status);

/* ---- matrices ---------------------------------------------------------- */
NSYNC_API nsync_status nsync_matrix_create(size_t rows, size_t cols, const double* row_major,
                                           nsync_matrix** out);
NSYNC_API void nsync_matrix_destroy(nsync_matrix* m);
NSYNC_API size_t nsync_matrix_rows(const nsync_matrix* m);
NSYNC_API size_t nsync_matrix_cols(const nsync_matrix* m);
/* Copies rows*cols entries (row-major) into out; len must be at least that. */
NSYNC_API nsync_status nsync_matrix_read(const nsync_matrix* m, double* out, size_t len);

NSYNC_API nsync_status nsync_expm(const nsync_matrix* m, double t, nsync_matrix** out);
NSYNC_API nsync_status nsync_is_neutrally_stable(const nsync_matrix* a, int* out);
NSYNC_API nsync_status nsync_is_detectable(const nsync_matrix* c, const nsync_matrix* a, int* out);
NSYNC_API nsync_status nsync_is_stabilizable(const nsync_matrix* a, const nsync_matrix* b,
                                             int* out);

/* ---- topology ---------------------------------------------------------- */
NSYNC_API nsync_status nsync_topology_validate(const nsync_matrix* gamma, nsync_topology** out);
NSYNC_API nsync_status nsync_topology_random(size_t p, double density, uint64_t seed,
                                             nsync_topology** out);
NSYNC_API void nsync_topology_destroy(nsync_topology* t);
NSYNC_API size_t nsync_topology_size(const nsync_topology* t);
NSYNC_API int nsync_topology_connected(const nsync_topology* t);
/* Normalized Gamma (p x p). */
NSYNC_API nsync_status nsync_topology_gamma(const nsync_topology* t, nsync_matrix** out);
/* Left stationary vector as a p x 1 matrix. */
NSYNC_API nsync_status nsync_topology_stationary(const nsync_topology* t, nsync_matrix** out);
NSYNC_API nsync_status nsync_topology_ergodic_error(const nsync_topology* t, double time,
                                                    double* out);

/* ---- agents and gains -------------------------------------------------- */
NSYNC_API nsync_status nsync_agent_output_coupled(const nsync_matrix* a, const nsync_matrix* c,
                                                  nsync_agent** out);
NSYNC_API nsync_status nsync_agent_state_coupled(const nsync_matrix* a, const nsync_matrix* b,
                                                 nsync_agent** out);
NSYNC_API void nsync_agent_destroy(nsync_agent* agent);

/* Runs the output- or state-feedback synthesis matching the agent. */
NSYNC_API nsync_status nsync_gain_synthesize(const nsync_agent* agent, nsync_gain** out);
NSYNC_API void nsync_gain_destroy(nsync_gain* gain);
/* L (n x m) or K (m x n). */
NSYNC_API nsync_status nsync_gain_matrix(const nsync_gain* gain, nsync_matrix** out);
NSYNC_API nsync_status nsync_gain_cesaro(const nsync_gain* gain, nsync_matrix** out);
NSYNC_API size_t nsync_gain_marginal_dim(const nsync_gain* gain);

/* ---- simulation -------------------------------------------------------- */
/* x0 is the stacked initial state of length p*n. */
NSYNC_API nsync_status nsync_simulate(const nsync_agent* agent, const nsync_gain* gain,
                                      const nsync_topology* topology, const double* x0,
                                      size_t x0_len, double horizon, double dt,
                                      nsync_method method, nsync_run** out);
NSYNC_API void nsync_run_destroy(nsync_run* run);
NSYNC_API size_t nsync_run_samples(const nsync_run* run);
NSYNC_API nsync_status nsync_run_times(const nsync_run* run, double* out, size_t len);
NSYNC_API nsync_status nsync_run_sync_error(const nsync_run* run, double* out, size_t len);
NSYNC_API nsync_status nsync_run_disagreement(const nsync_run* run, double* out, size_t len);
/* Stacked state at sample k, length p*n. */
NSYNC_API nsync_status nsync_run_state(const nsync_run* run, size_t k, double* out, size_t len);

/* ---- scenario commands ------------------------------------------------- */
NSYNC_API nsync_status nsync_scenario_load(const char* path, nsync_scenario** out);
NSYNC_API nsync_status nsync_scenario_parse(const char* text, nsync_scenario** out);
NSYNC_API void nsync_scenario_destroy(nsync_scenario* s);
NSYNC_API nsync_status nsync_scenario_override_seed(nsync_scenario* s, uint64_t seed);
/* Output directory from the scenario file ("outputs"). */
NSYNC_API const char* nsync_scenario_outputs(const nsync_scenario* s);
/* Worker count from the scenario file, 0 when unset. */
NSYNC_API unsigned nsync_scenario_workers(const nsync_scenario* s);

NSYNC_API nsync_status nsync_cmd_synth(const nsync_scenario* s, const char* out_dir,
                                       nsync_report** out);
NSYNC_API nsync_status nsync_cmd_simulate(const nsync_scenario* s, const char* out_dir,
                                          nsync_report** out);
/* param NULL or values NULL/0 fall back to the scenario's "sweep" section. */
NSYNC_API nsync_status nsync_cmd_sweep(const nsync_scenario* s, const char* param,
                                       const double* values, size_t n_values, const char* out_dir,
                                       unsigned workers, nsync_report** out);
NSYNC_API nsync_status nsync_cmd_check(const nsync_scenario* s, const char* out_dir,
                                       nsync_report** out);

NSYNC_API void nsync_report_destroy(nsync_report* r);
NSYNC_API int nsync_report_passed(const nsync_report* r);
NSYNC_API const char* nsync_report_json(const nsync_report* r);
NSYNC_API const char* nsync_report_text(const nsync_report* r);

#ifdef __cplusplus
}
#endif

#endif /* NSYNC_NSYNC_H */
