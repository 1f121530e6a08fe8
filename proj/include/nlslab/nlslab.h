#ifndef NLSLAB_NLSLAB_H
#define NLSLAB_NLSLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(NLSLAB_BUILDING)
#    define NLSLAB_API __declspec(dllexport)
#  else
#    define NLSLAB_API __declspec(dllimport)
#  endif
#elif defined(__GNUC__)
#  define NLSLAB_API __attribute__((visibility("default")))
#else
#  define NLSLAB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nlslab_status {
  NLSLAB_OK = 0,
  NLSLAB_E_INVALID_ARGUMENT = 1,
  NLSLAB_E_DOMAIN = 2,
  NLSLAB_E_NUMERICAL = 3,
  NLSLAB_E_IO = 4,
  NLSLAB_E_CONFIG = 5,
  NLSLAB_E_BUFFER = 6, /* output buffer too small */
  NLSLAB_E_INTERNAL = 7
} nlslab_status;

typedef enum nlslab_symbol {
  NLSLAB_SCHRODINGER = 0,
  NLSLAB_BIHARMONIC = 1,
  NLSLAB_FRACTIONAL = 2
} nlslab_symbol;

typedef struct nlslab_model {
  int symbol;   /* nlslab_symbol */
  double alpha; /* fractional order in (1/2, 1) */
  int power;    /* 3 or 5 */
  int sign;     /* 1 defocusing, 0 linear */
} nlslab_model;

typedef struct nlslab_solver_config {
  double dt;
  double t_end;
  double dealias_ratio;
  int snapshot_stride;
  double shell_fraction;
  double shell_tol;
} nlslab_solver_config;

typedef struct nlslab_grid nlslab_grid;
typedef struct nlslab_field nlslab_field;
typedef struct nlslab_trajectory nlslab_trajectory;
typedef struct nlslab_config nlslab_config;
typedef struct nlslab_run nlslab_run;
typedef struct nlslab_report nlslab_report;

/* Message of the last failed call on this thread ("" after success). */
NLSLAB_API const char* nlslab_last_error(void);
NLSLAB_API const char* nlslab_version(void);
NLSLAB_API const char* nlslab_status_name(nlslab_status status);

NLSLAB_API void nlslab_model_default(nlslab_model* model);
NLSLAB_API void nlslab_solver_config_default(nlslab_solver_config* config);

NLSLAB_API nlslab_status nlslab_grid_create(int dim, int points_per_axis, double box_length, nlslab_grid** out);
NLSLAB_API void nlslab_grid_destroy(nlslab_grid* grid);
NLSLAB_API nlslab_status nlslab_grid_info(const nlslab_grid* grid, int* dim, int* points_per_axis, double* box_length,
                                          size_t* size);

/* values: 2 * size doubles, interleaved (re, im) in storage order. */
NLSLAB_API nlslab_status nlslab_field_create(const nlslab_grid* grid, const double* values, nlslab_field** out);
NLSLAB_API nlslab_status nlslab_field_gaussian(const nlslab_grid* grid, double amplitude, double width,
                                               nlslab_field** out);
NLSLAB_API void nlslab_field_destroy(nlslab_field* field);
NLSLAB_API size_t nlslab_field_size(const nlslab_field* field);
NLSLAB_API nlslab_status nlslab_field_values(const nlslab_field* field, double* values, size_t capacity);
/* p may be INFINITY. */
NLSLAB_API nlslab_status nlslab_field_lp_norm(const nlslab_field* field, double p, double* out);
NLSLAB_API nlslab_status nlslab_field_hdot_norm(const nlslab_field* field, double s, double* out);
NLSLAB_API nlslab_status nlslab_field_hs_norm(const nlslab_field* field, double s, double* out);
NLSLAB_API nlslab_status nlslab_free_evolve(const nlslab_field* field, double t, const nlslab_model* model,
                                            nlslab_field** out);

NLSLAB_API nlslab_status nlslab_evolve(const nlslab_field* initial, const nlslab_model* model,
                                       const nlslab_solver_config* config, nlslab_trajectory** out);
NLSLAB_API void nlslab_trajectory_destroy(nlslab_trajectory* trajectory);
NLSLAB_API nlslab_status nlslab_trajectory_info(const nlslab_trajectory* trajectory, double* validity_horizon,
                                                size_t* snapshots, size_t* steps);
/* Series names: linf, l2 .. l6, h_half_dot, h1, mass, energy. */
NLSLAB_API nlslab_status nlslab_trajectory_series(const nlslab_trajectory* trajectory, const char* name,
                                                  double* times, double* values, size_t capacity, size_t* count);
NLSLAB_API nlslab_status nlslab_trajectory_snapshot(const nlslab_trajectory* trajectory, size_t index, double* time,
                                                    nlslab_field** out);
NLSLAB_API nlslab_status nlslab_trajectory_save(const nlslab_trajectory* trajectory, const char* path, uint64_t seed);

NLSLAB_API nlslab_status nlslab_fit_decay(const double* times, const double* values, size_t count, double t_min,
                                          double t_max, double* exponent, double* log_constant, double* r_squared);

/* On NLSLAB_E_CONFIG the last error lists every violation, one per line. */
NLSLAB_API nlslab_status nlslab_config_parse(const char* text, nlslab_config** out);
NLSLAB_API nlslab_status nlslab_config_default(const char* kind, nlslab_config** out);
NLSLAB_API void nlslab_config_destroy(nlslab_config* config);
NLSLAB_API nlslab_status nlslab_config_set(nlslab_config* config, const char* key, const char* value);
/* Returned strings live as long as the handle (until the next call on it). */
NLSLAB_API const char* nlslab_config_get(const nlslab_config* config, const char* key);
NLSLAB_API const char* nlslab_config_serialize(const nlslab_config* config);
NLSLAB_API const char* nlslab_config_run_id(const nlslab_config* config);
NLSLAB_API uint64_t nlslab_config_hash(const nlslab_config* config);
NLSLAB_API int nlslab_config_equal(const nlslab_config* a, const nlslab_config* b);

NLSLAB_API nlslab_status nlslab_run_experiment(const nlslab_config* config, int jobs, nlslab_run** out);
NLSLAB_API void nlslab_run_destroy(nlslab_run* run);
/* 0 pass, 2 acceptance failure, 4 numerical abort. */
NLSLAB_API int nlslab_run_exit_code(const nlslab_run* run);
NLSLAB_API const char* nlslab_run_status(const nlslab_run* run);
NLSLAB_API const char* nlslab_run_id(const nlslab_run* run);
NLSLAB_API const char* nlslab_run_directory(const nlslab_run* run);
NLSLAB_API const char* nlslab_run_error(const nlslab_run* run);
NLSLAB_API const char* nlslab_run_manifest(const nlslab_run* run);

NLSLAB_API nlslab_status nlslab_report_build(const char* const* patterns, size_t count, nlslab_report** out);
NLSLAB_API void nlslab_report_destroy(nlslab_report* report);
NLSLAB_API const char* nlslab_report_markdown(const nlslab_report* report);
NLSLAB_API size_t nlslab_report_missing(const nlslab_report* report);

#ifdef __cplusplus
}
#endif

#endif
