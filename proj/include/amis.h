#ifndef AMIS_H
#define AMIS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  ifdef AMIS_BUILDING_LIBRARY
#    define AMIS_API __declspec(dllexport)
#  else
#    define AMIS_API __declspec(dllimport)
#  endif
#else
#  define AMIS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum amis_status {
  AMIS_OK = 0,
  AMIS_ERR_INPUT = 1,
  AMIS_ERR_DOMAIN = 2,
  AMIS_ERR_LOOKUP = 3,
  AMIS_ERR_CAPABILITY = 4,
  AMIS_ERR_PRECONDITION = 5,
  AMIS_ERR_ADAPTATION = 6,
  AMIS_ERR_CONFIG = 7,
  AMIS_ERR_RUNTIME = 8,
  AMIS_ERR_NULL = 9
} amis_status;

typedef struct amis_density amis_density;
typedef struct amis_problem amis_problem;
typedef struct amis_sampler amis_sampler;

/* Message of the last failing call on this thread ("" if none). */
AMIS_API const char* amis_last_error(void);
AMIS_API const char* amis_status_name(amis_status s);
AMIS_API const char* amis_version(void);
/* Frees strings returned through char** out parameters. */
AMIS_API void amis_string_free(char* s);

/* Tail-bound algebra. Increments bounded by b, conditional variance by k. */
AMIS_API amis_status amis_relative_entropy(double p, double q, double* out);
AMIS_API amis_status amis_bennett_mgf_bound(double b, double k, double epsilon, int64_t n, double lambda,
                                            double* out);
AMIS_API amis_status amis_tail_bound(double b, double k, double epsilon, int64_t n, double* out);
AMIS_API amis_status amis_optimal_lambda(double b, double k, double epsilon, int64_t n, double* out);
AMIS_API amis_status amis_covering_size(const double* lo, const double* hi, size_t dim, double delta, size_t* out);

/* Densities, JSON in and out. */
AMIS_API amis_status amis_density_from_json(const char* json, amis_density** out);
AMIS_API amis_status amis_density_to_json(const amis_density* d, char** out);
AMIS_API amis_status amis_density_evaluate(const amis_density* d, const double* theta, size_t dim, double* out);
AMIS_API amis_status amis_density_ratio_bound(const amis_density* a, const amis_density* b, double* out);
AMIS_API void amis_density_free(amis_density* d);

/* Problems: builtin names or {"template": ..., "params": {...}} JSON. */
AMIS_API amis_status amis_problem_builtin(const char* name, amis_problem** out);
AMIS_API amis_status amis_problem_from_json(const char* json, amis_problem** out);
AMIS_API amis_status amis_problem_dims(const amis_problem* p, size_t* dim_x, size_t* dim_theta);
AMIS_API amis_status amis_problem_objective(const amis_problem* p, const double* x, size_t dim, double* out);
AMIS_API amis_status amis_problem_integrand(const amis_problem* p, const double* x, size_t dim_x,
                                            const double* theta, size_t dim_theta, double* out);
AMIS_API amis_status amis_problem_true_optimum(const amis_problem* p, double* out);
AMIS_API amis_status amis_problem_pointwise_bound(const amis_problem* p, const double* x, size_t dim,
                                                  double epsilon, int64_t n, double* one_sided,
                                                  double* two_sided);
AMIS_API amis_status amis_problem_verify(const amis_problem* p, size_t grid_points, int* passed, char** report_json);
AMIS_API void amis_problem_free(amis_problem* p);

/* Sampler. policy: "fixed", "moment_matching", "defensive_mixture", "exploding_variance". */
AMIS_API amis_status amis_sampler_create(const amis_problem* p, const char* policy, int update_period,
                                         double defensive_weight, uint64_t seed, amis_sampler** out);
AMIS_API amis_status amis_sampler_run(amis_sampler* s, size_t n);
AMIS_API amis_status amis_sampler_size(const amis_sampler* s, size_t* out);
AMIS_API amis_status amis_sampler_draw(const amis_sampler* s, size_t index, double* theta, size_t dim,
                                       double* psi);
AMIS_API amis_status amis_sampler_history_csv(const amis_sampler* s, char** out);
AMIS_API void amis_sampler_free(amis_sampler* s);

/* Weighted objective over the sampler's draws and its minimiser. */
AMIS_API amis_status amis_estimate(const amis_sampler* s, const double* x, size_t dim, double* f_n);
AMIS_API amis_status amis_minimize(const amis_sampler* s, int budget, double tol, double* theta_n,
                                   char** result_json);

/* Experiment commands. */
AMIS_API amis_status amis_config_resolve(const char* file_text, const char* const* overrides, size_t count,
                                         const char* env_seed, char** out_json);
/* Runs a command; *exit_code follows the CLI convention (0, 2, 3, 4). */
AMIS_API amis_status amis_run(const char* command, const char* config_json, unsigned threads, int* exit_code,
                              char** message);

#ifdef __cplusplus
}
#endif

#endif
