/* C interface to the pdeopt solver.
 *
 * Every function returns a pdeopt_status. On failure the message is available
 * from pdeopt_last_error() on the same thread until the next call. Objects are
 * opaque and owned by the caller once returned; strings returned through
 * char** must be released with pdeopt_string_free. Handles are not
 * thread-safe; distinct handles may be used from different threads.
 */
#ifndef PDEOPT_H
#define PDEOPT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PDEOPT_API __declspec(dllexport)
#else
#define PDEOPT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pdeopt_status {
    PDEOPT_OK = 0,
    PDEOPT_INVALID_ARGUMENT = 1,
    PDEOPT_GRID_TOO_SMALL = 2,
    PDEOPT_SHAPE_MISMATCH = 3,
    PDEOPT_NON_FINITE = 4,
    PDEOPT_LINE_SEARCH_FAILURE = 5,
    PDEOPT_SINGULAR_SYSTEM = 6,
    PDEOPT_ORACLE_REJECTED = 7,
    PDEOPT_IO = 8,
    PDEOPT_INTERNAL = 99
} pdeopt_status;

typedef struct pdeopt_problem pdeopt_problem;
typedef struct pdeopt_field pdeopt_field;
typedef struct pdeopt_result pdeopt_result;

typedef struct pdeopt_scheme {
    int interior_order;
    int boundary_order;
} pdeopt_scheme;

typedef enum pdeopt_convergence { PDEOPT_CONV_GRADIENT = 0, PDEOPT_CONV_PLATEAU = 1, PDEOPT_CONV_BUDGET = 2 } pdeopt_convergence;

PDEOPT_API const char* pdeopt_version(void);
PDEOPT_API const char* pdeopt_last_error(void);
PDEOPT_API const char* pdeopt_status_name(pdeopt_status status);
PDEOPT_API void pdeopt_string_free(char* s);

/* Problems. Builtin names: "wave", "heat". */
PDEOPT_API pdeopt_status pdeopt_problem_builtin(const char* name, size_t n_x, size_t n_t, double lambda, pdeopt_problem** out);
PDEOPT_API pdeopt_status pdeopt_problem_from_json(const char* json, pdeopt_problem** out);
PDEOPT_API pdeopt_status pdeopt_problem_to_json(const pdeopt_problem* p, char** out);
PDEOPT_API pdeopt_status pdeopt_problem_resized(const pdeopt_problem* p, size_t n_x, size_t n_t, pdeopt_problem** out);
PDEOPT_API pdeopt_status pdeopt_problem_set_lambda(pdeopt_problem* p, double lambda);
PDEOPT_API pdeopt_status pdeopt_problem_grid(const pdeopt_problem* p, size_t* n_x, size_t* n_t);
PDEOPT_API void pdeopt_problem_free(pdeopt_problem* p);

/* Fields live on a problem's grid. */
PDEOPT_API pdeopt_status pdeopt_field_random(const pdeopt_problem* p, uint64_t seed, pdeopt_field** out);
PDEOPT_API pdeopt_status pdeopt_field_from_values(const pdeopt_problem* p, const double* values, size_t count, pdeopt_field** out);
/* Fails with PDEOPT_INVALID_ARGUMENT when the problem has no reference. */
PDEOPT_API pdeopt_status pdeopt_field_reference(const pdeopt_problem* p, pdeopt_field** out);
/* Row-major (n_x, n_t) view, valid until the field is freed. */
PDEOPT_API pdeopt_status pdeopt_field_values(const pdeopt_field* f, const double** values, size_t* n_x, size_t* n_t);
PDEOPT_API pdeopt_status pdeopt_field_mae(const pdeopt_field* a, const pdeopt_field* b, double* out);
/* method: "multilinear" or "rbf"; smooth is used by rbf only. */
PDEOPT_API pdeopt_status pdeopt_field_interpolate(const pdeopt_field* coarse, const pdeopt_problem* fine, const char* method,
                                                  double smooth, pdeopt_field** out);
/* NULL or "-" writes to stdout. */
PDEOPT_API pdeopt_status pdeopt_field_write_csv(const pdeopt_field* f, const char* path);
PDEOPT_API void pdeopt_field_free(pdeopt_field* f);

/* Objective. Any of the outputs may be NULL. */
PDEOPT_API pdeopt_status pdeopt_loss(const pdeopt_problem* p, const pdeopt_field* f, pdeopt_scheme scheme, double* interior,
                                     double* boundary, double* total);
PDEOPT_API pdeopt_status pdeopt_gradient(const pdeopt_problem* p, const pdeopt_field* f, pdeopt_scheme scheme, double* grad,
                                         size_t count);

/* Optimisation. optimizer_json may be NULL for defaults; unknown keys are ignored. */
PDEOPT_API pdeopt_status pdeopt_solve(const pdeopt_problem* p, const pdeopt_field* init, pdeopt_scheme scheme,
                                      const char* optimizer_json, pdeopt_result** out);
/* One solve described by a request object:
 *   {"problem": name | object, "grid": [nx, nt], "scheme": [I, B], "init": "random" | "interp" | "rbf" | "cascade",
 *    "seed": n, "lambda": r, "optimizer": {...}, "cascade": {"start", "step", "levels"}, "rbf_smooth": r}
 * Non-random inits run a cascade ending at the requested grid; the result is the last level. */
PDEOPT_API pdeopt_status pdeopt_solve_request(const char* request_json, pdeopt_result** out);
PDEOPT_API pdeopt_status pdeopt_result_json(const pdeopt_result* r, int include_field, char** out);
PDEOPT_API pdeopt_status pdeopt_result_field(const pdeopt_result* r, pdeopt_field** out);
/* mae is NaN when the problem has no reference. Outputs may be NULL. */
PDEOPT_API pdeopt_status pdeopt_result_summary(const pdeopt_result* r, long* iterations, pdeopt_convergence* converged,
                                               double* mae, double* total_loss, double* wall_time);
PDEOPT_API void pdeopt_result_free(pdeopt_result* r);

/* Runs an experiment description. A non-NULL output_path overrides its "output".
 * summary_json receives the summary document (may be NULL). */
PDEOPT_API pdeopt_status pdeopt_experiment_run(const char* spec_json, const char* output_path, char** summary_json);

/* Invariant suite. options_json may be NULL. all_passed receives 1 when every check passed. */
PDEOPT_API pdeopt_status pdeopt_validate(const char* options_json, char** report_json, int* all_passed);

#ifdef __cplusplus
}
#endif

#endif
