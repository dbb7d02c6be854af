/* C interface to the PPN solver library.
 *
 * All functions returning int yield PPN_OK (0) on success or a nonzero status
 * code; ppn_last_error() then returns a thread-local diagnostic string valid
 * until the next failing call on the same thread. Objects are opaque handles
 * released with the matching *_free function; strings returned through char**
 * are heap-allocated and released with ppn_string_free.
 */
#ifndef PPN_H
#define PPN_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

enum {
    PPN_OK = 0,
    PPN_ERR_NONFINITE = 1,
    PPN_ERR_INADMISSIBLE = 2,
    PPN_ERR_INDEX_OUT_OF_RANGE = 3,
    PPN_ERR_STRUCTURAL_MISS = 4,
    PPN_ERR_PARSE = 5,
    PPN_ERR_VALIDATION = 6,
    PPN_ERR_MISSING_BASELINE = 7,
    PPN_ERR_MISSING_DATA = 8,
    PPN_ERR_IO = 9,
    PPN_ERR_INVALID_ARGUMENT = 10,
    PPN_ERR_LINE_SEARCH = 11,
    PPN_ERR_ITERATION_LIMIT = 12,
    PPN_ERR_SOLVE = 13,
    PPN_ERR_RUNTIME = 100
};

typedef struct ppn_scene ppn_scene;     /* parsed + validated scene description */
typedef struct ppn_records ppn_records; /* set of benchmark run records */

const char* ppn_version(void);
const char* ppn_last_error(void);
void ppn_string_free(char* s);

/* ---- scenes ---- */

int ppn_scene_parse(const char* text, ppn_scene** out);
int ppn_scene_load(const char* path, ppn_scene** out);
void ppn_scene_free(ppn_scene* scene);
const char* ppn_scene_name(const ppn_scene* scene);
int ppn_scene_dim(const ppn_scene* scene);

/* Override a scalar scene parameter ("dt", "tol", "duration", "seed",
 * "perturb"); the value is revalidated. */
int ppn_scene_set(ppn_scene* scene, const char* field, double value);

/* ---- runs ---- */

typedef struct ppn_run_options {
    const char* variant; /* "plain" | "pn" | "pdn" | "ppn" (default "ppn") */
    const char* filter;  /* "clamp" | "mirror" (default "clamp") */
    double alpha;        /* PPN tightening factor; <= 0 keeps the default 0.5 */
    double beta;         /* PPN release factor;    <= 0 keeps the default 2.0 */
    const char* solver;  /* "llt" | "pcg" (default "llt") */
    int max_steps;       /* cap on step count; < 0 runs duration/dt steps */
} ppn_run_options;

void ppn_run_options_init(ppn_run_options* opts);

/* Simulate one scene under one variant. Solver failures are recorded in the
 * result, not reported as a status. */
int ppn_run_scene(const ppn_scene* scene, const ppn_run_options* opts, ppn_records** out);

/* Scenes x variants sweep on worker threads (jobs <= 0: hardware default).
 * variant_names is a NULL-terminated array unless n_variants > 0. When
 * out_dir is non-NULL, per-run step CSVs and aggregate.csv are written there
 * atomically. Per-run failures are recorded and the sweep continues. */
int ppn_sweep(const ppn_scene* const* scenes, size_t n_scenes, const char* const* variant_names,
              size_t n_variants, const ppn_run_options* base, const char* out_dir, int jobs,
              ppn_records** out);

/* ---- records ---- */

void ppn_records_free(ppn_records* recs);
size_t ppn_records_count(const ppn_records* recs);
const char* ppn_record_scene(const ppn_records* recs, size_t index);
const char* ppn_record_variant(const ppn_records* recs, size_t index);
int ppn_record_failed(const ppn_records* recs, size_t index);
const char* ppn_record_failure(const ppn_records* recs, size_t index);

/* Numeric aggregate by name: "steps", "newton_iterations", "projection_attempts",
 * "eigendecompositions", "modified", "solve_failures", "candidate_iterations",
 * "candidate_steps", "ph_per_iter", "ph_per_step", "gamma_min", "t_assemble",
 * "t_project", "t_solve", "t_linesearch", "t_other", "t_total". */
int ppn_record_stat(const ppn_records* recs, size_t index, const char* field, double* out);

int ppn_records_aggregate_csv(const ppn_records* recs, char** out);
int ppn_records_steps_csv(const ppn_records* recs, size_t index, char** out);
int ppn_records_json(const ppn_records* recs, char** out);
int ppn_records_parse_csv(const char* text, ppn_records** out);
int ppn_records_merge(ppn_records* dst, const ppn_records* src);

/* Per-scene comparison table with ratios against the PN baseline. Either
 * output pointer may be NULL. */
int ppn_records_summary(const ppn_records* recs, char** text, char** csv);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* PPN_H */
