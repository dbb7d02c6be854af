#pragma once

#include "core/integrator.hpp"
#include "core/scene.hpp"

#include <string>
#include <vector>

namespace ppn {

// Flat per-step metrics row (one CSV line).
struct StepRow {
    int step = 0;
    std::string status;
    int converged = 0;
    int newton_iterations = 0;
    long long candidate_elements = 0;
    long long projection_attempts = 0;
    long long eigendecompositions = 0;
    long long modified = 0;
    long long solve_failures = 0;
    double gamma_min = 1.0;
    double kinetic = 0.0;
    double elastic = 0.0;
    double t_assemble = 0.0, t_project = 0.0, t_solve = 0.0, t_linesearch = 0.0,
           t_other = 0.0, t_total = 0.0;
};

// One (scene, variant) run: aggregates plus the per-step series. Aggregates
// are the exact sums of the series (gamma_min is the min).
struct RunRecord {
    std::string scene;
    std::string variant;
    int steps = 0;  // steps attempted (includes a trailing failed step, if any)
    long long newton_iterations = 0;
    long long projection_attempts = 0;
    long long eigendecompositions = 0;
    long long modified = 0;
    long long solve_failures = 0;
    long long candidate_iterations = 0;  // sum of candidates x attempted iterations
    long long candidate_steps = 0;       // sum of candidates over steps
    double gamma_min = 1.0;
    double t_assemble = 0.0, t_project = 0.0, t_solve = 0.0, t_linesearch = 0.0,
           t_other = 0.0, t_total = 0.0;
    bool failed = false;
    std::string failure;  // diagnostic when failed

    std::vector<StepRow> series;  // not persisted in the aggregate CSV

    // % of candidate element Hessians submitted for projection, under the two
    // denominators (candidates x iterations vs candidates x steps).
    double ph_per_iter() const;
    double ph_per_step() const;
};

struct RunOptions {
    SolverVariant variant;
    LinearSolverKind solver = LinearSolverKind::LLT;
    bool keep_series = true;
    int max_steps = -1;  // cap the step count; -1 = duration/dt
};

// Simulate one scene under one solver variant. Solver failures mark the record
// failed (with the step's diagnostic) instead of throwing; scene-construction
// problems still throw.
RunRecord run_scene(const SceneSpec& spec, const RunOptions& options);

// Cross product of scenes x variants on worker threads. Per-run step CSVs and
// an aggregate CSV land under out_dir (written atomically); empty out_dir
// skips the files. Failed runs are recorded and the sweep continues.
std::vector<RunRecord> run_benchmark(const std::vector<SceneSpec>& specs,
                                     const std::vector<SolverVariant>& variants,
                                     const std::string& out_dir, int jobs = 0,
                                     LinearSolverKind solver = LinearSolverKind::LLT);

// RFC-4180 CSV, one header row. parse(emit(records)) preserves every
// aggregate field exactly.
std::string emit_aggregate_csv(const std::vector<RunRecord>& records);
std::vector<RunRecord> parse_aggregate_csv(const std::string& text);
std::string emit_steps_csv(const RunRecord& record);
std::string emit_aggregate_json(const std::vector<RunRecord>& records);

struct Summary {
    std::string text;  // fixed-width report table
    std::string csv;   // same content, machine-readable
};

// Per-scene table: variant, mean Newton iterations/step, ph under both
// denominators, eigendecompositions, failures, phase times, and ratios vs the
// PN baseline (PN rows report exactly 1.0).
Summary summarize(const std::vector<RunRecord>& records);

void write_file_atomic(const std::string& path, const std::string& content);

} // namespace ppn
