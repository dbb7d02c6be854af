#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "core/block_sparse.hpp"
#include "core/linsolve.hpp"

namespace ppn {

enum class VariantKind { Plain, PN, PDN, PPN };

const char* variant_name(VariantKind k);
VariantKind variant_from_name(const std::string& name);

struct SolverVariant {
    VariantKind kind = VariantKind::PPN;
    double ppn_alpha = 0.5;  // tightening factor
    double ppn_beta = 2.0;   // release factor
    int pdn_countdown = 4;
    EigenFilter filter;  // Clamp, floor 1e-8

    void check() const;
};

enum class SimMode { Dynamic, Quasistatic };

struct ConvergenceCriterion {
    SimMode mode = SimMode::Dynamic;
    double dt = 1.0 / 30.0;      // Dynamic
    double tol_v = 1e-3;         // m/s, Dynamic
    double domain_size = 1.0;    // rest bounding-box diagonal, Quasistatic
};

// Dynamic: velocity step ||dx||_inf / dt < tol_v. Quasistatic: ||dx||_inf
// below 0.1% of the domain size.
bool check_converged(std::span<const double> dx, const ConvergenceCriterion& crit);

struct DeltaEvent {
    enum class Kind { Init, Tighten, Release };
    Kind kind;
    double value;   // delta after the event
    int iteration;  // outer Newton iteration (1-based)
};

struct ProjectionLedger {
    double delta = std::numeric_limits<double>::infinity();
    std::vector<char> projected;  // per element, current iteration only

    long long projection_attempts = 0;  // submissions to project_spd
    long long eigendecompositions = 0;  // pre-check failed, full decomposition ran
    long long modified = 0;             // filter changed the matrix
    long long solve_failures = 0;       // Indefinite / iteration-cap / non-descent outcomes
    std::vector<DeltaEvent> history;
};

struct IterationRecord {
    int iteration = 0;  // 1-based outer index
    bool accepted = false;
    int solve_attempts = 0;
    int elements_projected = 0;  // projected-set size at end of iteration
    int projection_attempts = 0;
    int eigendecompositions = 0;
    int modified = 0;
    double residual_inf = 0.0;  // ||g||_inf at iteration start
    double dir_dot_g = 0.0;     // descent product of the unscaled step
    double gamma = 0.0;
    int line_search_steps = 0;
    double step_inf = 0.0;  // ||gamma dx||_inf
    double energy = 0.0;    // after the accepted step
};

enum class SolveResult { Converged, SolveFailure, LineSearchFailure, IterationLimit };

const char* solve_result_name(SolveResult r);

struct StepReport {
    SolveResult status = SolveResult::Converged;
    bool converged = false;
    int newton_iterations = 0;  // accepted steps
    std::vector<IterationRecord> records;
    ProjectionLedger ledger;
    int candidate_elements = 0;  // elements subject to projection bookkeeping

    bool validation_ran = false;
    bool validation_passed = false;

    double t_assemble = 0.0, t_project = 0.0, t_solve = 0.0, t_linesearch = 0.0, t_other = 0.0,
           t_total = 0.0;
};

enum class LinearSolverKind { LLT, PCG };

struct MinimizeOptions {
    LinearSolverKind solver = LinearSolverKind::LLT;
    int max_iterations = 500;
    bool validate_final = false;  // fully projected LLT cross-check after convergence
    std::function<void(const IterationRecord&)> observer;
};

// Elements whose local residual exceeds delta and which are not yet in the
// projected set; provably-SPD elements are never candidates. Ascending ids.
std::vector<int> select_elements(const ElementSystem& sys, std::span<const double> g, double delta,
                                 const ProjectionLedger& ledger);

// Backtracking Armijo line search (c = 1e-4): largest gamma in {1, 1/2, ...}
// with finite energy and sufficient decrease. Returns 0 after 64 halvings;
// steps_out counts energy evaluations.
double line_search(const ElementSystem& sys, std::span<const double> x, std::span<const double> dx,
                   double dir_dot_g, double energy0, int& steps_out);

// One nonlinear solve of the assembled potential from x (modified in place).
StepReport minimize(const ElementSystem& sys, std::vector<double>& x, const SolverVariant& variant,
                    const ConvergenceCriterion& crit, const MinimizeOptions& opts = {});

} // namespace ppn
