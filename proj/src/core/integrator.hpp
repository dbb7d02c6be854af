#pragma once

#include <array>

#include "core/newton.hpp"

namespace ppn {

struct SimState {
    int dim = 2;
    std::vector<double> x;     // n_nodes * dim
    std::vector<double> v;     // n_nodes * dim
    std::vector<double> mass;  // per node, kg
    double t = 0.0;

    int n_nodes() const { return static_cast<int>(mass.size()); }
    void check() const;
};

struct StepConfig {
    double dt = 1.0 / 30.0;
    SimMode mode = SimMode::Dynamic;
    double tol_v = 1e-3;                              // m/s
    std::array<double, 3> gravity = {0.0, -9.81, 0.0};  // first dim components used
    double domain_size = 1.0;                          // rest bounding-box diagonal

    ConvergenceCriterion criterion() const { return {mode, dt, tol_v, domain_size}; }
};

// Inertial target x~ = x + dt v + dt^2 g (gravity folded in here rather than
// as force elements).
std::vector<double> predict(const SimState& state, const StepConfig& config);

double kinetic_energy(const SimState& state);

// Total energy of the non-inertia elements at x.
double elastic_energy(const ElementSystem& sys, std::span<const double> x);

struct StepOutcome {
    StepReport report;
    double kinetic = 0.0;  // after the step
    double elastic = 0.0;
};

// One backward-Euler step over a prebuilt element system (inertia elements
// included by the caller, targeted at predict()'s x~). On success x, v, t
// advance and v' = (x' - x)/dt exactly; on failure the state is untouched and
// the report carries the diagnostics.
StepOutcome step(SimState& state, const ElementSystem& sys, const StepConfig& config,
                 const SolverVariant& variant, const MinimizeOptions& opts = {});

// Inertia-free equilibrium solve; convergence against the domain size, time
// advances by dt (script clock), velocities stay zero.
StepOutcome quasistatic_solve(SimState& state, const ElementSystem& sys, const StepConfig& config,
                              const SolverVariant& variant, const MinimizeOptions& opts = {});

} // namespace ppn
