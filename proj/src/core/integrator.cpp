#include "core/integrator.hpp"

#include <cstring>

namespace ppn {

void SimState::check() const {
    if (dim != 2 && dim != 3) fail(ErrorCode::ValidationError, "state: dim must be 2 or 3");
    const std::size_t n = mass.size();
    if (x.size() != n * static_cast<std::size_t>(dim) || v.size() != x.size())
        fail(ErrorCode::ValidationError, "state: inconsistent sizes");
    for (double m : mass)
        if (!(m > 0.0)) fail(ErrorCode::ValidationError, "state: masses must be > 0");
}

std::vector<double> predict(const SimState& state, const StepConfig& config) {
    const double dt = config.dt;
    if (!(dt > 0.0)) fail(ErrorCode::ValidationError, "predict: dt must be > 0");
    std::vector<double> xt(state.x.size());
    const int d = state.dim;
    for (int i = 0; i < state.n_nodes(); ++i)
        for (int c = 0; c < d; ++c) {
            const std::size_t k = static_cast<std::size_t>(i * d + c);
            xt[k] = state.x[k] + dt * state.v[k] + dt * dt * config.gravity[static_cast<std::size_t>(c)];
        }
    return xt;
}

double kinetic_energy(const SimState& state) {
    double e = 0.0;
    const int d = state.dim;
    for (int i = 0; i < state.n_nodes(); ++i) {
        double v2 = 0.0;
        for (int c = 0; c < d; ++c) {
            const double vc = state.v[static_cast<std::size_t>(i * d + c)];
            v2 += vc * vc;
        }
        e += 0.5 * state.mass[static_cast<std::size_t>(i)] * v2;
    }
    return e;
}

double elastic_energy(const ElementSystem& sys, std::span<const double> x) {
    double sum = 0.0;
    ElementEval ev;
    for (const auto& el : sys.elements) {
        if (std::strcmp(el->name(), "inertia") == 0) continue;
        if (!el->eval(x, EvalMode::EnergyOnly, ev)) return std::numeric_limits<double>::infinity();
        sum += ev.energy;
    }
    return sum;
}

StepOutcome step(SimState& state, const ElementSystem& sys, const StepConfig& config,
                 const SolverVariant& variant, const MinimizeOptions& opts) {
    state.check();
    StepOutcome out;
    std::vector<double> x_new = state.x;
    out.report = minimize(sys, x_new, variant, config.criterion(), opts);
    if (!out.report.converged) return out;

    const double inv_dt = 1.0 / config.dt;
    for (std::size_t i = 0; i < state.x.size(); ++i) state.v[i] = (x_new[i] - state.x[i]) * inv_dt;
    state.x = std::move(x_new);
    state.t += config.dt;
    out.kinetic = kinetic_energy(state);
    out.elastic = elastic_energy(sys, state.x);
    return out;
}

StepOutcome quasistatic_solve(SimState& state, const ElementSystem& sys, const StepConfig& config,
                              const SolverVariant& variant, const MinimizeOptions& opts) {
    StepOutcome out;
    std::vector<double> x_new = state.x;
    ConvergenceCriterion crit = config.criterion();
    crit.mode = SimMode::Quasistatic;
    out.report = minimize(sys, x_new, variant, crit, opts);
    if (!out.report.converged) return out;

    state.x = std::move(x_new);
    std::fill(state.v.begin(), state.v.end(), 0.0);
    state.t += config.dt;
    out.elastic = elastic_energy(sys, state.x);
    return out;
}

} // namespace ppn
