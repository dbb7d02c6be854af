#include "core/newton.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace ppn {

const char* variant_name(VariantKind k) {
    switch (k) {
        case VariantKind::Plain: return "plain";
        case VariantKind::PN: return "pn";
        case VariantKind::PDN: return "pdn";
        case VariantKind::PPN: return "ppn";
    }
    return "?";
}

VariantKind variant_from_name(const std::string& name) {
    if (name == "plain") return VariantKind::Plain;
    if (name == "pn") return VariantKind::PN;
    if (name == "pdn") return VariantKind::PDN;
    if (name == "ppn") return VariantKind::PPN;
    fail(ErrorCode::InvalidArgument, "unknown solver variant: " + name);
}

const char* solve_result_name(SolveResult r) {
    switch (r) {
        case SolveResult::Converged: return "converged";
        case SolveResult::SolveFailure: return "solve_failure";
        case SolveResult::LineSearchFailure: return "line_search_failure";
        case SolveResult::IterationLimit: return "iteration_limit";
    }
    return "?";
}

void SolverVariant::check() const {
    if (!(ppn_alpha > 0.0 && ppn_alpha < 1.0))
        fail(ErrorCode::ValidationError, "variant: alpha must be in (0,1)");
    if (!(ppn_beta >= 1.0)) fail(ErrorCode::ValidationError, "variant: beta must be >= 1");
    if (pdn_countdown < 1) fail(ErrorCode::ValidationError, "variant: countdown must be >= 1");
    if (!(filter.floor > 0.0)) fail(ErrorCode::ValidationError, "variant: filter floor must be > 0");
}

namespace {

double inf_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

bool converged_inf(double step_inf, const ConvergenceCriterion& crit) {
    if (crit.mode == SimMode::Dynamic) return step_inf / crit.dt < crit.tol_v;
    return step_inf < 1e-3 * crit.domain_size;
}

} // namespace

bool check_converged(std::span<const double> dx, const ConvergenceCriterion& crit) {
    return converged_inf(inf_norm(dx), crit);
}

std::vector<int> select_elements(const ElementSystem& sys, std::span<const double> g, double delta,
                                 const ProjectionLedger& ledger) {
    std::vector<int> out;
    if (!(delta < std::numeric_limits<double>::infinity())) return out;
    for (std::size_t e = 0; e < sys.elements.size(); ++e) {
        const Element& el = *sys.elements[e];
        if (el.provably_spd() || ledger.projected[e]) continue;
        if (element_residual_inf(g, el.stencil(), sys.dim) > delta) out.push_back(static_cast<int>(e));
    }
    return out;
}

double line_search(const ElementSystem& sys, std::span<const double> x, std::span<const double> dx,
                   double dir_dot_g, double energy0, int& steps_out) {
    constexpr double c = 1e-4;
    constexpr int max_halvings = 64;
    std::vector<double> xt(x.size());
    double gamma = 1.0;
    steps_out = 0;
    for (int i = 0; i <= max_halvings; ++i) {
        for (std::size_t j = 0; j < x.size(); ++j) xt[j] = x[j] + gamma * dx[j];
        ++steps_out;
        const double e = total_energy(sys, xt);
        if (std::isfinite(e) && e <= energy0 + c * gamma * dir_dot_g) return gamma;
        gamma *= 0.5;
    }
    return 0.0;
}

StepReport minimize(const ElementSystem& sys, std::vector<double>& x, const SolverVariant& variant,
                    const ConvergenceCriterion& crit, const MinimizeOptions& opts) {
    variant.check();
    if (static_cast<int>(x.size()) != sys.n_dof())
        fail(ErrorCode::InvalidArgument, "minimize: state size mismatch");

    using clock = std::chrono::steady_clock;
    const auto t_start = clock::now();
    auto secs = [](clock::time_point a, clock::time_point b) {
        return std::chrono::duration<double>(b - a).count();
    };

    const int n_elem = static_cast<int>(sys.elements.size());
    StepReport rep;
    ProjectionLedger& led = rep.ledger;
    led.projected.assign(static_cast<std::size_t>(n_elem), 0);
    for (const auto& el : sys.elements)
        if (!el->provably_spd()) rep.candidate_elements++;

    std::vector<ElementStencil> stencils;
    stencils.reserve(static_cast<std::size_t>(n_elem));
    for (const auto& el : sys.elements) stencils.push_back(el->stencil());
    BlockSparseMatrix h = build_sparsity(stencils, sys.n_nodes, sys.dim);
    SparseLLT llt(h);

    std::vector<double> g, neg_g, dx;
    AssemblyCache cache;

    auto project_ids = [&](const std::vector<int>& ids) {
        const auto t0 = clock::now();
        for (int e : ids) {
            if (led.projected[static_cast<std::size_t>(e)]) continue;
            const ProjectResult pr = project_spd(cache.evals[static_cast<std::size_t>(e)].hess, variant.filter);
            led.projection_attempts++;
            if (pr.decomposed) led.eigendecompositions++;
            if (pr.modified) {
                led.modified++;
                scatter_delta(h, sys.elements[static_cast<std::size_t>(e)]->stencil(),
                              pr.matrix - cache.evals[static_cast<std::size_t>(e)].hess);
            }
            led.projected[static_cast<std::size_t>(e)] = 1;
        }
        rep.t_project += secs(t0, clock::now());
    };
    auto remaining_candidates = [&]() {
        std::vector<int> ids;
        for (int e = 0; e < n_elem; ++e)
            if (!sys.elements[static_cast<std::size_t>(e)]->provably_spd() && !led.projected[static_cast<std::size_t>(e)])
                ids.push_back(e);
        return ids;
    };

    int attempts_this_iter = 0;
    auto try_solve = [&]() -> bool {
        ++attempts_this_iter;
        const auto t0 = clock::now();
        SolveOutcome out;
        if (opts.solver == LinearSolverKind::LLT) {
            out = llt.solve(h, neg_g);
        } else {
            const BlockJacobiPreconditioner pc = build_block_jacobi(h);
            out = pcg_solve(h, neg_g, &pc);
        }
        rep.t_solve += secs(t0, clock::now());
        if (out.status == SolveStatus::Solved) {
            double dd = 0.0;
            for (std::size_t i = 0; i < out.step.size(); ++i) dd += out.step[i] * g[i];
            if (inf_norm(out.step) == 0.0 || dd < 0.0) {
                dx = std::move(out.step);
                return true;
            }
        }
        led.solve_failures++;
        return false;
    };

    int pdn_count = 0;
    rep.status = SolveResult::IterationLimit;

    for (int iter = 1; iter <= opts.max_iterations; ++iter) {
        std::fill(led.projected.begin(), led.projected.end(), 0);
        attempts_this_iter = 0;
        const long long snap_pa = led.projection_attempts;
        const long long snap_eig = led.eigendecompositions;
        const long long snap_mod = led.modified;

        IterationRecord rec;
        rec.iteration = iter;

        auto t0 = clock::now();
        assemble(sys, x, h, g, cache);
        rep.t_assemble += secs(t0, clock::now());
        double e0 = 0.0;
        for (const auto& ev : cache.evals) e0 += ev.energy;
        rec.residual_inf = inf_norm(g);
        rec.energy = e0;
        neg_g.resize(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) neg_g[i] = -g[i];

        bool ok = false;
        switch (variant.kind) {
            case VariantKind::Plain:
                ok = try_solve();
                break;
            case VariantKind::PN:
                project_ids(remaining_candidates());
                ok = try_solve();
                break;
            case VariantKind::PDN:
                if (pdn_count > 0) {
                    project_ids(remaining_candidates());
                    --pdn_count;
                    ok = try_solve();
                } else {
                    ok = try_solve();
                    if (!ok) {
                        project_ids(remaining_candidates());
                        pdn_count = variant.pdn_countdown;
                        ok = try_solve();
                    }
                }
                break;
            case VariantKind::PPN: {
                ok = try_solve();
                if (!ok) {
                    const double g_inf = rec.residual_inf;
                    const double delta_floor = 1e-12 * g_inf;
                    int tightens = 0;
                    bool full = false;
                    while (true) {
                        if (led.delta == std::numeric_limits<double>::infinity()) {
                            if (g_inf == 0.0) {
                                // zero gradient with an indefinite solve: the residual
                                // heuristic cannot select anything, fall back to everything
                                project_ids(remaining_candidates());
                                full = true;
                            } else {
                                led.delta = variant.ppn_alpha * g_inf;
                                led.history.push_back({DeltaEvent::Kind::Init, led.delta, iter});
                            }
                        }
                        if (!full) {
                            if (led.delta < delta_floor || tightens >= 50) {
                                project_ids(remaining_candidates());
                                full = true;
                            } else {
                                project_ids(select_elements(sys, g, led.delta, led));
                            }
                        }
                        ok = try_solve();
                        if (ok || full) break;
                        led.delta *= variant.ppn_alpha;
                        ++tightens;
                        led.history.push_back({DeltaEvent::Kind::Tighten, led.delta, iter});
                    }
                }
                break;
            }
        }

        auto finalize = [&](IterationRecord& r) {
            r.solve_attempts = attempts_this_iter;
            r.elements_projected =
                static_cast<int>(std::count(led.projected.begin(), led.projected.end(), char(1)));
            r.projection_attempts = static_cast<int>(led.projection_attempts - snap_pa);
            r.eigendecompositions = static_cast<int>(led.eigendecompositions - snap_eig);
            r.modified = static_cast<int>(led.modified - snap_mod);
            rep.records.push_back(r);
            if (opts.observer) opts.observer(rep.records.back());
        };

        if (!ok) {
            rep.status = SolveResult::SolveFailure;
            finalize(rec);
            break;
        }

        if (variant.kind == VariantKind::PPN && std::isfinite(led.delta)) {
            led.delta *= variant.ppn_beta;
            led.history.push_back({DeltaEvent::Kind::Release, led.delta, iter});
        }

        const double dx_inf = inf_norm(dx);
        if (dx_inf == 0.0) {
            // exact stationary point; no step to take or count
            rep.status = SolveResult::Converged;
            rep.converged = true;
            finalize(rec);
            break;
        }

        double dd = 0.0;
        for (std::size_t i = 0; i < dx.size(); ++i) dd += dx[i] * g[i];
        rec.dir_dot_g = dd;

        t0 = clock::now();
        int ls_steps = 0;
        const double gamma = line_search(sys, x, dx, dd, e0, ls_steps);
        rep.t_linesearch += secs(t0, clock::now());
        rec.line_search_steps = ls_steps;
        if (gamma == 0.0) {
            rep.status = SolveResult::LineSearchFailure;
            finalize(rec);
            break;
        }

        for (std::size_t i = 0; i < x.size(); ++i) x[i] += gamma * dx[i];
        rec.gamma = gamma;
        rec.step_inf = gamma * dx_inf;
        rec.energy = total_energy(sys, x);
        rec.accepted = true;
        rep.newton_iterations++;
        finalize(rec);

        if (converged_inf(rec.step_inf, crit)) {
            rep.status = SolveResult::Converged;
            rep.converged = true;
            break;
        }
    }

    rep.t_total = secs(t_start, clock::now());
    rep.t_other = std::max(0.0, rep.t_total - rep.t_assemble - rep.t_project - rep.t_solve - rep.t_linesearch);

    // Fully projected cross-check of the converged state; outside the timed
    // phases and the projection counters.
    if (opts.validate_final && rep.converged) {
        rep.validation_ran = true;
        assemble(sys, x, h, g, cache);
        for (int e = 0; e < n_elem; ++e) {
            const Element& el = *sys.elements[static_cast<std::size_t>(e)];
            if (el.provably_spd()) continue;
            const ProjectResult pr = project_spd(cache.evals[static_cast<std::size_t>(e)].hess, variant.filter);
            if (pr.modified) scatter_delta(h, el.stencil(), pr.matrix - cache.evals[static_cast<std::size_t>(e)].hess);
        }
        neg_g.resize(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) neg_g[i] = -g[i];
        rep.validation_passed = llt.solve(h, neg_g).status == SolveStatus::Solved;
    }
    return rep;
}

} // namespace ppn
