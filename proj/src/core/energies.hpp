#pragma once

#include <Eigen/Dense>

#include "core/elements.hpp"

namespace ppn {

struct MaterialParams {
    double youngs_modulus = 1e5;  // Pa
    double poisson_ratio = 0.4;

    double mu() const { return youngs_modulus / (2.0 * (1.0 + poisson_ratio)); }
    double lambda() const {
        return youngs_modulus * poisson_ratio /
               ((1.0 + poisson_ratio) * (1.0 - 2.0 * poisson_ratio));
    }
    void check() const;
};

struct BarrierParams {
    double dhat = 5e-4;  // m
    double kappa = 1e4;  // N/m
    void check() const;
};

// Precomputed rest shape of a triangle / tetrahedron: inverse rest-edge
// matrix and integration weight (area*thickness resp. volume).
struct TriRef {
    Eigen::Matrix2d Bm;
    double W = 0.0;
};
struct TetRef {
    Eigen::Matrix3d Bm;
    double vol = 0.0;
};

// Throw InvalidArgument when the rest element is degenerate or inverted.
TriRef make_tri_ref(const Eigen::Matrix<double, 2, 3>& rest, double thickness);
TetRef make_tet_ref(const Eigen::Matrix<double, 3, 4>& rest);

// Free evaluators behind the element classes; each returns false when the
// state is inadmissible (caller treats the energy as +inf). Gradients and
// Hessians are exact analytic derivatives, filled in Full mode.

bool inertia_eval(std::span<const double> x, std::span<const double> xtilde, double mass,
                  double dt, int dim, EvalMode mode, ElementEval& out);

bool dirichlet_eval(std::span<const double> x, std::span<const double> target, double stiffness,
                    int dim, EvalMode mode, ElementEval& out);

bool spring_eval(std::span<const double> xa, std::span<const double> xb, double rest_length,
                 double stiffness, int dim, EvalMode mode, ElementEval& out);

// Plane-strain Neo-Hookean: Psi = mu/2 (tr(F^T F) - 2) - mu ln J + lambda/2 ln^2 J.
bool neohookean_tri_eval(const Eigen::Matrix<double, 2, 3>& x, const TriRef& ref,
                         const MaterialParams& mat, EvalMode mode, ElementEval& out);

// Stable Neo-Hookean: Psi = mu/2 (tr(F^T F) - 3) + lh/2 (J - 1 - mu/lh)^2 with
// lh = lambda + mu; polynomial in F, so finite (and differentiable) under
// inversion, with zero gradient at F = I.
bool stable_neohookean_tet_eval(const Eigen::Matrix<double, 3, 4>& x, const TetRef& ref,
                                const MaterialParams& mat, EvalMode mode, ElementEval& out);

// Log barrier against the half-space n.x >= offset:
//   b(d) = -kappa (d - dhat)^2 ln(d/dhat) on 0 < d < dhat, 0 for d >= dhat.
// C2 at d = dhat; +inf (inadmissible) at d <= 0.
bool halfspace_barrier_eval(std::span<const double> x, std::span<const double> normal,
                            double offset, const BarrierParams& bp, int dim, EvalMode mode,
                            ElementEval& out);

// --- Element wrappers -------------------------------------------------------

class InertiaElement final : public Element {
public:
    InertiaElement(int node, int dim, double mass, double dt, std::span<const double> xtilde);
    bool provably_spd() const override { return true; }
    const char* name() const override { return "inertia"; }
    bool eval(std::span<const double> x, EvalMode mode, ElementEval& out) const override;

private:
    int dim_;
    double mass_, dt_;
    std::array<double, 3> xt_{};
};

class DirichletElement final : public Element {
public:
    DirichletElement(int node, int dim, std::span<const double> target, double stiffness);
    bool provably_spd() const override { return true; }
    const char* name() const override { return "dirichlet"; }
    bool eval(std::span<const double> x, EvalMode mode, ElementEval& out) const override;

private:
    int dim_;
    double k_;
    std::array<double, 3> target_{};
};

class SpringElement final : public Element {
public:
    SpringElement(int node_a, int node_b, int dim, double rest_length, double stiffness);
    const char* name() const override { return "spring"; }
    bool eval(std::span<const double> x, EvalMode mode, ElementEval& out) const override;

private:
    int dim_;
    std::array<int, 2> verts_;  // natural order
    std::array<int, 2> perm_;   // natural slot -> stencil slot
    double rest_length_, k_;
};

class NeoHookeanTriElement final : public Element {
public:
    NeoHookeanTriElement(const std::array<int, 3>& nodes, const Eigen::Matrix<double, 2, 3>& rest,
                         double thickness, const MaterialParams& mat);
    const char* name() const override { return "neohookean_tri"; }
    bool eval(std::span<const double> x, EvalMode mode, ElementEval& out) const override;

private:
    std::array<int, 3> verts_;
    std::array<int, 3> perm_;
    TriRef ref_;
    MaterialParams mat_;
};

class StableNeoHookeanTetElement final : public Element {
public:
    StableNeoHookeanTetElement(const std::array<int, 4>& nodes,
                               const Eigen::Matrix<double, 3, 4>& rest, const MaterialParams& mat);
    const char* name() const override { return "stable_neohookean_tet"; }
    bool eval(std::span<const double> x, EvalMode mode, ElementEval& out) const override;

private:
    std::array<int, 4> verts_;
    std::array<int, 4> perm_;
    TetRef ref_;
    MaterialParams mat_;
};

class HalfspaceBarrierElement final : public Element {
public:
    HalfspaceBarrierElement(int node, int dim, std::span<const double> normal, double offset,
                            const BarrierParams& bp);
    const char* name() const override { return "halfspace_barrier"; }
    bool eval(std::span<const double> x, EvalMode mode, ElementEval& out) const override;

private:
    int dim_;
    double offset_;
    std::array<double, 3> normal_{};
    BarrierParams bp_;
};

} // namespace ppn
