#include "core/energies.hpp"

#include <algorithm>
#include <cmath>

namespace ppn {

void MaterialParams::check() const {
    if (!(youngs_modulus > 0.0)) fail(ErrorCode::ValidationError, "material: youngs_modulus must be > 0");
    if (!(poisson_ratio >= 0.0 && poisson_ratio < 0.5))
        fail(ErrorCode::ValidationError, "material: poisson_ratio must be in [0, 0.5)");
}

void BarrierParams::check() const {
    if (!(dhat > 0.0)) fail(ErrorCode::ValidationError, "barrier: dhat must be > 0");
    if (!(kappa > 0.0)) fail(ErrorCode::ValidationError, "barrier: kappa must be > 0");
}

TriRef make_tri_ref(const Eigen::Matrix<double, 2, 3>& rest, double thickness) {
    Eigen::Matrix2d dm;
    dm.col(0) = rest.col(1) - rest.col(0);
    dm.col(1) = rest.col(2) - rest.col(0);
    const double det = dm.determinant();
    if (!(det > 1e-14)) fail(ErrorCode::InvalidArgument, "tri: degenerate or inverted rest shape");
    if (!(thickness > 0.0)) fail(ErrorCode::InvalidArgument, "tri: thickness must be > 0");
    TriRef ref;
    ref.Bm = dm.inverse();
    ref.W = 0.5 * det * thickness;
    return ref;
}

TetRef make_tet_ref(const Eigen::Matrix<double, 3, 4>& rest) {
    Eigen::Matrix3d dm;
    for (int c = 0; c < 3; ++c) dm.col(c) = rest.col(c + 1) - rest.col(0);
    const double det = dm.determinant();
    if (!(det > 1e-18)) fail(ErrorCode::InvalidArgument, "tet: degenerate or inverted rest shape");
    TetRef ref;
    ref.Bm = dm.inverse();
    ref.vol = det / 6.0;
    return ref;
}

bool inertia_eval(std::span<const double> x, std::span<const double> xtilde, double mass,
                  double dt, int dim, EvalMode mode, ElementEval& out) {
    const double c = mass / (dt * dt);
    double e = 0.0;
    for (int i = 0; i < dim; ++i) {
        const double d = x[static_cast<std::size_t>(i)] - xtilde[static_cast<std::size_t>(i)];
        e += d * d;
    }
    out.energy = 0.5 * c * e;
    if (mode == EvalMode::EnergyOnly) return true;
    out.grad.set_zero(dim);
    out.hess = SymMatrix(dim);
    for (int i = 0; i < dim; ++i) {
        out.grad[i] = c * (x[static_cast<std::size_t>(i)] - xtilde[static_cast<std::size_t>(i)]);
        out.hess.set(i, i, c);
    }
    return true;
}

bool dirichlet_eval(std::span<const double> x, std::span<const double> target, double stiffness,
                    int dim, EvalMode mode, ElementEval& out) {
    double e = 0.0;
    for (int i = 0; i < dim; ++i) {
        const double d = x[static_cast<std::size_t>(i)] - target[static_cast<std::size_t>(i)];
        e += d * d;
    }
    out.energy = 0.5 * stiffness * e;
    if (mode == EvalMode::EnergyOnly) return true;
    out.grad.set_zero(dim);
    out.hess = SymMatrix(dim);
    for (int i = 0; i < dim; ++i) {
        out.grad[i] = stiffness * (x[static_cast<std::size_t>(i)] - target[static_cast<std::size_t>(i)]);
        out.hess.set(i, i, stiffness);
    }
    return true;
}

bool spring_eval(std::span<const double> xa, std::span<const double> xb, double rest_length,
                 double stiffness, int dim, EvalMode mode, ElementEval& out) {
    Eigen::Vector3d d = Eigen::Vector3d::Zero();
    for (int i = 0; i < dim; ++i) d[i] = xa[static_cast<std::size_t>(i)] - xb[static_cast<std::size_t>(i)];
    const double len = d.norm();
    if (len == 0.0) return false;
    const double s = len - rest_length;
    out.energy = 0.5 * stiffness * s * s;
    if (mode == EvalMode::EnergyOnly) return true;

    const Eigen::Vector3d u = d / len;
    const int n = 2 * dim;
    out.grad.set_zero(n);
    out.hess = SymMatrix(n);
    for (int i = 0; i < dim; ++i) {
        const double gi = stiffness * s * u[i];
        out.grad[i] = gi;
        out.grad[dim + i] = -gi;
    }
    // k [u u^T + (1 - L0/L)(I - u u^T)] on the diagonal blocks, negated off-diagonal.
    const double t = 1.0 - rest_length / len;
    for (int i = 0; i < dim; ++i) {
        for (int j = i; j < dim; ++j) {
            const double uij = u[i] * u[j];
            const double kij = stiffness * (uij + t * ((i == j ? 1.0 : 0.0) - uij));
            out.hess.set(i, j, kij);
            out.hess.set(dim + i, dim + j, kij);
            out.hess.set(i, dim + j, -kij);
            if (i != j) out.hess.set(j, dim + i, -kij);
        }
    }
    return true;
}

bool neohookean_tri_eval(const Eigen::Matrix<double, 2, 3>& x, const TriRef& ref,
                         const MaterialParams& mat, EvalMode mode, ElementEval& out) {
    Eigen::Matrix2d ds;
    ds.col(0) = x.col(1) - x.col(0);
    ds.col(1) = x.col(2) - x.col(0);
    const Eigen::Matrix2d f = ds * ref.Bm;
    const double jdet = f.determinant();
    if (!(jdet > 0.0)) return false;

    const double mu = mat.mu();
    const double lambda = mat.lambda();
    const double logj = std::log(jdet);
    out.energy = ref.W * (0.5 * mu * (f.squaredNorm() - 2.0) - mu * logj + 0.5 * lambda * logj * logj);
    if (mode == EvalMode::EnergyOnly) return true;

    const Eigen::Matrix2d finvt = f.inverse().transpose();
    const Eigen::Matrix2d p = mu * f + (lambda * logj - mu) * finvt;
    const Eigen::Matrix2d g = ref.W * p * ref.Bm.transpose();  // columns: forces on verts 1, 2

    out.grad.set_zero(6);
    for (int c = 0; c < 2; ++c) {
        out.grad[2 + c] = g(c, 0);
        out.grad[4 + c] = g(c, 1);
        out.grad[c] = -g(c, 0) - g(c, 1);
    }

    // dF basis per local DOF: dF = dDs * Bm with unit edge-column deltas.
    std::array<Eigen::Matrix2d, 6> df;
    for (int k = 0; k < 3; ++k) {
        for (int c = 0; c < 2; ++c) {
            Eigen::Matrix2d dds = Eigen::Matrix2d::Zero();
            if (k == 0) {
                dds(c, 0) = -1.0;
                dds(c, 1) = -1.0;
            } else {
                dds(c, k - 1) = 1.0;
            }
            df[static_cast<std::size_t>(2 * k + c)] = dds * ref.Bm;
        }
    }

    out.hess = SymMatrix(6);
    for (int w = 0; w < 6; ++w) {
        const Eigen::Matrix2d& dfw = df[static_cast<std::size_t>(w)];
        const double tr = (finvt.array() * dfw.array()).sum();  // F^{-T} : dF
        const Eigen::Matrix2d dp = mu * dfw + lambda * tr * finvt -
                                   (lambda * logj - mu) * finvt * dfw.transpose() * finvt;
        for (int u = 0; u <= w; ++u)
            out.hess.set(u, w, ref.W * (dp.array() * df[static_cast<std::size_t>(u)].array()).sum());
    }
    return true;
}

namespace {

Eigen::Matrix3d cof3(const Eigen::Matrix3d& f) {
    Eigen::Matrix3d c;
    c.col(0) = f.col(1).cross(f.col(2));
    c.col(1) = f.col(2).cross(f.col(0));
    c.col(2) = f.col(0).cross(f.col(1));
    return c;
}

Eigen::Matrix3d dcof3(const Eigen::Matrix3d& f, const Eigen::Matrix3d& df) {
    Eigen::Matrix3d c;
    c.col(0) = df.col(1).cross(f.col(2)) + f.col(1).cross(df.col(2));
    c.col(1) = df.col(2).cross(f.col(0)) + f.col(2).cross(df.col(0));
    c.col(2) = df.col(0).cross(f.col(1)) + f.col(0).cross(df.col(1));
    return c;
}

} // namespace

bool stable_neohookean_tet_eval(const Eigen::Matrix<double, 3, 4>& x, const TetRef& ref,
                                const MaterialParams& mat, EvalMode mode, ElementEval& out) {
    Eigen::Matrix3d ds;
    for (int c = 0; c < 3; ++c) ds.col(c) = x.col(c + 1) - x.col(0);
    const Eigen::Matrix3d f = ds * ref.Bm;
    const double jdet = f.determinant();

    const double mu = mat.mu();
    const double lh = mat.lambda() + mu;  // reparameterized Lame constant
    const double alpha = 1.0 + mu / lh;   // makes the rest state F = I a critical point
    const double jr = jdet - alpha;
    out.energy = ref.vol * (0.5 * mu * (f.squaredNorm() - 3.0) + 0.5 * lh * jr * jr);
    if (mode == EvalMode::EnergyOnly) return true;

    const Eigen::Matrix3d cf = cof3(f);
    const Eigen::Matrix3d p = mu * f + lh * jr * cf;
    const Eigen::Matrix3d g = ref.vol * p * ref.Bm.transpose();

    out.grad.set_zero(12);
    for (int c = 0; c < 3; ++c) {
        double sum = 0.0;
        for (int k = 1; k < 4; ++k) {
            out.grad[3 * k + c] = g(c, k - 1);
            sum += g(c, k - 1);
        }
        out.grad[c] = -sum;
    }

    std::array<Eigen::Matrix3d, 12> df;
    for (int k = 0; k < 4; ++k) {
        for (int c = 0; c < 3; ++c) {
            Eigen::Matrix3d dds = Eigen::Matrix3d::Zero();
            if (k == 0) {
                dds.row(c).setConstant(-1.0);
            } else {
                dds(c, k - 1) = 1.0;
            }
            df[static_cast<std::size_t>(3 * k + c)] = dds * ref.Bm;
        }
    }

    out.hess = SymMatrix(12);
    for (int w = 0; w < 12; ++w) {
        const Eigen::Matrix3d& dfw = df[static_cast<std::size_t>(w)];
        const double cdot = (cf.array() * dfw.array()).sum();  // cof F : dF = dJ
        const Eigen::Matrix3d dp = mu * dfw + lh * cdot * cf + lh * jr * dcof3(f, dfw);
        for (int u = 0; u <= w; ++u)
            out.hess.set(u, w, ref.vol * (dp.array() * df[static_cast<std::size_t>(u)].array()).sum());
    }
    return true;
}

bool halfspace_barrier_eval(std::span<const double> x, std::span<const double> normal,
                            double offset, const BarrierParams& bp, int dim, EvalMode mode,
                            ElementEval& out) {
    double d = -offset;
    for (int i = 0; i < dim; ++i) d += normal[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
    if (d <= 0.0) return false;

    if (d >= bp.dhat) {
        out.energy = 0.0;
        if (mode != EvalMode::EnergyOnly) {
            out.grad.set_zero(dim);
            out.hess = SymMatrix(dim);
        }
        return true;
    }

    const double s = d - bp.dhat;
    const double l = std::log(d / bp.dhat);
    out.energy = -bp.kappa * s * s * l;
    if (mode == EvalMode::EnergyOnly) return true;

    const double b1 = -bp.kappa * (2.0 * s * l + s * s / d);
    const double b2 = -bp.kappa * (2.0 * l + 4.0 * s / d - s * s / (d * d));
    out.grad.set_zero(dim);
    out.hess = SymMatrix(dim);
    for (int i = 0; i < dim; ++i) {
        out.grad[i] = b1 * normal[static_cast<std::size_t>(i)];
        for (int j = i; j < dim; ++j)
            out.hess.set(i, j, b2 * normal[static_cast<std::size_t>(i)] * normal[static_cast<std::size_t>(j)]);
    }
    return true;
}

// --- Element wrappers -------------------------------------------------------

namespace {

void check_node(int node) {
    if (node < 0) fail(ErrorCode::IndexOutOfRange, "element: negative node index");
}

void check_dim(int dim) {
    if (dim != 2 && dim != 3) fail(ErrorCode::InvalidArgument, "element: dim must be 2 or 3");
}

// Sorted unique stencil plus natural-slot -> stencil-slot map.
template <std::size_t N>
std::vector<int> make_stencil(const std::array<int, N>& verts, std::array<int, N>& perm) {
    std::vector<int> nodes(verts.begin(), verts.end());
    std::sort(nodes.begin(), nodes.end());
    if (std::adjacent_find(nodes.begin(), nodes.end()) != nodes.end())
        fail(ErrorCode::InvalidArgument, "element: repeated node in stencil");
    for (std::size_t i = 0; i < N; ++i) {
        check_node(verts[i]);
        perm[i] = static_cast<int>(std::lower_bound(nodes.begin(), nodes.end(), verts[i]) - nodes.begin());
    }
    return nodes;
}

// Reorders a natural-order evaluation (vertex-major DOFs) into stencil order.
template <std::size_t N>
void permute_eval(const std::array<int, N>& perm, int dim, ElementEval& ev) {
    bool identity = true;
    for (std::size_t i = 0; i < N; ++i) identity = identity && perm[i] == static_cast<int>(i);
    if (identity) return;

    const int n = static_cast<int>(N) * dim;
    LocalVec grad;
    grad.set_zero(n);
    SymMatrix hess(n);
    for (std::size_t a = 0; a < N; ++a) {
        for (int r = 0; r < dim; ++r) {
            grad[perm[a] * dim + r] = ev.grad[static_cast<int>(a) * dim + r];
            for (std::size_t b = 0; b < N; ++b)
                for (int c = 0; c < dim; ++c)
                    hess.set(perm[a] * dim + r, perm[b] * dim + c,
                             ev.hess(static_cast<int>(a) * dim + r, static_cast<int>(b) * dim + c));
        }
    }
    ev.grad = grad;
    ev.hess = hess;
}

} // namespace

InertiaElement::InertiaElement(int node, int dim, double mass, double dt,
                               std::span<const double> xtilde)
    : dim_(dim), mass_(mass), dt_(dt) {
    check_node(node);
    check_dim(dim);
    if (!(mass > 0.0)) fail(ErrorCode::InvalidArgument, "inertia: mass must be > 0");
    if (!(dt > 0.0)) fail(ErrorCode::InvalidArgument, "inertia: dt must be > 0");
    stencil_.nodes = {node};
    for (int i = 0; i < dim; ++i) xt_[static_cast<std::size_t>(i)] = xtilde[static_cast<std::size_t>(i)];
}

bool InertiaElement::eval(std::span<const double> x, EvalMode mode, ElementEval& out) const {
    const int node = stencil_.nodes[0];
    return inertia_eval(x.subspan(static_cast<std::size_t>(node * dim_), static_cast<std::size_t>(dim_)),
                        std::span<const double>(xt_.data(), static_cast<std::size_t>(dim_)), mass_, dt_,
                        dim_, mode, out);
}

DirichletElement::DirichletElement(int node, int dim, std::span<const double> target, double stiffness)
    : dim_(dim), k_(stiffness) {
    check_node(node);
    check_dim(dim);
    if (!(stiffness > 0.0)) fail(ErrorCode::InvalidArgument, "dirichlet: stiffness must be > 0");
    stencil_.nodes = {node};
    for (int i = 0; i < dim; ++i) target_[static_cast<std::size_t>(i)] = target[static_cast<std::size_t>(i)];
}

bool DirichletElement::eval(std::span<const double> x, EvalMode mode, ElementEval& out) const {
    const int node = stencil_.nodes[0];
    return dirichlet_eval(x.subspan(static_cast<std::size_t>(node * dim_), static_cast<std::size_t>(dim_)),
                          std::span<const double>(target_.data(), static_cast<std::size_t>(dim_)), k_,
                          dim_, mode, out);
}

SpringElement::SpringElement(int node_a, int node_b, int dim, double rest_length, double stiffness)
    : dim_(dim), verts_{node_a, node_b}, rest_length_(rest_length), k_(stiffness) {
    check_dim(dim);
    if (!(stiffness > 0.0)) fail(ErrorCode::InvalidArgument, "spring: stiffness must be > 0");
    if (!(rest_length > 0.0)) fail(ErrorCode::InvalidArgument, "spring: rest length must be > 0");
    stencil_.nodes = make_stencil(verts_, perm_);
}

bool SpringElement::eval(std::span<const double> x, EvalMode mode, ElementEval& out) const {
    const auto at = [&](int v) {
        return x.subspan(static_cast<std::size_t>(v * dim_), static_cast<std::size_t>(dim_));
    };
    if (!spring_eval(at(verts_[0]), at(verts_[1]), rest_length_, k_, dim_, mode, out)) return false;
    if (mode == EvalMode::Full) permute_eval(perm_, dim_, out);
    return true;
}

NeoHookeanTriElement::NeoHookeanTriElement(const std::array<int, 3>& nodes,
                                           const Eigen::Matrix<double, 2, 3>& rest, double thickness,
                                           const MaterialParams& mat)
    : verts_(nodes), ref_(make_tri_ref(rest, thickness)), mat_(mat) {
    mat.check();
    stencil_.nodes = make_stencil(verts_, perm_);
}

bool NeoHookeanTriElement::eval(std::span<const double> x, EvalMode mode, ElementEval& out) const {
    Eigen::Matrix<double, 2, 3> xv;
    for (int k = 0; k < 3; ++k)
        for (int c = 0; c < 2; ++c) xv(c, k) = x[static_cast<std::size_t>(verts_[static_cast<std::size_t>(k)] * 2 + c)];
    if (!neohookean_tri_eval(xv, ref_, mat_, mode, out)) return false;
    if (mode == EvalMode::Full) permute_eval(perm_, 2, out);
    return true;
}

StableNeoHookeanTetElement::StableNeoHookeanTetElement(const std::array<int, 4>& nodes,
                                                       const Eigen::Matrix<double, 3, 4>& rest,
                                                       const MaterialParams& mat)
    : verts_(nodes), ref_(make_tet_ref(rest)), mat_(mat) {
    mat.check();
    stencil_.nodes = make_stencil(verts_, perm_);
}

bool StableNeoHookeanTetElement::eval(std::span<const double> x, EvalMode mode, ElementEval& out) const {
    Eigen::Matrix<double, 3, 4> xv;
    for (int k = 0; k < 4; ++k)
        for (int c = 0; c < 3; ++c) xv(c, k) = x[static_cast<std::size_t>(verts_[static_cast<std::size_t>(k)] * 3 + c)];
    if (!stable_neohookean_tet_eval(xv, ref_, mat_, mode, out)) return false;
    if (mode == EvalMode::Full) permute_eval(perm_, 3, out);
    return true;
}

HalfspaceBarrierElement::HalfspaceBarrierElement(int node, int dim, std::span<const double> normal,
                                                 double offset, const BarrierParams& bp)
    : dim_(dim), offset_(offset), bp_(bp) {
    check_node(node);
    check_dim(dim);
    bp.check();
    double n2 = 0.0;
    for (int i = 0; i < dim; ++i) {
        normal_[static_cast<std::size_t>(i)] = normal[static_cast<std::size_t>(i)];
        n2 += normal_[static_cast<std::size_t>(i)] * normal_[static_cast<std::size_t>(i)];
    }
    if (std::abs(n2 - 1.0) > 1e-10) fail(ErrorCode::InvalidArgument, "barrier: normal must be unit length");
    stencil_.nodes = {node};
}

bool HalfspaceBarrierElement::eval(std::span<const double> x, EvalMode mode, ElementEval& out) const {
    const int node = stencil_.nodes[0];
    return halfspace_barrier_eval(
        x.subspan(static_cast<std::size_t>(node * dim_), static_cast<std::size_t>(dim_)),
        std::span<const double>(normal_.data(), static_cast<std::size_t>(dim_)), offset_, bp_, dim_,
        mode, out);
}

} // namespace ppn
