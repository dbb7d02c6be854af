#include "core/linsolve.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "core/smalldense.hpp"

namespace ppn {

namespace {

// Reverse Cuthill-McKee over the block graph; deterministic (ties broken by
// node index), handles disconnected components, pseudo-peripheral start via
// one extra BFS.
std::vector<int> rcm_block_order(const BlockSparseMatrix& pattern) {
    const int n = pattern.n_nodes();
    const auto& rp = pattern.row_ptr();
    const auto& ci = pattern.col_idx();
    auto degree = [&](int v) { return rp[static_cast<std::size_t>(v) + 1] - rp[static_cast<std::size_t>(v)]; };

    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(n));
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<int> queue, nbrs;

    auto bfs = [&](int start, std::vector<char>& vis, std::vector<int>& out) {
        out.clear();
        out.push_back(start);
        vis[static_cast<std::size_t>(start)] = 1;
        for (std::size_t head = 0; head < out.size(); ++head) {
            const int v = out[head];
            nbrs.clear();
            for (int p = rp[static_cast<std::size_t>(v)]; p < rp[static_cast<std::size_t>(v) + 1]; ++p) {
                const int u = ci[static_cast<std::size_t>(p)];
                if (u != v && !vis[static_cast<std::size_t>(u)]) {
                    vis[static_cast<std::size_t>(u)] = 1;
                    nbrs.push_back(u);
                }
            }
            std::sort(nbrs.begin(), nbrs.end(),
                      [&](int a, int b) { return degree(a) != degree(b) ? degree(a) < degree(b) : a < b; });
            out.insert(out.end(), nbrs.begin(), nbrs.end());
        }
    };

    for (int root = 0; root < n; ++root) {
        if (seen[static_cast<std::size_t>(root)]) continue;
        // lowest-degree unvisited node in this component, then hop to the far
        // end of a BFS to approximate a peripheral start
        std::vector<char> vis = seen;
        bfs(root, vis, queue);
        int start = root;
        for (int v : queue)
            if (degree(v) < degree(start) || (degree(v) == degree(start) && v < start)) start = v;
        vis = seen;
        bfs(start, vis, queue);
        start = queue.back();
        bfs(start, seen, queue);
        order.insert(order.end(), queue.begin(), queue.end());
    }
    std::reverse(order.begin(), order.end());
    return order;
}

} // namespace

SparseLLT::SparseLLT(const BlockSparseMatrix& pattern) {
    const int d = pattern.block_dim();
    n_ = pattern.n_dof();

    const std::vector<int> block_order = rcm_block_order(pattern);
    perm_.resize(static_cast<std::size_t>(n_));
    std::vector<int> iperm(static_cast<std::size_t>(n_));
    for (int nb = 0; nb < pattern.n_nodes(); ++nb) {
        const int ob = block_order[static_cast<std::size_t>(nb)];
        for (int c = 0; c < d; ++c) {
            perm_[static_cast<std::size_t>(nb * d + c)] = ob * d + c;
            iperm[static_cast<std::size_t>(ob * d + c)] = nb * d + c;
        }
    }

    // Permuted upper-triangular scalar pattern with a value scatter map.
    struct Entry {
        int col, row, src;
    };
    std::vector<Entry> entries;
    const auto& rp = pattern.row_ptr();
    const auto& ci = pattern.col_idx();
    for (int br = 0; br < pattern.n_nodes(); ++br) {
        for (int p = rp[static_cast<std::size_t>(br)]; p < rp[static_cast<std::size_t>(br) + 1]; ++p) {
            const int bc = ci[static_cast<std::size_t>(p)];
            for (int r = 0; r < d; ++r) {
                for (int c = 0; c < d; ++c) {
                    const int pi = iperm[static_cast<std::size_t>(br * d + r)];
                    const int pj = iperm[static_cast<std::size_t>(bc * d + c)];
                    if (pi <= pj) entries.push_back({pj, pi, p * d * d + r * d + c});
                }
            }
        }
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        return a.col != b.col ? a.col < b.col : a.row < b.row;
    });

    ap_.assign(static_cast<std::size_t>(n_) + 1, 0);
    ai_.resize(entries.size());
    a_src_.resize(entries.size());
    for (std::size_t k = 0; k < entries.size(); ++k) {
        ap_[static_cast<std::size_t>(entries[k].col) + 1]++;
        ai_[k] = entries[k].row;
        a_src_[k] = entries[k].src;
    }
    for (int j = 0; j < n_; ++j) ap_[static_cast<std::size_t>(j) + 1] += ap_[static_cast<std::size_t>(j)];

    // Elimination tree from the upper pattern.
    parent_.assign(static_cast<std::size_t>(n_), -1);
    std::vector<int> ancestor(static_cast<std::size_t>(n_), -1);
    for (int k = 0; k < n_; ++k) {
        for (int p = ap_[static_cast<std::size_t>(k)]; p < ap_[static_cast<std::size_t>(k) + 1]; ++p) {
            int i = ai_[static_cast<std::size_t>(p)];
            while (i != -1 && i < k) {
                const int inext = ancestor[static_cast<std::size_t>(i)];
                ancestor[static_cast<std::size_t>(i)] = k;
                if (inext == -1) parent_[static_cast<std::size_t>(i)] = k;
                i = inext;
            }
        }
    }

    // Column counts of L: one symbolic ereach pass.
    std::vector<int> counts(static_cast<std::size_t>(n_), 1);  // diagonals
    std::vector<int> w(static_cast<std::size_t>(n_), -1), s(static_cast<std::size_t>(n_)),
        s2(static_cast<std::size_t>(n_));
    for (int k = 0; k < n_; ++k) {
        w[static_cast<std::size_t>(k)] = k;
        for (int p = ap_[static_cast<std::size_t>(k)]; p < ap_[static_cast<std::size_t>(k) + 1]; ++p) {
            int i = ai_[static_cast<std::size_t>(p)];
            while (i < k && w[static_cast<std::size_t>(i)] != k) {
                counts[static_cast<std::size_t>(i)]++;
                w[static_cast<std::size_t>(i)] = k;
                i = parent_[static_cast<std::size_t>(i)];
            }
        }
    }
    lp_.assign(static_cast<std::size_t>(n_) + 1, 0);
    for (int j = 0; j < n_; ++j) lp_[static_cast<std::size_t>(j) + 1] = lp_[static_cast<std::size_t>(j)] + counts[static_cast<std::size_t>(j)];
    li_.resize(static_cast<std::size_t>(lp_[static_cast<std::size_t>(n_)]));
    lx_.resize(li_.size());
}

// Topologically sorted reach of row k in the elimination tree; returns the
// stack top (entries s[top..n-1]).
int SparseLLT::ereach(int k, std::vector<int>& w, std::vector<int>& s, std::vector<int>& s2) const {
    int top = n_;
    w[static_cast<std::size_t>(k)] = k;
    for (int p = ap_[static_cast<std::size_t>(k)]; p < ap_[static_cast<std::size_t>(k) + 1]; ++p) {
        int i = ai_[static_cast<std::size_t>(p)];
        if (i >= k) continue;
        int len = 0;
        while (w[static_cast<std::size_t>(i)] != k) {
            s2[static_cast<std::size_t>(len++)] = i;
            w[static_cast<std::size_t>(i)] = k;
            i = parent_[static_cast<std::size_t>(i)];
        }
        while (len > 0) s[static_cast<std::size_t>(--top)] = s2[static_cast<std::size_t>(--len)];
    }
    return top;
}

SolveOutcome SparseLLT::solve(const BlockSparseMatrix& h, std::span<const double> b) {
    if (h.n_dof() != n_ || static_cast<int>(b.size()) != n_)
        fail(ErrorCode::InvalidArgument, "llt_solve: size mismatch");
    const auto vals = h.values();
    for (double v : vals)
        if (!std::isfinite(v)) fail(ErrorCode::NonFinite, "llt_solve: non-finite matrix entry");
    for (double v : b)
        if (!std::isfinite(v)) fail(ErrorCode::NonFinite, "llt_solve: non-finite rhs entry");

    // Permuted upper CSC values via the scatter map.
    std::vector<double> ax(a_src_.size());
    for (std::size_t p = 0; p < a_src_.size(); ++p) ax[p] = vals[static_cast<std::size_t>(a_src_[p])];

    double max_diag = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_; ++i) max_diag = std::max(max_diag, h.value(i, i));
    const double pivot_floor = 1e-12 * std::max(max_diag, 0.0);

    // Up-looking Cholesky; row patterns come from ereach, columns fill in
    // ascending row order so the diagonal stays first in every column.
    std::vector<int> w(static_cast<std::size_t>(n_), -1), s(static_cast<std::size_t>(n_)),
        s2(static_cast<std::size_t>(n_)), c(static_cast<std::size_t>(n_));
    std::vector<double> x(static_cast<std::size_t>(n_), 0.0);
    for (int j = 0; j < n_; ++j) c[static_cast<std::size_t>(j)] = lp_[static_cast<std::size_t>(j)];

    SolveOutcome out;
    for (int k = 0; k < n_; ++k) {
        const int top = ereach(k, w, s, s2);
        double dkk = 0.0;
        for (int p = ap_[static_cast<std::size_t>(k)]; p < ap_[static_cast<std::size_t>(k) + 1]; ++p) {
            const int i = ai_[static_cast<std::size_t>(p)];
            if (i < k)
                x[static_cast<std::size_t>(i)] = ax[static_cast<std::size_t>(p)];
            else if (i == k)
                dkk = ax[static_cast<std::size_t>(p)];
        }
        for (int t = top; t < n_; ++t) {
            const int j = s[static_cast<std::size_t>(t)];
            const double lkj = x[static_cast<std::size_t>(j)] / lx_[static_cast<std::size_t>(lp_[static_cast<std::size_t>(j)])];
            x[static_cast<std::size_t>(j)] = 0.0;
            for (int p = lp_[static_cast<std::size_t>(j)] + 1; p < c[static_cast<std::size_t>(j)]; ++p)
                x[static_cast<std::size_t>(li_[static_cast<std::size_t>(p)])] -= lx_[static_cast<std::size_t>(p)] * lkj;
            dkk -= lkj * lkj;
            const int p = c[static_cast<std::size_t>(j)]++;
            li_[static_cast<std::size_t>(p)] = k;
            lx_[static_cast<std::size_t>(p)] = lkj;
        }
        if (!(dkk > pivot_floor)) {
            out.status = SolveStatus::Indefinite;
            out.detail = perm_[static_cast<std::size_t>(k)];
            return out;
        }
        const int p = c[static_cast<std::size_t>(k)]++;
        li_[static_cast<std::size_t>(p)] = k;
        lx_[static_cast<std::size_t>(p)] = std::sqrt(dkk);
    }

    // Permute rhs, forward/backward substitution, permute back.
    std::vector<double> y(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) y[static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(perm_[static_cast<std::size_t>(i)])];
    for (int j = 0; j < n_; ++j) {
        y[static_cast<std::size_t>(j)] /= lx_[static_cast<std::size_t>(lp_[static_cast<std::size_t>(j)])];
        for (int p = lp_[static_cast<std::size_t>(j)] + 1; p < lp_[static_cast<std::size_t>(j) + 1]; ++p)
            y[static_cast<std::size_t>(li_[static_cast<std::size_t>(p)])] -= lx_[static_cast<std::size_t>(p)] * y[static_cast<std::size_t>(j)];
    }
    for (int j = n_ - 1; j >= 0; --j) {
        for (int p = lp_[static_cast<std::size_t>(j)] + 1; p < lp_[static_cast<std::size_t>(j) + 1]; ++p)
            y[static_cast<std::size_t>(j)] -= lx_[static_cast<std::size_t>(p)] * y[static_cast<std::size_t>(li_[static_cast<std::size_t>(p)])];
        y[static_cast<std::size_t>(j)] /= lx_[static_cast<std::size_t>(lp_[static_cast<std::size_t>(j)])];
    }
    out.status = SolveStatus::Solved;
    out.step.assign(static_cast<std::size_t>(n_), 0.0);
    for (int i = 0; i < n_; ++i) out.step[static_cast<std::size_t>(perm_[static_cast<std::size_t>(i)])] = y[static_cast<std::size_t>(i)];
    return out;
}

SolveOutcome llt_solve(const BlockSparseMatrix& h, std::span<const double> b) {
    SparseLLT f(h);
    return f.solve(h, b);
}

void BlockJacobiPreconditioner::apply(std::span<const double> r, std::span<double> z) const {
    for (int i = 0; i < n_nodes; ++i) {
        const double* blk = &inv_blocks[static_cast<std::size_t>(i * d * d)];
        for (int a = 0; a < d; ++a) {
            double sum = 0.0;
            for (int c = 0; c < d; ++c) sum += blk[a * d + c] * r[static_cast<std::size_t>(i * d + c)];
            z[static_cast<std::size_t>(i * d + a)] = sum;
        }
    }
}

BlockJacobiPreconditioner build_block_jacobi(const BlockSparseMatrix& h) {
    const int d = h.block_dim();
    BlockJacobiPreconditioner pc;
    pc.n_nodes = h.n_nodes();
    pc.d = d;
    pc.inv_blocks.assign(static_cast<std::size_t>(pc.n_nodes * d * d), 0.0);

    for (int i = 0; i < pc.n_nodes; ++i) {
        const int pos = h.find_block(i, i);
        if (pos < 0) fail(ErrorCode::StructuralMiss, "block_jacobi: missing diagonal block");
        SymMatrix blk(d);
        const double* src = h.block(pos);
        for (int r = 0; r < d; ++r)
            for (int c = r; c < d; ++c) blk.set(r, c, 0.5 * (src[r * d + c] + src[c * d + r]));

        // floor scaled by the block magnitude so the inverse stays bounded
        EigenFilter f;
        f.floor = 1e-8 * std::max(1.0, blk.norm_inf());
        const SymMatrix spd = project_spd(blk, f).matrix;

        Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) m(r, c) = spd(r, c);
        const Eigen::Matrix3d inv = m.inverse();
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) pc.inv_blocks[static_cast<std::size_t>(i * d * d + r * d + c)] = inv(r, c);
    }
    return pc;
}

SolveOutcome pcg_solve(const BlockSparseMatrix& h, std::span<const double> b,
                       const BlockJacobiPreconditioner* precond, double rtol, int max_iter) {
    const int n = h.n_dof();
    if (static_cast<int>(b.size()) != n) fail(ErrorCode::InvalidArgument, "pcg_solve: size mismatch");
    for (double v : h.values())
        if (!std::isfinite(v)) fail(ErrorCode::NonFinite, "pcg_solve: non-finite matrix entry");
    for (double v : b)
        if (!std::isfinite(v)) fail(ErrorCode::NonFinite, "pcg_solve: non-finite rhs entry");
    if (max_iter < 0) max_iter = n;

    SolveOutcome out;
    std::vector<double> xs(static_cast<std::size_t>(n), 0.0), r(b.begin(), b.end()),
        z(static_cast<std::size_t>(n)), p(static_cast<std::size_t>(n)), q(static_cast<std::size_t>(n));
    auto vec = [](std::vector<double>& v) { return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())); };

    const double r0 = vec(r).norm();
    if (r0 == 0.0) {
        out.status = SolveStatus::Solved;
        out.step = std::move(xs);
        out.detail = 0;
        return out;
    }

    if (precond)
        precond->apply(r, z);
    else
        z = r;
    p = z;
    double rz = vec(r).dot(vec(z));

    for (int it = 1; it <= max_iter; ++it) {
        h.multiply(p, q);
        const double pq = vec(p).dot(vec(q));
        if (pq <= 1e-14 * vec(p).squaredNorm()) {
            out.status = SolveStatus::Indefinite;
            out.detail = it;
            return out;
        }
        const double alpha = rz / pq;
        vec(xs) += alpha * vec(p);
        vec(r) -= alpha * vec(q);
        if (vec(r).norm() <= rtol * r0) {
            out.status = SolveStatus::Solved;
            out.step = std::move(xs);
            out.detail = it;
            return out;
        }
        if (precond)
            precond->apply(r, z);
        else
            z = r;
        const double rz_next = vec(r).dot(vec(z));
        const double beta = rz_next / rz;
        rz = rz_next;
        vec(p) = vec(z) + beta * vec(p);
    }
    out.status = SolveStatus::MaxIterationsExceeded;
    out.detail = max_iter;
    return out;
}

} // namespace ppn
