#include "core/block_sparse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ppn {

BlockSparseMatrix::BlockSparseMatrix(int n_nodes, int d, const std::vector<ElementStencil>& stencils)
    : n_nodes_(n_nodes), d_(d) {
    if (d < 1 || d > 3) fail(ErrorCode::InvalidArgument, "BlockSparseMatrix: block size must be 1..3");
    if (stencils.empty()) fail(ErrorCode::InvalidArgument, "BlockSparseMatrix: no stencils");

    std::vector<std::vector<int>> rows(static_cast<std::size_t>(n_nodes));
    for (const auto& st : stencils) {
        for (int i : st.nodes) {
            if (i < 0 || i >= n_nodes) fail(ErrorCode::IndexOutOfRange, "build_sparsity: node index out of range");
            for (int j : st.nodes) rows[static_cast<std::size_t>(i)].push_back(j);
        }
    }

    row_ptr_.assign(static_cast<std::size_t>(n_nodes) + 1, 0);
    for (int i = 0; i < n_nodes; ++i) {
        auto& r = rows[static_cast<std::size_t>(i)];
        std::sort(r.begin(), r.end());
        r.erase(std::unique(r.begin(), r.end()), r.end());
        row_ptr_[static_cast<std::size_t>(i) + 1] = row_ptr_[static_cast<std::size_t>(i)] + static_cast<int>(r.size());
        col_idx_.insert(col_idx_.end(), r.begin(), r.end());
    }
    vals_.assign(static_cast<std::size_t>(col_idx_.size()) * d_ * d_, 0.0);
}

void BlockSparseMatrix::set_zero() { std::fill(vals_.begin(), vals_.end(), 0.0); }

int BlockSparseMatrix::find_block(int br, int bc) const {
    const int lo = row_ptr_[static_cast<std::size_t>(br)];
    const int hi = row_ptr_[static_cast<std::size_t>(br) + 1];
    auto it = std::lower_bound(col_idx_.begin() + lo, col_idx_.begin() + hi, bc);
    if (it == col_idx_.begin() + hi || *it != bc) return -1;
    return static_cast<int>(it - col_idx_.begin());
}

void BlockSparseMatrix::add_local(const std::vector<int>& nodes, const SymMatrix& local) {
    const int k = static_cast<int>(nodes.size());
    for (int a = 0; a < k; ++a) {
        for (int b = 0; b < k; ++b) {
            const int pos = find_block(nodes[static_cast<std::size_t>(a)], nodes[static_cast<std::size_t>(b)]);
            if (pos < 0) fail(ErrorCode::StructuralMiss, "add_local: block missing from sparsity");
            double* blk = block(pos);
            for (int r = 0; r < d_; ++r)
                for (int c = 0; c < d_; ++c) blk[r * d_ + c] += local(a * d_ + r, b * d_ + c);
        }
    }
}

void BlockSparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    std::fill(y.begin(), y.end(), 0.0);
    for (int br = 0; br < n_nodes_; ++br) {
        for (int p = row_ptr_[static_cast<std::size_t>(br)]; p < row_ptr_[static_cast<std::size_t>(br) + 1]; ++p) {
            const int bc = col_idx_[static_cast<std::size_t>(p)];
            const double* blk = block(p);
            for (int r = 0; r < d_; ++r) {
                double s = 0.0;
                for (int c = 0; c < d_; ++c) s += blk[r * d_ + c] * x[static_cast<std::size_t>(bc * d_ + c)];
                y[static_cast<std::size_t>(br * d_ + r)] += s;
            }
        }
    }
}

double BlockSparseMatrix::value(int i, int j) const {
    const int pos = find_block(i / d_, j / d_);
    if (pos < 0) return 0.0;
    return block(pos)[(i % d_) * d_ + (j % d_)];
}

double BlockSparseMatrix::max_abs_asymmetry() const {
    double m = 0.0;
    for (int br = 0; br < n_nodes_; ++br) {
        for (int p = row_ptr_[static_cast<std::size_t>(br)]; p < row_ptr_[static_cast<std::size_t>(br) + 1]; ++p) {
            const int bc = col_idx_[static_cast<std::size_t>(p)];
            const int q = find_block(bc, br);
            if (q < 0) return std::numeric_limits<double>::infinity();
            const double* a = block(p);
            const double* b = block(q);
            for (int r = 0; r < d_; ++r)
                for (int c = 0; c < d_; ++c) m = std::max(m, std::abs(a[r * d_ + c] - b[c * d_ + r]));
        }
    }
    return m;
}

BlockSparseMatrix build_sparsity(const std::vector<ElementStencil>& stencils, int n_nodes, int d) {
    return BlockSparseMatrix(n_nodes, d, stencils);
}

double element_residual_inf(std::span<const double> g, const ElementStencil& stencil, int d) {
    double m = 0.0;
    for (int node : stencil.nodes)
        for (int c = 0; c < d; ++c) m = std::max(m, std::abs(g[static_cast<std::size_t>(node * d + c)]));
    return m;
}

void scatter_delta(BlockSparseMatrix& h, const ElementStencil& stencil, const SymMatrix& delta) {
    h.add_local(stencil.nodes, delta);
}

void assemble(const ElementSystem& sys, std::span<const double> x, BlockSparseMatrix& h,
              std::vector<double>& g, AssemblyCache& cache) {
    h.set_zero();
    g.assign(static_cast<std::size_t>(sys.n_dof()), 0.0);
    cache.evals.resize(sys.elements.size());

    const int d = sys.dim;
    for (std::size_t e = 0; e < sys.elements.size(); ++e) {
        const Element& el = *sys.elements[e];
        ElementEval& ev = cache.evals[e];
        if (!el.eval(x, EvalMode::Full, ev))
            fail(ErrorCode::Inadmissible, std::string("assemble: inadmissible state in element ") + el.name());
        bool finite = std::isfinite(ev.energy) && ev.hess.all_finite();
        for (int i = 0; finite && i < ev.grad.n; ++i) finite = std::isfinite(ev.grad[i]);
        if (!finite)
            fail(ErrorCode::NonFinite, std::string("assemble: non-finite evaluation in element ") + el.name());

        const auto& nodes = el.stencil().nodes;
        h.add_local(nodes, ev.hess);
        for (std::size_t a = 0; a < nodes.size(); ++a)
            for (int c = 0; c < d; ++c)
                g[static_cast<std::size_t>(nodes[a] * d + c)] += ev.grad[static_cast<int>(a) * d + c];
    }
}

double total_energy(const ElementSystem& sys, std::span<const double> x) {
    double sum = 0.0;
    ElementEval ev;
    for (const auto& el : sys.elements) {
        if (!el->eval(x, EvalMode::EnergyOnly, ev)) return std::numeric_limits<double>::infinity();
        sum += ev.energy;
    }
    return sum;
}

int ElementSystem::add(std::unique_ptr<Element> e) {
    const int id = static_cast<int>(elements.size());
    e->set_element_id(id);
    elements.push_back(std::move(e));
    return id;
}

} // namespace ppn
