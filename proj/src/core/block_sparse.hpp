#pragma once

#include <span>
#include <vector>

#include "core/elements.hpp"

namespace ppn {

// Block-sparse symmetric matrix with dense d x d blocks (d = 1, 2 or 3) on a
// fixed, structurally symmetric sparsity pattern. Both triangles are stored
// so that SpMV and scalar expansion stay simple; exact value symmetry is
// maintained by assembling symmetric local Hessians.
class BlockSparseMatrix {
public:
    BlockSparseMatrix() = default;
    BlockSparseMatrix(int n_nodes, int d, const std::vector<ElementStencil>& stencils);

    int n_nodes() const { return n_nodes_; }
    int block_dim() const { return d_; }
    int n_dof() const { return n_nodes_ * d_; }
    int n_blocks() const { return static_cast<int>(col_idx_.size()); }

    const std::vector<int>& row_ptr() const { return row_ptr_; }
    const std::vector<int>& col_idx() const { return col_idx_; }

    void set_zero();

    // Position of block (br, bc) in the value array, or -1 when the pattern
    // does not contain it.
    int find_block(int br, int bc) const;

    const double* block(int pos) const { return &vals_[static_cast<std::size_t>(pos) * d_ * d_]; }
    double* block(int pos) { return &vals_[static_cast<std::size_t>(pos) * d_ * d_]; }
    std::span<const double> values() const { return vals_; }

    // Adds a local symmetric matrix (node-major layout matching `nodes`) into
    // the global pattern. Throws StructuralMiss if a block is absent.
    void add_local(const std::vector<int>& nodes, const SymMatrix& local);

    void multiply(std::span<const double> x, std::span<double> y) const;

    double value(int i, int j) const;  // scalar accessor, 0 outside pattern

    double max_abs_asymmetry() const;

private:
    int n_nodes_ = 0;
    int d_ = 0;
    std::vector<int> row_ptr_;
    std::vector<int> col_idx_;
    std::vector<double> vals_;
};

// Union of all stencil cross-products; the pattern is reused for every
// Newton iteration of a time step.
BlockSparseMatrix build_sparsity(const std::vector<ElementStencil>& stencils, int n_nodes, int d);

// max |g[i]| over the element's DOFs (the infinity norm of the element's
// slice of the assembled residual).
double element_residual_inf(std::span<const double> g, const ElementStencil& stencil, int d);

// In-place H += delta on the element's blocks; the sparsity never changes.
void scatter_delta(BlockSparseMatrix& h, const ElementStencil& stencil, const SymMatrix& delta);

struct AssemblyCache {
    std::vector<ElementEval> evals;  // one per element, element-id order
};

// Assembles the unprojected Hessian and gradient from element contributions,
// summing in ascending element-id order. Evaluations are cached so that
// projection deltas can be formed later without re-evaluating energies.
void assemble(const ElementSystem& sys, std::span<const double> x, BlockSparseMatrix& h,
              std::vector<double>& g, AssemblyCache& cache);

// Total energy; +inf when any element reports an inadmissible state.
double total_energy(const ElementSystem& sys, std::span<const double> x);

} // namespace ppn
