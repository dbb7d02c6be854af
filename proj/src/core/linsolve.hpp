#pragma once

#include <span>
#include <vector>

#include "core/block_sparse.hpp"

namespace ppn {

enum class SolveStatus { Solved, Indefinite, MaxIterationsExceeded };

struct SolveOutcome {
    SolveStatus status = SolveStatus::Indefinite;
    std::vector<double> step;  // valid only when Solved
    // Solved:                   LLT -1, PCG convergence iteration.
    // Indefinite:               LLT failing pivot (original scalar index), PCG failing iteration.
    // MaxIterationsExceeded:    PCG iteration limit.
    int detail = -1;
};

// Sparse Cholesky on the block pattern expanded to scalars, with a reverse
// Cuthill-McKee ordering and an elimination-tree symbolic analysis computed
// once per sparsity pattern. solve() refactors numerically (values change
// between calls; symbolic data is reused) and exits on the first pivot
// <= 1e-12 * max diagonal entry, reporting the original scalar index.
class SparseLLT {
public:
    explicit SparseLLT(const BlockSparseMatrix& pattern);

    SolveOutcome solve(const BlockSparseMatrix& h, std::span<const double> b);

    int n() const { return n_; }

private:
    int n_ = 0;
    std::vector<int> perm_;   // new scalar index -> original scalar index
    std::vector<int> ap_, ai_, a_src_;  // permuted upper CSC pattern + source into block values
    std::vector<int> parent_;           // elimination tree
    std::vector<int> lp_;               // column pointers of L
    std::vector<int> li_;               // row indices, refilled per factorization
    std::vector<double> lx_;

    int ereach(int k, std::vector<int>& w, std::vector<int>& s, std::vector<int>& s2) const;
};

// One-shot convenience wrapper (symbolic analysis per call).
SolveOutcome llt_solve(const BlockSparseMatrix& h, std::span<const double> b);

struct BlockJacobiPreconditioner {
    int n_nodes = 0;
    int d = 0;
    std::vector<double> inv_blocks;  // n_nodes dense d x d inverses, row-major

    void apply(std::span<const double> r, std::span<double> z) const;
};

// Inverts the diagonal blocks; indefinite or singular blocks are SPD-projected
// first (floor scaled by the block magnitude), so construction always succeeds.
BlockJacobiPreconditioner build_block_jacobi(const BlockSparseMatrix& h);

inline constexpr double kPcgRtol = 1e-4;

// Preconditioned conjugate gradient from the zero vector. Aborts with
// Indefinite as soon as a search direction has d^T H d <= 1e-14 ||d||^2;
// MaxIterationsExceeded after max_iter (default n_dof) iterations.
SolveOutcome pcg_solve(const BlockSparseMatrix& h, std::span<const double> b,
                       const BlockJacobiPreconditioner* precond = nullptr, double rtol = kPcgRtol,
                       int max_iter = -1);

} // namespace ppn
