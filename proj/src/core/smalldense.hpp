#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>

#include "core/error.hpp"

namespace ppn {

// Dense symmetric matrices up to 12x12, sized for the largest element
// Hessian (a 4-node tetrahedron in 3D).
inline constexpr int kMaxLocalDim = 12;

class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(int n) : n_(n) {
        if (n < 0 || n > kMaxLocalDim) fail(ErrorCode::IndexOutOfRange, "SymMatrix: bad dimension");
        a_.fill(0.0);
    }

    int size() const { return n_; }

    double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * kMaxLocalDim + j]; }

    // Writes both (i,j) and (j,i); storage stays exactly symmetric.
    void set(int i, int j, double v) {
        a_[static_cast<std::size_t>(i) * kMaxLocalDim + j] = v;
        a_[static_cast<std::size_t>(j) * kMaxLocalDim + i] = v;
    }
    void add(int i, int j, double v) { set(i, j, (*this)(i, j) + v); }

    static SymMatrix identity(int n) {
        SymMatrix m(n);
        for (int i = 0; i < n; ++i) m.set(i, i, 1.0);
        return m;
    }
    static SymMatrix diagonal(std::span<const double> d) {
        SymMatrix m(static_cast<int>(d.size()));
        for (int i = 0; i < m.n_; ++i) m.set(i, i, d[static_cast<std::size_t>(i)]);
        return m;
    }

    SymMatrix operator-(const SymMatrix& o) const {
        SymMatrix r(n_);
        for (int i = 0; i < n_; ++i)
            for (int j = i; j < n_; ++j) r.set(i, j, (*this)(i, j) - o(i, j));
        return r;
    }
    SymMatrix operator+(const SymMatrix& o) const {
        SymMatrix r(n_);
        for (int i = 0; i < n_; ++i)
            for (int j = i; j < n_; ++j) r.set(i, j, (*this)(i, j) + o(i, j));
        return r;
    }

    double norm_inf() const {
        double m = 0.0;
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) m = std::max(m, std::abs((*this)(i, j)));
        return m;
    }

    bool all_finite() const;

private:
    int n_ = 0;
    std::array<double, kMaxLocalDim * kMaxLocalDim> a_{};
};

struct EigenPair {
    int n = 0;
    std::array<double, kMaxLocalDim> eigenvalues{};                   // ascending
    std::array<double, kMaxLocalDim * kMaxLocalDim> eigenvectors{};   // column-major, column i pairs with eigenvalues[i]

    double vec(int row, int col) const { return eigenvectors[static_cast<std::size_t>(col) * kMaxLocalDim + row]; }
};

enum class FilterKind { Clamp, Mirror };

struct EigenFilter {
    FilterKind kind = FilterKind::Clamp;
    double floor = 1e-8;
};

// Symmetric eigendecomposition by cyclic Jacobi rotations. Eigenvalues are
// returned in ascending order. Throws NonFinite on NaN/Inf input.
EigenPair eig_sym(const SymMatrix& m);

// Rebuilds Q diag(f(lambda)) Q^T with Clamp: max(lambda, eps) or
// Mirror: max(|lambda|, eps). Output is SPD with eigenvalues >= eps.
SymMatrix apply_filter(const EigenPair& p, const EigenFilter& f);

struct ProjectResult {
    SymMatrix matrix;
    bool modified = false;    // filter changed at least one eigenvalue
    bool decomposed = false;  // full eigendecomposition was performed
};

// SPD projection with a cheap definiteness pre-check: a dense Cholesky of
// (m - eps*I) succeeds iff the matrix already has min eigenvalue >= eps, in
// which case the input is returned untouched and no decomposition happens.
ProjectResult project_spd(const SymMatrix& m, const EigenFilter& f);

} // namespace ppn
