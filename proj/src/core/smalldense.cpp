#include "core/smalldense.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ppn {

bool SymMatrix::all_finite() const {
    for (int i = 0; i < n_; ++i)
        for (int j = i; j < n_; ++j)
            if (!std::isfinite((*this)(i, j))) return false;
    return true;
}

namespace {

double off_diag_sq(const double* a, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double v = a[i * kMaxLocalDim + j];
            s += 2.0 * v * v;
        }
    return s;
}

} // namespace

EigenPair eig_sym(const SymMatrix& m) {
    if (!m.all_finite()) fail(ErrorCode::NonFinite, "eig_sym: non-finite entry");
    const int n = m.size();

    std::array<double, kMaxLocalDim * kMaxLocalDim> a{};
    std::array<double, kMaxLocalDim * kMaxLocalDim> q{};
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) a[i * kMaxLocalDim + j] = m(i, j);
        q[i * kMaxLocalDim + i] = 1.0;
    }

    double norm = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) norm = std::max(norm, std::abs(a[i * kMaxLocalDim + j]));
    const double stop = (norm > 0.0) ? 1e-30 * norm * norm : 0.0;

    const int max_sweeps = 50;
    for (int sweep = 0; sweep < max_sweeps && off_diag_sq(a.data(), n) > stop; ++sweep) {
        for (int p = 0; p < n - 1; ++p) {
            for (int r = p + 1; r < n; ++r) {
                const double apq = a[p * kMaxLocalDim + r];
                if (apq == 0.0) continue;
                const double app = a[p * kMaxLocalDim + p];
                const double aqq = a[r * kMaxLocalDim + r];
                // Stable rotation angle (Golub & Van Loan sym. Schur 2x2).
                const double theta = (aqq - app) / (2.0 * apq);
                double t;
                if (std::abs(theta) > 1e150) {
                    t = 1.0 / (2.0 * theta);
                } else {
                    t = ((theta >= 0.0) ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                }
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (int k = 0; k < n; ++k) {
                    const double akp = a[k * kMaxLocalDim + p];
                    const double akq = a[k * kMaxLocalDim + r];
                    a[k * kMaxLocalDim + p] = c * akp - s * akq;
                    a[k * kMaxLocalDim + r] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a[p * kMaxLocalDim + k];
                    const double aqk = a[r * kMaxLocalDim + k];
                    a[p * kMaxLocalDim + k] = c * apk - s * aqk;
                    a[r * kMaxLocalDim + k] = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double qkp = q[k * kMaxLocalDim + p];
                    const double qkq = q[k * kMaxLocalDim + r];
                    q[k * kMaxLocalDim + p] = c * qkp - s * qkq;
                    q[k * kMaxLocalDim + r] = s * qkp + c * qkq;
                }
            }
        }
    }

    std::array<int, kMaxLocalDim> order{};
    std::iota(order.begin(), order.begin() + n, 0);
    std::sort(order.begin(), order.begin() + n,
              [&](int i, int j) { return a[i * kMaxLocalDim + i] < a[j * kMaxLocalDim + j]; });

    EigenPair out;
    out.n = n;
    for (int i = 0; i < n; ++i) {
        const int src = order[i];
        out.eigenvalues[i] = a[src * kMaxLocalDim + src];
        for (int r = 0; r < n; ++r) out.eigenvectors[i * kMaxLocalDim + r] = q[r * kMaxLocalDim + src];
    }
    return out;
}

SymMatrix apply_filter(const EigenPair& p, const EigenFilter& f) {
    if (f.floor <= 0.0) fail(ErrorCode::InvalidArgument, "apply_filter: floor must be positive");
    const int n = p.n;
    std::array<double, kMaxLocalDim> lam{};
    for (int i = 0; i < n; ++i) {
        const double v = p.eigenvalues[i];
        lam[i] = (f.kind == FilterKind::Clamp) ? std::max(v, f.floor) : std::max(std::abs(v), f.floor);
    }
    SymMatrix out(n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += lam[k] * p.vec(i, k) * p.vec(j, k);
            out.set(i, j, s);
        }
    }
    return out;
}

namespace {

// In-place Cholesky attempt; true iff the matrix is positive definite
// (all pivots > 0 with an absolute slack against roundoff on zeros).
bool dense_llt_succeeds(const SymMatrix& m, double shift) {
    const int n = m.size();
    std::array<double, kMaxLocalDim * kMaxLocalDim> a{};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) a[i * kMaxLocalDim + j] = m(i, j) - (i == j ? shift : 0.0);

    for (int k = 0; k < n; ++k) {
        double d = a[k * kMaxLocalDim + k];
        for (int j = 0; j < k; ++j) d -= a[k * kMaxLocalDim + j] * a[k * kMaxLocalDim + j];
        if (!(d > 0.0)) return false;
        const double lkk = std::sqrt(d);
        a[k * kMaxLocalDim + k] = lkk;
        for (int i = k + 1; i < n; ++i) {
            double s = a[i * kMaxLocalDim + k];
            for (int j = 0; j < k; ++j) s -= a[i * kMaxLocalDim + j] * a[k * kMaxLocalDim + j];
            a[i * kMaxLocalDim + k] = s / lkk;
        }
    }
    return true;
}

} // namespace

ProjectResult project_spd(const SymMatrix& m, const EigenFilter& f) {
    if (!m.all_finite()) fail(ErrorCode::NonFinite, "project_spd: non-finite entry");

    ProjectResult res;
    if (dense_llt_succeeds(m, f.floor)) {
        res.matrix = m;
        return res;
    }

    EigenPair p = eig_sym(m);
    res.decomposed = true;

    bool changed = false;
    for (int i = 0; i < p.n; ++i)
        if (p.eigenvalues[i] < f.floor) { changed = true; break; }
    if (!changed) {
        // Pre-check failed only by roundoff; keep the input bit-exact.
        res.matrix = m;
        return res;
    }
    res.matrix = apply_filter(p, f);
    res.modified = true;
    return res;
}

} // namespace ppn
