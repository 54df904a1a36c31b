#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "virtlev/core.hpp"

namespace virtlev {

/// Tridiagonal matrix stored by diagonals: lower[i] = A(i+1,i),
/// diag[i] = A(i,i), upper[i] = A(i,i+1).
template <typename T>
struct Tridiagonal {
    std::vector<T> lower, diag, upper;

    Tridiagonal() = default;
    explicit Tridiagonal(std::size_t n) : lower(n ? n - 1 : 0), diag(n), upper(n ? n - 1 : 0) {}

    std::size_t size() const noexcept { return diag.size(); }

    template <typename V>
    std::vector<V> multiply(const std::vector<V>& x) const {
        const std::size_t n = size();
        std::vector<V> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            V acc = diag[i] * x[i];
            if (i > 0) acc += lower[i - 1] * x[i - 1];
            if (i + 1 < n) acc += upper[i] * x[i + 1];
            y[i] = acc;
        }
        return y;
    }

    double norm1() const {
        const std::size_t n = size();
        double best = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double col = std::abs(diag[j]);
            if (j > 0) col += std::abs(upper[j - 1]);
            if (j + 1 < n) col += std::abs(lower[j]);
            best = std::max(best, col);
        }
        return best;
    }
};

/// LU factorization with partial pivoting of a tridiagonal matrix (the
/// LAPACK gttrf layout: U has two superdiagonals).
template <typename T>
class TridiagonalLU {
public:
    explicit TridiagonalLU(Tridiagonal<T> a) : dl_(std::move(a.lower)), d_(std::move(a.diag)), du_(std::move(a.upper)) {
        const std::size_t n = d_.size();
        du2_.assign(n > 2 ? n - 2 : 0, T(0));
        swapped_.assign(n ? n - 1 : 0, false);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (std::abs(d_[i]) >= std::abs(dl_[i])) {
                if (d_[i] != T(0)) {
                    const T fact = dl_[i] / d_[i];
                    dl_[i] = fact;
                    d_[i + 1] -= fact * du_[i];
                }
            } else {
                const T fact = d_[i] / dl_[i];
                d_[i] = dl_[i];
                dl_[i] = fact;
                const T temp = du_[i];
                du_[i] = d_[i + 1];
                d_[i + 1] = temp - fact * d_[i + 1];
                if (i + 2 < n) {
                    du2_[i] = du_[i + 1];
                    du_[i + 1] = -fact * du_[i + 1];
                }
                swapped_[i] = true;
            }
        }
        double scale = 0.0;
        for (const auto& v : d_) scale = std::max(scale, std::abs(v));
        for (const auto& v : d_) {
            if (std::abs(v) <= std::numeric_limits<double>::min() ||
                std::abs(v) <= 1e-300 * scale)
                singular_ = true;
        }
    }

    bool singular() const noexcept { return singular_; }

    /// Solves A x = b in place.
    template <typename V>
    void solve_in_place(V* b) const {
        const std::size_t n = d_.size();
        if (n == 0) return;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (!swapped_[i]) {
                b[i + 1] -= dl_[i] * b[i];
            } else {
                const V temp = b[i] - dl_[i] * b[i + 1];
                b[i] = b[i + 1];
                b[i + 1] = temp;
            }
        }
        b[n - 1] /= d_[n - 1];
        if (n > 1) b[n - 2] = (b[n - 2] - du_[n - 2] * b[n - 1]) / d_[n - 2];
        for (std::size_t k = n - 2; k-- > 0;) {
            b[k] = (b[k] - du_[k] * b[k + 1] - du2_[k] * b[k + 2]) / d_[k];
        }
    }

    template <typename V>
    std::vector<V> solve(std::vector<V> b) const {
        solve_in_place(b.data());
        return b;
    }

private:
    std::vector<T> dl_, d_, du_, du2_;
    std::vector<bool> swapped_;
    bool singular_ = false;
};

/// Dense inverse of a complex tridiagonal matrix, one O(n) solve per column.
/// Throws NearSpectrum when the matrix is singular or its 1-norm condition
/// number exceeds cond_limit.
inline CMatrix tridiagonal_inverse(const Tridiagonal<cplx>& a, double cond_limit = 1e14,
                                   double* condition = nullptr) {
    const std::size_t n = a.size();
    const double anorm = a.norm1();
    TridiagonalLU<cplx> lu(a);
    if (lu.singular()) fail(ErrorKind::NearSpectrum, "tridiagonal matrix is singular");
    CMatrix inv = CMatrix::Zero(Eigen::Index(n), Eigen::Index(n));
    for (std::size_t j = 0; j < n; ++j) {
        cplx* col = inv.col(Eigen::Index(j)).data();
        col[j] = 1.0;
        lu.solve_in_place(col);
    }
    if (!inv.allFinite()) fail(ErrorKind::NearSpectrum, "tridiagonal solve produced non-finite values");
    const double inv_norm = inv.cwiseAbs().colwise().sum().maxCoeff();
    const double cond = anorm * inv_norm;
    if (condition) *condition = cond;
    if (cond > cond_limit) fail(ErrorKind::NearSpectrum, "condition number exceeds limit");
    return inv;
}

/// Number of eigenvalues below x of a real symmetric tridiagonal matrix
/// (Sturm sequence count).
inline std::size_t sturm_count(const std::vector<double>& diag, const std::vector<double>& off, double x) {
    std::size_t count = 0;
    double q = 1.0;
    for (std::size_t i = 0; i < diag.size(); ++i) {
        const double b2 = i ? off[i - 1] * off[i - 1] : 0.0;
        q = diag[i] - x - (i ? b2 / q : 0.0);
        if (q == 0.0) q = -1e-300;
        if (q < 0.0) ++count;
    }
    return count;
}

struct Eigenpair {
    double value = 0.0;
    std::vector<double> vector;
};

/// Smallest eigenpair of a real symmetric tridiagonal matrix: Sturm
/// bisection for the eigenvalue, inverse iteration for the vector. The
/// vector is unit-norm with a positive largest-magnitude component.
inline Eigenpair lowest_eigenpair(const std::vector<double>& diag, const std::vector<double>& off) {
    const std::size_t n = diag.size();
    if (n == 0) fail(ErrorKind::InvalidInput, "lowest_eigenpair: empty matrix");
    double lo = std::numeric_limits<double>::max();
    double hi = std::numeric_limits<double>::lowest();
    for (std::size_t i = 0; i < n; ++i) {
        const double r = (i ? std::abs(off[i - 1]) : 0.0) + (i + 1 < n ? std::abs(off[i]) : 0.0);
        lo = std::min(lo, diag[i] - r);
        hi = std::max(hi, diag[i] + r);
    }
    const double span = std::max(hi - lo, 1e-300);
    for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi)) + 1e-300; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (sturm_count(diag, off, mid) >= 1) hi = mid; else lo = mid;
    }
    Eigenpair out;
    out.value = 0.5 * (lo + hi);

    const double shift = out.value - 1e-10 * span;
    Tridiagonal<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t.diag[i] = diag[i] - shift;
    for (std::size_t i = 0; i + 1 < n; ++i) t.lower[i] = t.upper[i] = off[i];
    TridiagonalLU<double> lu(t);
    std::vector<double> v(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 1e-3 * std::sin(double(i));
    for (int it = 0; it < 4; ++it) {
        lu.solve_in_place(v.data());
        double nrm = 0.0;
        for (double x : v) nrm += x * x;
        nrm = std::sqrt(nrm);
        if (!(nrm > 0.0) || !std::isfinite(nrm)) fail(ErrorKind::SolverFailure, "inverse iteration broke down");
        for (double& x : v) x /= nrm;
    }
    const auto big = std::max_element(v.begin(), v.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
    if (*big < 0.0)
        for (double& x : v) x = -x;
    out.vector = std::move(v);
    return out;
}

/// Ratio u_{n+1}/u_n of the decaying (or, on the spectrum, outgoing)
/// solution of the lattice equation (2u_i - u_{i-1} - u_{i+1})/h^2 = z u_i.
/// Continuing the grid with this ratio makes the truncation exact for the
/// infinite lattice. On (0, 4/h^2) the root is chosen by the side of approach:
/// upper = true gives the limit from Im z > 0.
inline cplx lattice_exit_ratio(cplx z, double h, bool upper = true) {
    const cplx b = 2.0 - z * h * h;
    const cplx d = std::sqrt(b * b - 4.0);
    const cplx l1 = 0.5 * (b + d);
    const cplx l2 = 0.5 * (b - d);
    const double a1 = std::abs(l1);
    const double a2 = std::abs(l2);
    if (std::abs(a1 - a2) > 1e-14 * std::max(a1, a2)) return a1 < a2 ? l1 : l2;
    if (z == cplx(0.0)) return 1.0;
    // on the lattice spectrum: pick the outgoing root
    const bool first_up = l1.imag() > l2.imag();
    return (upper == first_up) ? l1 : l2;
}

} // namespace virtlev
