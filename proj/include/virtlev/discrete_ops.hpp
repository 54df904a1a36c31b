#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "virtlev/core.hpp"
#include "virtlev/lap_sweep.hpp"

namespace virtlev {

enum class SeqNorm { L1, L2, Linf };

/// Finite section x_1..x_n of a sequence. For l^1 data, tail bounds the
/// l^1 mass beyond the stored entries.
struct SeqVector {
    CVector entries;
    SeqNorm flavor = SeqNorm::L1;
    double tail = 0.0;

    std::size_t size() const noexcept { return std::size_t(entries.size()); }
};

inline SeqVector make_l1(CVector x, double tail = 0.0) {
    if (!x.allFinite()) fail(ErrorKind::InvalidInput, "sequence: non-finite entries");
    if (!(tail >= 0.0) || tail > 1e-12) fail(ErrorKind::InvalidInput, "sequence: l1 tail bound must lie in [0, 1e-12]");
    return {std::move(x), SeqNorm::L1, tail};
}

/// e_k in C^n (1-based index as in l^2(N)).
inline SeqVector unit_sequence(std::size_t n, std::size_t k) {
    if (k < 1 || k > n) fail(ErrorKind::InvalidInput, "unit_sequence: index out of range");
    CVector x = CVector::Zero(Eigen::Index(n));
    x[Eigen::Index(k - 1)] = 1.0;
    return make_l1(std::move(x));
}

namespace detail {

// y_i = -sum_k z^{-(k+1)} x_{i+k} through y_i = (y_{i+1} - x_i)/z, which is
// stable for |z| >= 1
inline CVector shift_series(const CVector& x, cplx z) {
    const Eigen::Index n = x.size();
    CVector y(n);
    cplx next = 0.0;
    for (Eigen::Index i = n - 1; i >= 0; --i) {
        next = (next - x[i]) / z;
        y[i] = next;
    }
    return y;
}

} // namespace detail

/// (L - z)^{-1} x for the left shift L on l^2(N), |z| > 1.
inline SeqVector shift_resolvent_apply(const SeqVector& x, cplx z) {
    if (!is_finite(z)) fail(ErrorKind::InvalidInput, "shift: non-finite z");
    if (!(std::abs(z) > 1.0)) fail(ErrorKind::OutsideResolventSet, "shift: |z| must exceed 1");
    return {detail::shift_series(x.entries, z), SeqNorm::Linf, x.tail};
}

/// Boundary value of (L - z)^{-1} x as z -> z0 from |z| > 1, for x in l^1.
/// The series converges absolutely at |z0| = 1; it is checked against the
/// resolvent at (1 + 1e-6) z0.
inline SeqVector shift_boundary_value(const SeqVector& x, cplx z0) {
    if (!is_finite(z0) || std::abs(std::abs(z0) - 1.0) > 1e-12)
        fail(ErrorKind::InvalidInput, "shift: |z0| must be 1");
    if (x.flavor != SeqNorm::L1) fail(ErrorKind::InvalidInput, "shift: boundary values need l1 data");
    SeqVector y{detail::shift_series(x.entries, z0), SeqNorm::Linf, x.tail};
    const CVector near = detail::shift_series(x.entries, (1.0 + 1e-6) * z0);
    if ((near - y.entries).cwiseAbs().maxCoeff() > 1e-4 * std::max(1.0, x.entries.cwiseAbs().sum()))
        fail(ErrorKind::SolverFailure, "shift: boundary value does not match the nearby resolvent");
    return y;
}

/// n x n section of the left shift: (L x)_i = x_{i+1}, last row zero.
inline CMatrix shift_matrix(std::size_t n) {
    CMatrix l = CMatrix::Zero(Eigen::Index(n), Eigen::Index(n));
    for (Eigen::Index i = 0; i + 1 < Eigen::Index(n); ++i) l(i, i + 1) = 1.0;
    return l;
}

/// (L_n - z)^{-1}: upper triangular with entries -z^{-(j-i+1)}.
inline CMatrix shift_resolvent_matrix(std::size_t n, cplx z) {
    if (z == cplx(0.0)) fail(ErrorKind::OutsideResolventSet, "shift: z = 0 is in the spectrum of the section");
    CMatrix r = CMatrix::Zero(Eigen::Index(n), Eigen::Index(n));
    std::vector<cplx> powers(n);
    cplx p = 1.0 / z;
    for (std::size_t k = 0; k < n; ++k, p /= z) powers[k] = -p;
    for (Eigen::Index i = 0; i < Eigen::Index(n); ++i)
        for (Eigen::Index j = i; j < Eigen::Index(n); ++j) r(i, j) = powers[std::size_t(j - i)];
    return r;
}

struct ShiftVirtualLevel {
    cplx z0;
    CVector phi;
    std::size_t j_star = 0;   // 1-based index of the functional e_{j*}/phi_{j*}
    CVector psi;              // boundary value of (L - z0)^{-1} phi
    double residual = 0.0;    // sup of (A - z0) psi over the first n - m entries
    std::size_t virtual_space_dim = 0;
};

/// A = L - K(L - z0), K = phi <e_{j*}, .>/phi_{j*}, turns z0 on the unit
/// circle into a virtual level with state Psi = (L - z0)^{-1} phi. The
/// virtual state space is the kernel of (I - K)(L_n - z0).
inline ShiftVirtualLevel build_shift_virtual_level(cplx z0, const CVector& phi, std::size_t n = 512, std::size_t m = 64) {
    if (phi.size() == 0 || std::size_t(phi.size()) > n) fail(ErrorKind::InvalidInput, "shift: phi must be non-empty with support <= n");
    if (m >= n) fail(ErrorKind::InvalidInput, "shift: tail band must be shorter than the section");
    ShiftVirtualLevel out;
    out.z0 = z0;
    out.phi = CVector::Zero(Eigen::Index(n));
    out.phi.head(phi.size()) = phi;
    Eigen::Index arg = 0;
    const double peak = out.phi.cwiseAbs().maxCoeff(&arg);
    if (!(peak > 0.0)) fail(ErrorKind::DegenerateFunctional, "shift: phi vanishes, no functional with lambda(phi) = 1");
    out.j_star = std::size_t(arg) + 1;
    const cplx phi_j = out.phi[arg];

    out.psi = shift_boundary_value(make_l1(out.phi), z0).entries;

    const auto apply_a_minus_z0 = [&](const CVector& v) {
        CVector lv = CVector::Zero(v.size());
        lv.head(v.size() - 1) = v.tail(v.size() - 1);
        const CVector w = lv - z0 * v;  // (L - z0) v
        return CVector(w - out.phi * (w[arg] / phi_j));
    };
    const CVector r = apply_a_minus_z0(out.psi);
    out.residual = r.head(Eigen::Index(n - m)).cwiseAbs().maxCoeff();

    CMatrix lz = shift_matrix(n);
    lz.diagonal().array() -= z0;
    CMatrix k = out.phi * (CVector::Unit(Eigen::Index(n), arg).transpose() / phi_j);
    const CMatrix op = (CMatrix::Identity(Eigen::Index(n), Eigen::Index(n)) - k) * lz;
    Eigen::BDCSVD<CMatrix> svd(op);
    const RVector sv = svd.singularValues();
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] <= 1e-10 * sv[0]) ++out.virtual_space_dim;
    return out;
}

struct ExceptionalPointTrial {
    std::size_t rank = 0;
    double alpha = 0.0;
    double r_squared = 0.0;
};

/// The zero operator on C^n has an exceptional point of infinite rank at 0:
/// for random rank-k B = U V^*, the norm of (B - z)^{-1} P0 with
/// P0 = I - U (V^* U)^{-1} V^* grows like 1/|z|, so no such B regularizes.
inline std::vector<ExceptionalPointTrial> zero_operator_trials(std::size_t n, const std::vector<std::size_t>& ranks,
                                                               std::uint64_t seed = 7) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    const auto gaussian = [&](std::size_t r, std::size_t c) {
        CMatrix a = CMatrix::Zero(Eigen::Index(r), Eigen::Index(c));
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, j) = cplx(gauss(rng), gauss(rng));
        return a;
    };
    std::vector<ExceptionalPointTrial> out;
    for (std::size_t k : ranks) {
        if (k == 0 || k >= n) fail(ErrorKind::InvalidInput, "zero operator: rank must lie in [1, n)");
        const CMatrix u = gaussian(n, k);
        const CMatrix v = gaussian(n, k);
        const CMatrix b = u * v.adjoint();
        const CMatrix p0 = CMatrix::Identity(Eigen::Index(n), Eigen::Index(n)) - u * (v.adjoint() * u).lu().solve(v.adjoint());
        std::vector<SweepPoint> pts;
        for (int e = 0; e <= 6; ++e) {
            const double r = std::pow(10.0, -1.0 - 0.5 * e);
            const cplx z = r * std::polar(1.0, 0.75 * pi);
            CMatrix a = b;
            a.diagonal().array() -= z;
            const CMatrix m = a.lu().solve(p0);
            pts.push_back({r, largest_singular_value(m, {}).value, z});
        }
        const FitResult f = fit_exponent(pts);
        out.push_back({k, f.alpha, f.r_squared});
    }
    return out;
}

} // namespace virtlev
