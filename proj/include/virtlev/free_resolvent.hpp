#pragma once

#include <cmath>
#include <complex>

#include "virtlev/core.hpp"
#include "virtlev/special_functions.hpp"
#include "virtlev/weighted_space.hpp"

namespace virtlev {

/// How the spectral parameter approaches the real axis.
enum class Approach { Interior, FromUpperHalfPlane, FromLowerHalfPlane, AlongNegativeAxis };

struct SpectralParameter {
    cplx z;
    Approach approach = Approach::Interior;

    static SpectralParameter interior(cplx z) { return {z, Approach::Interior}; }
    static SpectralParameter upper(cplx z) { return {z, Approach::FromUpperHalfPlane}; }
    static SpectralParameter lower(cplx z) { return {z, Approach::FromLowerHalfPlane}; }
};

/// The square root k = sqrt(-z) fixed by Re k > 0 (or its boundary value).
struct BranchRoot {
    cplx value;
};

/// sqrt(-z) with Re > 0 off [0, inf). On the positive axis the boundary value
/// is taken from the side of approach: -i sqrt(z0) from above, +i sqrt(z0)
/// from below, so that e^{-k|x|} is the outgoing wave e^{i sqrt(z0)|x|} for
/// the upper limit.
inline BranchRoot sqrt_minus_z(const SpectralParameter& p) {
    const cplx z = p.z;
    if (!is_finite(z)) fail(ErrorKind::InvalidInput, "sqrt_minus_z: non-finite z");
    if (z.imag() == 0.0 && z.real() > 0.0) {
        const double root = std::sqrt(z.real());
        switch (p.approach) {
        case Approach::FromUpperHalfPlane: return {cplx(0.0, -root)};
        case Approach::FromLowerHalfPlane: return {cplx(0.0, root)};
        default:
            fail(ErrorKind::BranchAmbiguity, "sqrt_minus_z: z on the positive axis needs a side of approach");
        }
    }
    if (z.imag() == 0.0) return {cplx(std::sqrt(-z.real()), 0.0)};
    return {std::sqrt(cplx(-z.real(), -z.imag()))};
}

namespace detail {

// (1 - e^{-w}) for complex w, accurate when |w| is small
inline cplx one_minus_exp_neg(cplx w) {
    if (std::abs(w) > 0.5) return 1.0 - std::exp(-w);
    cplx term = w;
    cplx sum = w;
    for (int k = 2; k < 30; ++k) {
        term *= -w / double(k);
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
}

inline void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) fail(ErrorKind::InvalidInput, what);
}

} // namespace detail

/// Free resolvent kernel in one dimension, e^{-k|x-y|}/(2k).
inline cplx kernel_1d(double x, double y, const SpectralParameter& p) {
    detail::require_finite(x - y, "kernel_1d: non-finite point");
    const cplx k = sqrt_minus_z(p).value;
    if (k == cplx(0.0)) fail(ErrorKind::ThresholdSingularity, "kernel_1d: no kernel at z = 0");
    return std::exp(-std::abs(x - y) * k) / (2.0 * k);
}

/// Free resolvent kernel in three dimensions as a function of r = |x - y|,
/// e^{-kr}/(4 pi r). Bounded at z = 0.
inline cplx kernel_3d(double r, const SpectralParameter& p) {
    detail::require_finite(r, "kernel_3d: non-finite r");
    if (!(r > 0.0)) fail(ErrorKind::OnDiagonalSingularity, "kernel_3d: r must be positive");
    const cplx k = sqrt_minus_z(p).value;
    return std::exp(-r * k) / (4.0 * pi * r);
}

/// Free resolvent kernel in two dimensions, K_0(kr)/(2 pi). Only off the
/// closed positive axis.
inline cplx kernel_2d(double r, const SpectralParameter& p) {
    detail::require_finite(r, "kernel_2d: non-finite r");
    if (!(r > 0.0)) fail(ErrorKind::OnDiagonalSingularity, "kernel_2d: r must be positive");
    if (on_positive_axis(p.z)) fail(ErrorKind::Unsupported, "kernel_2d: boundary values on [0, inf) not supported");
    const cplx k = sqrt_minus_z(p).value;
    return special::bessel_k0(r * k) / (2.0 * pi);
}

/// Kernel of the s-wave part of the 3D free resolvent acting on u = r psi:
/// (e^{-k|r-r'|} - e^{-k(r+r')})/(2k), which tends to min(r, r') at k = 0.
inline cplx radial_kernel_3d(double r, double rp, const SpectralParameter& p) {
    if (!(r > 0.0) || !(rp > 0.0)) fail(ErrorKind::InvalidInput, "radial_kernel_3d: radii must be positive");
    const cplx k = sqrt_minus_z(p).value;
    const double a = std::min(r, rp);
    const double b = std::max(r, rp);
    if (k == cplx(0.0)) return a;
    // e^{-k b} (e^{k a} - e^{-k a})/(2k) = e^{-k(b-a)} (1 - e^{-2ka})/(2k)
    return std::exp(-k * (b - a)) * detail::one_minus_exp_neg(2.0 * k * a) / (2.0 * k);
}

/// Kernel of the s-wave part of the 2D free resolvent acting on
/// u = sqrt(r) psi: sqrt(r r') I_0(k r_<) K_0(k r_>).
inline cplx radial_kernel_2d(double r, double rp, const SpectralParameter& p) {
    if (!(r > 0.0) || !(rp > 0.0)) fail(ErrorKind::InvalidInput, "radial_kernel_2d: radii must be positive");
    if (on_positive_axis(p.z)) fail(ErrorKind::Unsupported, "radial_kernel_2d: boundary values on [0, inf) not supported");
    const cplx k = sqrt_minus_z(p).value;
    const double a = std::min(r, rp);
    const double b = std::max(r, rp);
    return std::sqrt(a * b) * special::bessel_i0_scaled(k * a) * special::bessel_k0_scaled(k * b) *
           std::exp(k * (a - b));
}

/// Free resolvent of dimension d sampled on a symmetric line grid.
///
/// d = 1 uses the exact kernel. d = 2 uses K_0(k|x - y|)/(2 pi) with the
/// logarithmic diagonal replaced by its cell average over [-h/2, h/2]. d = 3
/// is rejected: the 1/|x - y| singularity is not integrable along a line.
inline KernelOperator build_free_kernel_operator(int d, const Grid1D& grid, const SpectralParameter& p) {
    const std::size_t n = grid.size();
    const double h = grid.spacing();
    CMatrix m = CMatrix::Zero(Eigen::Index(n), Eigen::Index(n));
    if (d == 1) {
        const cplx k = sqrt_minus_z(p).value;
        if (k == cplx(0.0)) fail(ErrorKind::ThresholdSingularity, "free kernel: no kernel at z = 0");
        // the kernel depends on |i - j| only
        std::vector<cplx> row(n);
        for (std::size_t t = 0; t < n; ++t) row[t] = std::exp(-double(t) * h * k) / (2.0 * k);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                m(Eigen::Index(i), Eigen::Index(j)) = row[i > j ? i - j : j - i];
    } else if (d == 2) {
        if (on_positive_axis(p.z)) fail(ErrorKind::Unsupported, "free kernel d=2: z on [0, inf) not supported");
        const cplx k = sqrt_minus_z(p).value;
        std::vector<cplx> row(n);
        row[0] = (1.0 - std::log(0.5 * h) - std::log(0.5 * k) - euler_gamma) / (2.0 * pi);
        for (std::size_t t = 1; t < n; ++t) row[t] = kernel_2d(double(t) * h, p);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                m(Eigen::Index(i), Eigen::Index(j)) = row[i > j ? i - j : j - i];
    } else if (d == 3) {
        fail(ErrorKind::Unsupported, "free kernel d=3 needs a RadialGrid");
    } else {
        fail(ErrorKind::InvalidInput, "free kernel: dimension must be 1, 2 or 3");
    }
    const Sampling s = grid.sampling();
    return KernelOperator(s, s, std::move(m));
}

/// Radial (s-wave) free resolvent for d = 2 or 3 on a radial grid. The
/// kernel acts on the reduced function u = r^{(d-1)/2} psi, for which the
/// radial measure becomes dr; weighted norms with <r>^s are unchanged.
inline KernelOperator build_free_kernel_operator(int d, const RadialGrid& grid, const SpectralParameter& p) {
    const std::size_t n = grid.size();
    CMatrix m = CMatrix::Zero(Eigen::Index(n), Eigen::Index(n));
    if (d != 2 && d != 3) fail(ErrorKind::Unsupported, "radial free kernel: dimension must be 2 or 3");
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double r = grid.point(i);
            const double rp = grid.point(j);
            const cplx v = d == 3 ? radial_kernel_3d(r, rp, p) : radial_kernel_2d(r, rp, p);
            m(Eigen::Index(i), Eigen::Index(j)) = v;
            m(Eigen::Index(j), Eigen::Index(i)) = v;
        }
    }
    const Sampling s = grid.sampling();
    return KernelOperator(s, s, std::move(m));
}

} // namespace virtlev
