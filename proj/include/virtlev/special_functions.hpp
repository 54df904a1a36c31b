#pragma once

#include <cmath>
#include <complex>

#include "virtlev/core.hpp"

namespace virtlev::special {

namespace detail {

// Power series, used for |t| <= 2. With |t^2/4| <= 1 the k-th term is
// bounded by H_k/(k!)^2, which drops below 1e-17 before k = 13; 30 terms cap it.
inline void k0_i0_series(cplx t, cplx& k0, cplx& i0) {
    const cplx q = 0.25 * t * t;
    cplx term = 1.0;
    cplx sum_i = 1.0;
    cplx sum_h = 0.0;
    double harmonic = 0.0;
    for (int k = 1; k <= 30; ++k) {
        term *= q / double(k * k);
        harmonic += 1.0 / k;
        sum_i += term;
        sum_h += harmonic * term;
        if (std::abs(term) * (1.0 + harmonic) < 1e-17 * std::abs(sum_i)) break;
    }
    i0 = sum_i;
    k0 = -(std::log(0.5 * t) + euler_gamma) * sum_i + sum_h;
}

// Steed's continued fraction (Temme's CF2) for exp(t) K_0(t), valid for
// |t| >= 2 and Re t > 0; converges to machine precision in O(1/|t|) terms.
inline cplx k0_scaled_cf2(cplx x) {
    constexpr double eps = 1e-16;
    const double a1 = 0.25;
    cplx b = 2.0 * (1.0 + x);
    cplx d = 1.0 / b;
    cplx h = d;
    cplx delh = d;
    cplx q1 = 0.0;
    cplx q2 = 1.0;
    cplx q = a1;
    cplx c = a1;
    double a = -a1;
    cplx s = 1.0 + q * delh;
    for (int i = 2; i <= 100000; ++i) {
        a -= 2.0 * (i - 1);
        c = -a * c / double(i);
        const cplx qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        const cplx dels = q * delh;
        s += dels;
        if (std::abs(dels) < eps * std::abs(s)) break;
    }
    return std::sqrt(pi / (2.0 * x)) / s;
}

} // namespace detail

/// Modified Bessel function K_0 for Re t > 0.
///
/// Power series for |t| <= 2; for |t| > 2 the continued fraction of Steed
/// and Temme. The large-argument asymptotic series is not used because its
/// smallest term near |t| = 2 is still ~1e-2.
inline cplx bessel_k0(cplx t) {
    if (!(t.real() > 0.0)) fail(ErrorKind::InvalidInput, "bessel_k0: requires Re t > 0");
    if (std::abs(t) <= 2.0) {
        cplx k0, i0;
        detail::k0_i0_series(t, k0, i0);
        return k0;
    }
    return std::exp(-t) * detail::k0_scaled_cf2(t);
}

/// exp(t) K_0(t).
inline cplx bessel_k0_scaled(cplx t) {
    if (!(t.real() > 0.0)) fail(ErrorKind::InvalidInput, "bessel_k0: requires Re t > 0");
    if (std::abs(t) <= 2.0) return std::exp(t) * bessel_k0(t);
    return detail::k0_scaled_cf2(t);
}

/// exp(-t) I_0(t) for Re t >= 0. Series up to |t| = 20, asymptotic beyond
/// (optimal truncation there leaves a relative error below e^{-40}).
inline cplx bessel_i0_scaled(cplx t) {
    if (std::abs(t) <= 20.0) {
        const cplx q = 0.25 * t * t;
        cplx term = 1.0;
        cplx sum = 1.0;
        for (int k = 1; k <= 200; ++k) {
            term *= q / double(k * k);
            sum += term;
            if (std::abs(term) < 1e-17 * std::abs(sum)) break;
        }
        return std::exp(-t) * sum;
    }
    cplx term = 1.0;
    cplx sum = 1.0;
    double prev = 1.0;
    for (int k = 1; k < 60; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= odd * odd / (8.0 * k * t);
        const double mag = std::abs(term);
        if (mag > prev) break;
        sum += term;
        prev = mag;
        if (mag < 1e-17) break;
    }
    return sum / std::sqrt(2.0 * pi * t);
}

inline cplx bessel_i0(cplx t) { return std::exp(t) * bessel_i0_scaled(t); }

} // namespace virtlev::special
