#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "virtlev/core.hpp"
#include "virtlev/free_resolvent.hpp"
#include "virtlev/potential.hpp"
#include "virtlev/threshold_report.hpp"
#include "virtlev/weighted_space.hpp"

namespace virtlev {

enum class JostSide { Plus, Minus };

/// A solution of -theta'' + V theta = z theta with its derivative on the grid.
struct JostSolution {
    CVector value;
    CVector derivative;
};

struct JostPair {
    Grid1D grid;
    cplx z;
    JostSolution plus;
    JostSolution minus;
    cplx wronskian;
    double wronskian_deviation = 0.0;  // max_x |W(x) - W(0)|
};

namespace detail {

inline void check_jost_inputs(const Potential1D& v, const Grid1D& grid, cplx z) {
    validate(v);
    if (!is_finite(z)) fail(ErrorKind::InvalidInput, "jost: non-finite z");
    if (z.imag() == 0.0 && z.real() > 0.0)
        fail(ErrorKind::Unsupported, "jost: z inside the continuous spectrum");
    if (!(grid.half_width() > v.support_radius))
        fail(ErrorKind::InvalidInput, "jost: grid must extend beyond the support of V");
}

} // namespace detail

/// Jost solution normalized to the free asymptotic e^{-kx} (plus) or e^{kx}
/// (minus), k = sqrt(-z), which it equals exactly outside the support.
/// Inside it is integrated inward with classical RK4 on the grid. V is read
/// one-sidedly at step ends, so jumps located at nodes keep fourth order.
inline JostSolution jost_solve(const Potential1D& v, const Grid1D& grid, cplx z, JostSide side) {
    detail::check_jost_inputs(v, grid, z);
    const cplx k = sqrt_minus_z(SpectralParameter::interior(z)).value;
    const std::size_t n = grid.size();
    const double h = grid.spacing();
    const double nudge = 1e-9 * h;
    JostSolution s{CVector(Eigen::Index(n)), CVector(Eigen::Index(n))};

    for (std::size_t i = 0; i < n; ++i) {
        const double x = grid.point(i);
        if (!is_finite(v(x))) fail(ErrorKind::InvalidInput, "jost: non-finite potential value");
    }

    const double sign = side == JostSide::Plus ? 1.0 : -1.0;
    // index along the direction of integration: t = 0 is the outer edge
    const auto node = [&](std::size_t t) { return side == JostSide::Plus ? n - 1 - t : t; };

    std::size_t t = 0;
    while (t < n && sign * grid.point(node(t)) >= v.support_radius) {
        const double x = grid.point(node(t));
        const cplx e = std::exp(-sign * k * x);
        s.value[Eigen::Index(node(t))] = e;
        s.derivative[Eigen::Index(node(t))] = -sign * k * e;
        ++t;
    }
    if (t == 0) fail(ErrorKind::InvalidInput, "jost: no grid node outside the support");

    const double step = -sign * h;
    for (; t < n; ++t) {
        const std::size_t from = node(t - 1);
        const double x0 = grid.point(from);
        const double x1 = x0 + step;
        const cplx q0 = v(x0 + sign * -nudge) - z;
        const cplx qm = v(x0 + 0.5 * step) - z;
        const cplx q1 = v(x1 + sign * nudge) - z;
        const cplx y0 = s.value[Eigen::Index(from)];
        const cplx p0 = s.derivative[Eigen::Index(from)];
        // y' = p, p' = q y
        const cplx k1y = p0, k1p = q0 * y0;
        const cplx k2y = p0 + 0.5 * step * k1p, k2p = qm * (y0 + 0.5 * step * k1y);
        const cplx k3y = p0 + 0.5 * step * k2p, k3p = qm * (y0 + 0.5 * step * k2y);
        const cplx k4y = p0 + step * k3p, k4p = q1 * (y0 + step * k3y);
        s.value[Eigen::Index(node(t))] = y0 + step / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        s.derivative[Eigen::Index(node(t))] = p0 + step / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    }
    if (!s.value.allFinite() || !s.derivative.allFinite())
        fail(ErrorKind::DiscretizationFailure, "jost: solution overflowed");
    return s;
}

/// Both Jost solutions and their Wronskian W = theta_+ theta_-' - theta_+' theta_-
/// at x = 0, with the spread of W(x) over the grid recorded. A spread above
/// 1e-4 max(1, |W|) means the grid does not resolve V.
inline JostPair jost_pair(const Potential1D& v, const Grid1D& grid, cplx z = 0.0) {
    JostPair pair{grid, z, jost_solve(v, grid, z, JostSide::Plus), jost_solve(v, grid, z, JostSide::Minus), 0.0, 0.0};
    const auto w_at = [&](Eigen::Index i) {
        return pair.plus.value[i] * pair.minus.derivative[i] - pair.plus.derivative[i] * pair.minus.value[i];
    };
    pair.wronskian = w_at(Eigen::Index(grid.center_index()));
    for (Eigen::Index i = 0; i < Eigen::Index(grid.size()); ++i)
        pair.wronskian_deviation = std::max(pair.wronskian_deviation, std::abs(w_at(i) - pair.wronskian));
    return pair;
}

inline cplx wronskian(const JostPair& pair) {
    if (pair.plus.value.size() != pair.minus.value.size())
        fail(ErrorKind::Dimension, "wronskian: solutions on different grids");
    if (pair.wronskian_deviation > 1e-4 * std::max(1.0, std::abs(pair.wronskian)))
        fail(ErrorKind::DiscretizationFailure, "wronskian: W(x) not constant on the grid");
    return pair.wronskian;
}

/// 1 + sup|theta_+| sup|theta_-|, the scale against which W is compared.
inline double wronskian_scale(const JostPair& pair) {
    return 1.0 + pair.plus.value.cwiseAbs().maxCoeff() * pair.minus.value.cwiseAbs().maxCoeff();
}

/// G(x, y) = theta_+(max(x,y)) theta_-(min(x,y)) / W, the resolvent kernel at z.
inline KernelOperator green_kernel(const JostPair& pair, double tol = 1e-6) {
    const cplx w = wronskian(pair);
    if (std::abs(w) <= tol * wronskian_scale(pair))
        fail(ErrorKind::VirtualLevel, "green_kernel: Wronskian vanishes");
    const Eigen::Index n = pair.plus.value.size();
    CMatrix g(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            g(i, j) = (i >= j ? pair.plus.value[i] * pair.minus.value[j] : pair.minus.value[i] * pair.plus.value[j]) / w;
    const Sampling s = pair.grid.sampling();
    return KernelOperator(s, s, std::move(g));
}

/// Threshold test at z = 0 from the Wronskian. |W| <= tol * scale gives
/// Virtual with state theta_+, up to 100 tol * scale Inconclusive, and
/// Regular otherwise (with the Green kernel attached).
inline ThresholdReport classify_threshold_1d(const Potential1D& v, const Grid1D& grid, double tol = 1e-6) {
    const JostPair pair = jost_pair(v, grid, 0.0);
    const cplx w = wronskian(pair);
    const double scale = wronskian_scale(pair);
    ThresholdReport rep;
    rep.add("wronskian_re", w.real());
    rep.add("wronskian_im", w.imag());
    rep.add("wronskian_scale", scale);
    rep.add("wronskian_deviation", pair.wronskian_deviation);
    const double a = std::abs(w);
    if (a <= tol * scale) {
        rep.classification = Classification::Virtual;
        rep.rank = 1;
        rep.state_points = grid.points();
        rep.states.push_back(normalize_sup(pair.plus.value));
    } else if (a <= 100.0 * tol * scale) {
        rep.classification = Classification::Inconclusive;
        rep.notes.emplace_back("Wronskian within two decades of the tolerance");
    } else {
        rep.classification = Classification::Regular;
        rep.rank = 0;
        rep.green = green_kernel(pair, tol);
    }
    return rep;
}

} // namespace virtlev
