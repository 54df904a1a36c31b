#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "virtlev/core.hpp"
#include "virtlev/potential.hpp"
#include "virtlev/tridiagonal.hpp"
#include "virtlev/weighted_space.hpp"

namespace virtlev {

enum class FormGeometry { Line, Radial3D };

/// Discrete form a[u] = integral |u'|^2 + V |u|^2 with Dirichlet conditions at
/// the ends of the truncated domain: nodes -R + i h on the line, r = i h on
/// the half line (acting on u = r psi, s-wave). H is its tridiagonal matrix.
struct QuadraticForm {
    FormGeometry geometry = FormGeometry::Line;
    double radius = 0.0;
    double spacing = 0.0;
    std::vector<double> points;
    std::vector<double> potential;

    std::size_t size() const noexcept { return points.size(); }
    std::vector<double> diagonal() const {
        std::vector<double> d(size());
        for (std::size_t i = 0; i < size(); ++i) d[i] = 2.0 / (spacing * spacing) + potential[i];
        return d;
    }
    std::vector<double> off_diagonal() const {
        return std::vector<double>(size() ? size() - 1 : 0, -1.0 / (spacing * spacing));
    }
};

inline QuadraticForm make_form(FormGeometry geometry, const Potential1D& v, double radius, double spacing) {
    validate(v);
    if (!(spacing > 0.0) || !(radius > 4.0 * spacing)) fail(ErrorKind::InvalidInput, "form: need R > 4h > 0");
    QuadraticForm f;
    f.geometry = geometry;
    const auto cells = static_cast<std::size_t>(std::llround((geometry == FormGeometry::Line ? 2.0 : 1.0) * radius / spacing));
    f.spacing = spacing;
    f.radius = geometry == FormGeometry::Line ? 0.5 * double(cells) * spacing : double(cells) * spacing;
    const double start = geometry == FormGeometry::Line ? -f.radius : 0.0;
    for (std::size_t i = 1; i < cells; ++i) {
        const double x = start + double(i) * spacing;
        const cplx vi = cell_average(v, x, spacing);
        if (vi.imag() != 0.0) fail(ErrorKind::InvalidInput, "form: potential must be real");
        f.points.push_back(x);
        f.potential.push_back(vi.real());
    }
    const double lowest = lowest_eigenpair(f.diagonal(), f.off_diagonal()).value;
    if (lowest < -1e-10) fail(ErrorKind::InvalidInput, "form: not nonnegative");
    return f;
}

enum class Dichotomy { NullState, WeightedGap, Inconclusive };

constexpr std::string_view to_string(Dichotomy d) noexcept {
    switch (d) {
    case Dichotomy::NullState: return "NullState";
    case Dichotomy::WeightedGap: return "WeightedGap";
    case Dichotomy::Inconclusive: return "Inconclusive";
    }
    return "unknown";
}

struct TraceRow {
    int j = 0;
    double lambda = 0.0;
    double sup_dist_to_limit = 0.0;  // on |x| <= K
};

struct DichotomyResult {
    Dichotomy verdict = Dichotomy::Inconclusive;
    std::vector<double> points;
    std::vector<double> phi;    // NullState: sup-normalized limit
    double weight_c = 0.0;      // WeightedGap: w = c <x>^{-4}
    double margin = 0.0;        // lowest eigenvalue of H - w
    double cauchy_gap = 0.0;    // sup over |x| <= K of |psi_jmax - psi_{jmax-1}|
    std::vector<TraceRow> trace;
};

struct GapCheck {
    bool holds = false;
    double margin = 0.0;
};

/// Lowest eigenvalue of H - w; the gap inequality holds when it is >= -1e-10.
inline GapCheck hardy_gap_check(const QuadraticForm& form, const std::vector<double>& w) {
    if (w.size() != form.size()) fail(ErrorKind::Dimension, "hardy_gap_check: weight length mismatch");
    std::vector<double> d = form.diagonal();
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (!(w[i] >= 0.0) || !std::isfinite(w[i])) fail(ErrorKind::InvalidInput, "hardy_gap_check: weight must be >= 0");
        d[i] -= w[i];
    }
    const double mu = lowest_eigenpair(d, form.off_diagonal()).value;
    return {mu >= -1e-10, mu};
}

inline std::vector<double> decay_weight(const QuadraticForm& form, double c) {
    std::vector<double> w(form.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = c * weight(form.points[i], WeightExponent(-4.0));
    return w;
}

struct NullStateOptions {
    double cauchy_tolerance = 1e-3;
    double safety = 0.5;  // WeightedGap reports this fraction of the largest admissible c
};

/// Either a null state or a weighted spectral gap. H - W_j with
/// W_j = (1/j) 1_{|x| <= K} is examined for j = 1..j_max. If every H - W_j has
/// a negative eigenvalue, the sup-normalized ground states are followed to a
/// limit on |x| <= K (NullState). If some H - W_j is nonnegative, the largest
/// c with H - c <x>^{-4} >= 0 is found by bisection (WeightedGap).
inline DichotomyResult null_state_iteration(const QuadraticForm& form, double k_radius, int j_max,
                                            const NullStateOptions& o = {}) {
    if (j_max < 2) fail(ErrorKind::InvalidInput, "null_state_iteration: need j_max >= 2");
    if (!(k_radius > 0.0)) fail(ErrorKind::InvalidInput, "null_state_iteration: K must be positive");
    DichotomyResult res;
    res.points = form.points;
    const std::vector<double> base = form.diagonal();
    const std::vector<double> off = form.off_diagonal();
    std::vector<std::vector<double>> states;
    std::vector<double> lambdas;
    bool gap = false;
    for (int j = 1; j <= j_max; ++j) {
        std::vector<double> d = base;
        for (std::size_t i = 0; i < d.size(); ++i)
            if (std::abs(form.points[i]) <= k_radius) d[i] -= 1.0 / j;
        Eigenpair ep = lowest_eigenpair(d, off);
        lambdas.push_back(ep.value);
        const double peak = *std::max_element(ep.vector.begin(), ep.vector.end());
        for (double& x : ep.vector) x /= peak;
        states.push_back(std::move(ep.vector));
        if (!(ep.value < -1e-12)) {
            gap = true;
            break;
        }
    }
    const auto inner_dist = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double m = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (std::abs(form.points[i]) <= k_radius) m = std::max(m, std::abs(a[i] - b[i]));
        return m;
    };
    for (std::size_t j = 0; j < states.size(); ++j)
        res.trace.push_back({int(j) + 1, lambdas[j], inner_dist(states[j], states.back())});

    if (!gap) {
        res.cauchy_gap = inner_dist(states[states.size() - 1], states[states.size() - 2]);
        const auto& phi = states.back();
        const bool positive = std::all_of(phi.begin(), phi.end(), [](double x) { return x > 0.0; });
        if (res.cauchy_gap <= o.cauchy_tolerance && positive) {
            res.verdict = Dichotomy::NullState;
            res.phi = phi;
        }
        return res;
    }

    double lo = 0.0;
    double hi = 1.0;
    int grow = 0;
    while (hardy_gap_check(form, decay_weight(form, hi)).holds) {
        lo = hi;
        hi *= 2.0;
        if (++grow > 60) fail(ErrorKind::SolverFailure, "null_state_iteration: weight bisection unbounded");
    }
    for (int it = 0; it < 50; ++it) {
        const double mid = 0.5 * (lo + hi);
        (hardy_gap_check(form, decay_weight(form, mid)).holds ? lo : hi) = mid;
    }
    res.weight_c = o.safety * lo;
    res.margin = hardy_gap_check(form, decay_weight(form, res.weight_c)).margin;
    res.verdict = res.weight_c > 0.0 && res.margin >= 0.0 ? Dichotomy::WeightedGap : Dichotomy::Inconclusive;
    return res;
}

struct DichotomyCheck {
    DichotomyResult at_r;
    DichotomyResult at_2r;
    bool stable = false;
};

/// The dichotomy on [-R, R] (or [0, R]) and on the doubled domain.
inline DichotomyCheck criticality_dichotomy(FormGeometry geometry, const Potential1D& v, double radius, double spacing,
                                            double k_radius = 1.0, int j_max = 64, const NullStateOptions& o = {}) {
    DichotomyCheck c;
    c.at_r = null_state_iteration(make_form(geometry, v, radius, spacing), k_radius, j_max, o);
    c.at_2r = null_state_iteration(make_form(geometry, v, 2.0 * radius, spacing), k_radius, j_max, o);
    c.stable = c.at_r.verdict == c.at_2r.verdict && c.at_r.verdict != Dichotomy::Inconclusive;
    return c;
}

} // namespace virtlev
