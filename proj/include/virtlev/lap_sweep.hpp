#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "virtlev/core.hpp"
#include "virtlev/free_resolvent.hpp"
#include "virtlev/parallel.hpp"
#include "virtlev/potential.hpp"
#include "virtlev/threshold_report.hpp"
#include "virtlev/tridiagonal.hpp"
#include "virtlev/weighted_space.hpp"

namespace virtlev {

/// Finite-rank term f -> u <v, f>, with <v, f> = integral of conj(v) f.
struct RankOneTerm {
    std::function<cplx(double)> u;
    std::function<cplx(double)> v;
    std::string label;
};

struct Free1D {
    Grid1D grid;
};
struct Free2DRadial {
    RadialGrid grid;
};
struct Free3DRadial {
    RadialGrid grid;
};
/// -d^2/dx^2 + V plus optional finite-rank terms, by second-order finite
/// differences with exact lattice boundary conditions at +-R.
struct Schrodinger1D {
    Potential1D potential;
    Grid1D grid;
    std::vector<RankOneTerm> perturbation;
};
/// s-wave part of -Delta + V(|x|) in 3D, acting on u = r psi, Dirichlet at 0.
struct Schrodinger3DRadial {
    Potential1D potential;
    RadialGrid grid;
};
/// Explicit matrix on C^n with the counting measure.
struct MatrixOperator {
    CMatrix matrix;
};

using OperatorSpec = std::variant<Free1D, Free2DRadial, Free3DRadial, Schrodinger1D, Schrodinger3DRadial, MatrixOperator>;

inline std::string kind_name(const OperatorSpec& op) {
    struct {
        std::string operator()(const Free1D&) const { return "free1d"; }
        std::string operator()(const Free2DRadial&) const { return "free2d"; }
        std::string operator()(const Free3DRadial&) const { return "free3d"; }
        std::string operator()(const Schrodinger1D& s) const {
            return s.perturbation.empty() ? "schrodinger1d" : "rank_one_perturbed1d";
        }
        std::string operator()(const Schrodinger3DRadial&) const { return "schrodinger3d"; }
        std::string operator()(const MatrixOperator&) const { return "matrix"; }
    } v;
    return std::visit(v, op);
}

/// Grid spacing, or 0 for explicit matrices.
inline double grid_spacing(const OperatorSpec& op) {
    struct {
        double operator()(const Free1D& o) const { return o.grid.spacing(); }
        double operator()(const Free2DRadial& o) const { return o.grid.spacing(); }
        double operator()(const Free3DRadial& o) const { return o.grid.spacing(); }
        double operator()(const Schrodinger1D& o) const { return o.grid.spacing(); }
        double operator()(const Schrodinger3DRadial& o) const { return o.grid.spacing(); }
        double operator()(const MatrixOperator&) const { return 0.0; }
    } v;
    return std::visit(v, op);
}

/// Same operator on the grid with half the spacing; nullopt for matrices.
inline std::optional<OperatorSpec> refined(const OperatorSpec& op) {
    struct {
        std::optional<OperatorSpec> operator()(const Free1D& o) const { return Free1D{o.grid.refined()}; }
        std::optional<OperatorSpec> operator()(const Free2DRadial& o) const { return Free2DRadial{o.grid.refined()}; }
        std::optional<OperatorSpec> operator()(const Free3DRadial& o) const { return Free3DRadial{o.grid.refined()}; }
        std::optional<OperatorSpec> operator()(const Schrodinger1D& o) const {
            return Schrodinger1D{o.potential, o.grid.refined(), o.perturbation};
        }
        std::optional<OperatorSpec> operator()(const Schrodinger3DRadial& o) const {
            return Schrodinger3DRadial{o.potential, o.grid.refined()};
        }
        std::optional<OperatorSpec> operator()(const MatrixOperator&) const { return std::nullopt; }
    } v;
    return std::visit(v, op);
}

namespace detail {

inline bool upper_side(const SpectralParameter& p) { return p.approach != Approach::FromLowerHalfPlane; }

} // namespace detail

/// Finite-difference matrix of -D^2 + V - z on the line grid. The first and
/// last rows carry the lattice exit ratio, which continues the decaying (or
/// outgoing) solution exactly beyond +-R.
inline Tridiagonal<cplx> schrodinger_matrix(const Potential1D& v, const Grid1D& grid, const SpectralParameter& p) {
    validate(v);
    if (!(grid.half_width() > v.support_radius))
        fail(ErrorKind::InvalidInput, "schrodinger: grid must extend beyond the support of V");
    const std::size_t n = grid.size();
    const double h = grid.spacing();
    const double ih2 = 1.0 / (h * h);
    Tridiagonal<cplx> t(n);
    for (std::size_t i = 0; i < n; ++i) {
        const cplx vi = cell_average(v, grid.point(i), h);
        if (!is_finite(vi)) fail(ErrorKind::InvalidInput, "schrodinger: non-finite potential");
        t.diag[i] = 2.0 * ih2 + vi - p.z;
    }
    for (std::size_t i = 0; i + 1 < n; ++i) t.lower[i] = t.upper[i] = -ih2;
    const cplx lambda = lattice_exit_ratio(p.z, h, detail::upper_side(p));
    t.diag[0] -= lambda * ih2;
    t.diag[n - 1] -= lambda * ih2;
    return t;
}

/// Radial analogue on u = r psi: Dirichlet at r = 0, exit ratio at r = R.
inline Tridiagonal<cplx> schrodinger_matrix(const Potential1D& v, const RadialGrid& grid, const SpectralParameter& p) {
    validate(v);
    if (!(grid.radius() > v.support_radius))
        fail(ErrorKind::InvalidInput, "schrodinger: grid must extend beyond the support of V");
    const std::size_t n = grid.size();
    const double h = grid.spacing();
    const double ih2 = 1.0 / (h * h);
    Tridiagonal<cplx> t(n);
    for (std::size_t i = 0; i < n; ++i) {
        const cplx vi = cell_average(v, grid.point(i), h);
        if (!is_finite(vi)) fail(ErrorKind::InvalidInput, "schrodinger: non-finite potential");
        t.diag[i] = 2.0 * ih2 + vi - p.z;
    }
    for (std::size_t i = 0; i + 1 < n; ++i) t.lower[i] = t.upper[i] = -ih2;
    t.diag[n - 1] -= lattice_exit_ratio(p.z, h, detail::upper_side(p)) * ih2;
    return t;
}

namespace detail {

inline CMatrix sample_terms(const std::vector<RankOneTerm>& terms, const Grid1D& grid, bool left) {
    CMatrix m = CMatrix::Zero(Eigen::Index(grid.size()), Eigen::Index(terms.size()));
    for (std::size_t l = 0; l < terms.size(); ++l)
        for (std::size_t i = 0; i < grid.size(); ++i)
            m(Eigen::Index(i), Eigen::Index(l)) = left ? terms[l].u(grid.point(i)) : terms[l].v(grid.point(i));
    return m;
}

inline KernelOperator tridiagonal_resolvent(const Tridiagonal<cplx>& t, const Sampling& s, double h,
                                            const std::vector<RankOneTerm>* terms = nullptr,
                                            const Grid1D* grid = nullptr) {
    CMatrix inv = tridiagonal_inverse(t);
    if (terms && !terms->empty()) {
        // (T + h U V*)^{-1} = T^{-1} - T^{-1} U (I/h + V* T^{-1} U)^{-1} V* T^{-1}
        const CMatrix u = sample_terms(*terms, *grid, true);
        const CMatrix v = sample_terms(*terms, *grid, false);
        const CMatrix tu = inv * u;
        CMatrix small = v.adjoint() * tu;
        small.diagonal().array() += 1.0 / h;
        Eigen::FullPivLU<CMatrix> lu(small);
        const double scale = std::max(small.cwiseAbs().maxCoeff(), 1.0 / h);
        lu.setThreshold(1e-13 * scale / small.cwiseAbs().maxCoeff());
        if (!lu.isInvertible()) fail(ErrorKind::NearSpectrum, "finite-rank correction is singular");
        inv -= tu * lu.solve(v.adjoint() * inv);
        if (!inv.allFinite()) fail(ErrorKind::NearSpectrum, "finite-rank correction overflowed");
    }
    inv /= h;
    return KernelOperator(s, s, std::move(inv));
}

} // namespace detail

/// Kernel of (A - z)^{-1} for the operator A described by op.
inline KernelOperator resolvent_matrix(const OperatorSpec& op, const SpectralParameter& p) {
    if (!is_finite(p.z)) fail(ErrorKind::InvalidInput, "resolvent_matrix: non-finite z");
    struct {
        const SpectralParameter& p;
        KernelOperator operator()(const Free1D& o) const { return build_free_kernel_operator(1, o.grid, p); }
        KernelOperator operator()(const Free2DRadial& o) const { return build_free_kernel_operator(2, o.grid, p); }
        KernelOperator operator()(const Free3DRadial& o) const { return build_free_kernel_operator(3, o.grid, p); }
        KernelOperator operator()(const Schrodinger1D& o) const {
            return detail::tridiagonal_resolvent(schrodinger_matrix(o.potential, o.grid, p), o.grid.sampling(),
                                                 o.grid.spacing(), &o.perturbation, &o.grid);
        }
        KernelOperator operator()(const Schrodinger3DRadial& o) const {
            return detail::tridiagonal_resolvent(schrodinger_matrix(o.potential, o.grid, p), o.grid.sampling(),
                                                 o.grid.spacing());
        }
        KernelOperator operator()(const MatrixOperator& o) const {
            const Eigen::Index n = o.matrix.rows();
            if (n != o.matrix.cols() || n == 0) fail(ErrorKind::Dimension, "resolvent_matrix: matrix must be square");
            CMatrix a = o.matrix;
            a.diagonal().array() -= p.z;
            Eigen::PartialPivLU<CMatrix> lu(a);
            const double rc = lu.rcond();
            if (!(rc > 1e-14)) fail(ErrorKind::NearSpectrum, "resolvent_matrix: matrix is numerically singular");
            CMatrix inv = lu.inverse();
            const Sampling s = index_sampling(std::size_t(n));
            return KernelOperator(s, s, std::move(inv));
        }
    } v{p};
    return std::visit(v, op);
}

inline KernelOperator resolvent_matrix(const OperatorSpec& op, cplx z) {
    return resolvent_matrix(op, SpectralParameter::interior(z));
}

enum class NormFlavor { WeightedL2, L1ToLinf };

struct SweepConfig {
    cplx z0 = 0.0;
    double theta = pi;                      // ray z = z0 + r e^{i theta}
    double r0 = 1e-2;
    double rho = 0.31622776601683794;       // 10^{-1/2}
    std::size_t count = 9;
    double s = 1.0;                         // source space L^2_s
    double s_prime = 1.0;                   // target space L^2_{-s'}
    NormFlavor flavor = NormFlavor::WeightedL2;
    unsigned threads = 0;                   // 0: VIRTLEV_THREADS or 1
    NormOptions norm{};

    std::vector<double> radii() const {
        std::vector<double> r(count);
        double v = r0;
        for (std::size_t k = 0; k < count; ++k, v *= rho) r[k] = v;
        return r;
    }
    cplx point(double r) const { return z0 + r * std::polar(1.0, theta); }
};

inline void validate(const SweepConfig& cfg) {
    if (!is_finite(cfg.z0)) fail(ErrorKind::InvalidInput, "sweep: non-finite z0");
    if (!(cfg.theta > 0.0 && cfg.theta < 2.0 * pi)) fail(ErrorKind::InvalidInput, "sweep: ray angle must lie in (0, 2 pi)");
    if (!(cfg.r0 > 0.0) || !std::isfinite(cfg.r0)) fail(ErrorKind::InvalidInput, "sweep: r0 must be positive");
    if (!(cfg.rho > 0.0 && cfg.rho < 1.0)) fail(ErrorKind::InvalidInput, "sweep: rho must lie in (0, 1)");
    if (cfg.count < 5) fail(ErrorKind::InvalidInput, "sweep: need at least 5 radii");
    const double decades = -double(cfg.count - 1) * std::log10(cfg.rho);
    if (decades < 3.0 - 1e-9) fail(ErrorKind::InvalidInput, "sweep: radii must span at least 3 decades");
    if (!std::isfinite(cfg.s) || !std::isfinite(cfg.s_prime)) fail(ErrorKind::InvalidInput, "sweep: non-finite weights");
}

/// Coarsest admissible spacing: 0.1, and at least 20 points per wavelength at
/// the largest |z| swept.
inline double max_admissible_spacing(double max_abs_z) {
    return std::min(0.1, max_abs_z > 0.0 ? 2.0 * pi / (20.0 * std::sqrt(max_abs_z)) : 0.1);
}

struct SweepResult {
    std::vector<SweepPoint> points;  // ordered by decreasing radius
    bool complete = true;
    std::optional<ErrorKind> error_kind;
    std::string error;
};

/// Norm of the resolvent at one point of the ray.
inline double resolvent_norm(const OperatorSpec& op, cplx z, const SweepConfig& cfg) {
    const KernelOperator k = resolvent_matrix(op, SpectralParameter::interior(z));
    if (cfg.flavor == NormFlavor::L1ToLinf) return l1_to_linf_norm(k);
    return operator_norm_weighted(k, WeightExponent(cfg.s), WeightExponent(cfg.s_prime), cfg.norm);
}

/// Resolvent norms along z = z0 + r_k e^{i theta}. Points are independent and
/// may be evaluated concurrently; results are ordered by radius. On the first
/// failing radius the sweep stops and returns the points before it.
inline SweepResult sweep(const OperatorSpec& op, const SweepConfig& cfg) {
    validate(cfg);
    const auto radii = cfg.radii();
    const double h = grid_spacing(op);
    if (h > 0.0) {
        double zmax = 0.0;
        for (double r : radii) zmax = std::max(zmax, std::abs(cfg.point(r)));
        if (h > max_admissible_spacing(zmax) * (1.0 + 1e-12))
            fail(ErrorKind::InvalidInput, "sweep: grid too coarse for the swept spectral parameters");
    }
    std::vector<SweepPoint> pts(radii.size());
    const unsigned threads = cfg.threads ? cfg.threads : default_thread_count();
    const auto errors = parallel_for(radii.size(), threads, [&](std::size_t i) {
        const cplx z = cfg.point(radii[i]);
        pts[i] = {radii[i], resolvent_norm(op, z, cfg), z};
    });
    SweepResult out;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (errors[i]) {
            out.complete = false;
            try {
                std::rethrow_exception(errors[i]);
            } catch (const Error& e) {
                out.error_kind = e.kind();
                out.error = e.what();
            } catch (const std::exception& e) {
                out.error_kind = ErrorKind::SolverFailure;
                out.error = e.what();
            }
            break;
        }
        out.points.push_back(pts[i]);
    }
    return out;
}

struct FitResult {
    double alpha = 0.0;
    double r_squared = 1.0;
    double intercept = 0.0;
};

/// Least-squares slope of log(norm) against -log(radius).
inline FitResult fit_exponent(const std::vector<SweepPoint>& points) {
    if (points.size() < 4) fail(ErrorKind::Fit, "fit_exponent: need at least 4 points");
    const double n = double(points.size());
    double mx = 0, my = 0;
    for (const auto& p : points) {
        if (!(p.norm > 0.0) || !(p.radius > 0.0) || !std::isfinite(p.norm))
            fail(ErrorKind::Fit, "fit_exponent: norms and radii must be positive");
        mx += -std::log(p.radius);
        my += std::log(p.norm);
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (const auto& p : points) {
        const double dx = -std::log(p.radius) - mx;
        const double dy = std::log(p.norm) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 1e-12 * n)) fail(ErrorKind::Fit, "fit_exponent: radii are degenerate");
    FitResult f;
    f.alpha = sxy / sxx;
    f.intercept = my - f.alpha * mx;
    const double ss_res = std::max(0.0, syy - f.alpha * sxy);
    f.r_squared = syy > 1e-28 * n ? 1.0 - ss_res / syy : 1.0;
    return f;
}

struct ClassifyOptions {
    double tol_alpha = 0.1;
    double min_r_squared = 0.95;
    bool refine = true;                  // repeat on the grid with half the spacing
    bool search_regularization = true;   // rank and states for 1D operators
    double state_tolerance = 1e-2;       // relative residual of virtual states
};

namespace detail {

struct Verdict {
    Classification c = Classification::Inconclusive;
    FitResult fit;
    bool log = false;
    double slope_ratio = 0.0;
    double growth = 0.0;
};

// Divergence test from one sweep. Power laws are read off the log-log fit;
// logarithmic growth, which has a small fitted exponent, is recognized from
// increments of the norm in log(1/r) that do not decay along the sweep.
inline Verdict verdict_from(const std::vector<SweepPoint>& pts, const ClassifyOptions& o) {
    Verdict v;
    v.fit = fit_exponent(pts);
    const std::size_t n = pts.size();
    std::vector<double> slopes(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k)
        slopes[k] = (pts[k + 1].norm - pts[k].norm) / (std::log(pts[k].radius) - std::log(pts[k + 1].radius));
    const double first = 0.5 * (slopes[0] + slopes[1]);
    const double last = 0.5 * (slopes[n - 2] + slopes[n - 3]);
    v.slope_ratio = first > 0.0 ? last / first : 0.0;
    v.growth = pts.back().norm / pts.front().norm - 1.0;
    if (v.fit.alpha > o.tol_alpha) {
        if (v.fit.r_squared >= o.min_r_squared) {
            v.c = Classification::Virtual;
            v.log = v.slope_ratio < 2.0;
        } else {
            v.c = Classification::Inconclusive;
        }
    } else if (v.slope_ratio >= 0.75 && v.growth >= 0.1) {
        v.c = Classification::Virtual;
        v.log = true;
    } else {
        v.c = Classification::Regular;
    }
    return v;
}

inline SweepResult checked_sweep(const OperatorSpec& op, const SweepConfig& cfg) {
    SweepResult r = sweep(op, cfg);
    if (!r.complete) fail(*r.error_kind, r.error);
    return r;
}

} // namespace detail

/// Solves (A + B - z) x = rhs for a 1D operator with finite-rank part B by a
/// dense LU of the assembled matrix. Unlike resolvent_matrix this needs no
/// inverse of the tridiagonal part, which is singular at thresholds.
inline CMatrix solve_regularized(const Schrodinger1D& op, const SpectralParameter& p, const CMatrix& rhs) {
    const Tridiagonal<cplx> t = schrodinger_matrix(op.potential, op.grid, p);
    const Eigen::Index n = Eigen::Index(t.size());
    const double h = op.grid.spacing();
    CMatrix a = CMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        a(i, i) = t.diag[std::size_t(i)];
        if (i + 1 < n) {
            a(i + 1, i) = t.lower[std::size_t(i)];
            a(i, i + 1) = t.upper[std::size_t(i)];
        }
    }
    if (!op.perturbation.empty()) {
        const CMatrix u = detail::sample_terms(op.perturbation, op.grid, true);
        const CMatrix v = detail::sample_terms(op.perturbation, op.grid, false);
        a += h * u * v.adjoint();
    }
    Eigen::PartialPivLU<CMatrix> lu(a);
    if (!(lu.rcond() > 1e-14)) fail(ErrorKind::NearSpectrum, "solve_regularized: operator is singular at z");
    return lu.solve(rhs);
}

/// Candidate regularizing terms x^m on [-a, a], m = 0, 1, 2.
inline RankOneTerm monomial_term(int m, double a) {
    auto f = [m, a](double x) -> cplx { return std::abs(x) <= a ? std::pow(x, m) : 0.0; };
    return {f, f, "x^" + std::to_string(m) + "*1[-a,a]"};
}

struct RegularizationResult {
    std::vector<RankOneTerm> terms;   // the regularizing B, empty if none found
    std::vector<double> points;
    std::vector<CVector> states;
    std::vector<double> singular_values;  // of I - G
    std::size_t kernel_dimension = 0;
    double max_residual = 0.0;
};

/// Searches finite-rank B = sum b_m <b_m, .> over subsets of the monomial
/// candidates, smallest rank first, until A + B sweeps Regular at z0. The
/// virtual states are then Psi = (A + B - z0)^{-1} sum c_m b_m with c in the
/// kernel of I - G, G_lm = <b_l, (A + B - z0)^{-1} b_m>.
inline std::optional<RegularizationResult> find_regularization(const Schrodinger1D& op, const SweepConfig& cfg,
                                                               const ClassifyOptions& o) {
    const double a = op.potential.support_radius;
    const std::vector<std::vector<int>> subsets = {{0}, {1}, {2}, {0, 1}, {0, 2}, {1, 2}, {0, 1, 2}};
    const SpectralParameter at_z0 = on_positive_axis(cfg.z0) && cfg.z0 != cplx(0.0)
                                        ? SpectralParameter{cfg.z0, cfg.theta < pi ? Approach::FromUpperHalfPlane
                                                                                  : Approach::FromLowerHalfPlane}
                                        : SpectralParameter::interior(cfg.z0);
    for (const auto& subset : subsets) {
        Schrodinger1D reg = op;
        std::vector<RankOneTerm> added;
        for (int m : subset) added.push_back(monomial_term(m, a));
        reg.perturbation.insert(reg.perturbation.end(), added.begin(), added.end());
        SweepResult sw = sweep(reg, cfg);
        if (!sw.complete) continue;
        const auto v = detail::verdict_from(sw.points, o);
        if (v.c != Classification::Regular) continue;

        RegularizationResult res;
        res.terms = added;
        const std::size_t k = added.size();
        const double h = op.grid.spacing();
        const CMatrix b = detail::sample_terms(added, op.grid, true);
        CMatrix rbb;
        try {
            rbb = solve_regularized(reg, at_z0, b);  // columns R_B b_m
        } catch (const Error&) {
            continue;
        }
        CMatrix g = b.adjoint() * rbb * h;
        const CMatrix i_minus_g = CMatrix::Identity(Eigen::Index(k), Eigen::Index(k)) - g;
        Eigen::JacobiSVD<CMatrix> svd(i_minus_g, Eigen::ComputeFullV);
        const RVector sv = svd.singularValues();
        res.singular_values.assign(sv.data(), sv.data() + sv.size());
        for (Eigen::Index i = 0; i < sv.size(); ++i)
            if (sv[i] <= o.state_tolerance) ++res.kernel_dimension;
        const std::size_t take = std::max<std::size_t>(res.kernel_dimension, 1);
        const Tridiagonal<cplx> t = schrodinger_matrix(op.potential, op.grid, at_z0);
        const Sampling samp = op.grid.sampling();
        const WeightExponent f_w(-cfg.s_prime);
        for (std::size_t c = 0; c < take; ++c) {
            const CVector coeff = svd.matrixV().col(Eigen::Index(k - 1 - c));
            CVector psi = rbb * coeff;
            psi = normalize_sup(psi);
            std::vector<cplx> psi_std(psi.data(), psi.data() + psi.size());
            std::vector<cplx> ap = t.multiply(psi_std);
            // the original finite-rank part of A acts as well
            if (!op.perturbation.empty()) {
                const CMatrix u = detail::sample_terms(op.perturbation, op.grid, true);
                const CMatrix w = detail::sample_terms(op.perturbation, op.grid, false);
                const CVector extra = u * (w.adjoint() * psi) * h;
                for (std::size_t i = 0; i < ap.size(); ++i) ap[i] += extra[Eigen::Index(i)];
            }
            const double res_norm = weighted_l2_norm(std::span<const cplx>(ap), samp, f_w);
            const double psi_norm = weighted_l2_norm(psi, samp, f_w);
            res.max_residual = std::max(res.max_residual, res_norm / psi_norm);
            res.states.push_back(std::move(psi));
        }
        res.points = op.grid.points();
        return res;
    }
    return std::nullopt;
}

/// Regular / Virtual classification of z0 from resolvent norm sweeps. The
/// verdict must agree on the operator's grid and on the refined grid; 1D
/// virtual levels additionally get their rank and states from the
/// regularization search.
inline ThresholdReport classify(const OperatorSpec& op, const SweepConfig& cfg, const ClassifyOptions& o = {}) {
    ThresholdReport rep;
    const SweepResult base = detail::checked_sweep(op, cfg);
    const detail::Verdict v = detail::verdict_from(base.points, o);
    rep.classification = v.c;
    rep.alpha = v.fit.alpha;
    rep.r_squared = v.fit.r_squared;
    rep.log_divergence = v.c == Classification::Virtual && v.log;
    rep.norms = base.points;
    rep.add("slope_ratio", v.slope_ratio);
    rep.add("growth", v.growth);
    if (v.c == Classification::Inconclusive) rep.notes.emplace_back("poor log-log fit");

    if (o.refine) {
        if (auto fine = refined(op)) {
            const SweepResult fr = detail::checked_sweep(*fine, cfg);
            const detail::Verdict fv = detail::verdict_from(fr.points, o);
            rep.add("alpha_refined", fv.fit.alpha);
            rep.add("r_squared_refined", fv.fit.r_squared);
            if (fv.c != v.c) {
                rep.classification = Classification::Inconclusive;
                rep.log_divergence = false;
                rep.notes.emplace_back("verdict changes under grid refinement");
            }
        }
    }

    if (rep.classification == Classification::Regular) {
        rep.rank = 0;
    } else if (rep.classification == Classification::Virtual && o.search_regularization) {
        std::optional<Schrodinger1D> s1;
        if (const auto* f = std::get_if<Free1D>(&op)) s1 = Schrodinger1D{zero_potential(), f->grid, {}};
        if (const auto* s = std::get_if<Schrodinger1D>(&op)) s1 = *s;
        if (s1) {
            if (auto reg = find_regularization(*s1, cfg, o)) {
                rep.rank = reg->terms.size();
                rep.state_points = reg->points;
                rep.states = reg->states;
                rep.add("kernel_dimension", double(reg->kernel_dimension));
                rep.add("state_residual", reg->max_residual);
                if (reg->kernel_dimension != reg->terms.size())
                    rep.notes.emplace_back("dimension of the virtual state space differs from the rank");
                if (reg->max_residual > o.state_tolerance)
                    rep.notes.emplace_back("virtual state residual above tolerance");
                std::string label;
                for (const auto& t : reg->terms) label += (label.empty() ? "" : " + ") + t.label;
                rep.notes.push_back("regularized by " + label);
            } else {
                rep.notes.emplace_back("no regularizing candidate found; rank unknown");
            }
        }
    }
    return rep;
}

} // namespace virtlev
