#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "virtlev/core.hpp"
#include "virtlev/lap_sweep.hpp"
#include "virtlev/potential.hpp"
#include "virtlev/threshold_report.hpp"

namespace virtlev {

// ---------------------------------------------------------------- square well

struct SquareWellSolution {
    double kappa = 0.0;
    double energy = 0.0;
    bool multiple_roots = false;  // g >= (pi/2)^2: excited states exist, ground state returned
};

/// Ground state of -d^2/dx^2 - g 1_[-1,1]: the root kappa of
/// kappa = q tan q, q = sqrt(g - kappa^2), found by bisection and polished
/// by Newton steps; E = -kappa^2.
inline SquareWellSolution square_well_solve(double g) {
    if (!std::isfinite(g)) fail(ErrorKind::InvalidInput, "square well: non-finite coupling");
    if (!(g > 0.0)) fail(ErrorKind::NoBoundState, "square well: no bound state for g <= 0");
    const auto f = [g](double kappa) {
        const double q = std::sqrt(std::max(0.0, g - kappa * kappa));
        return kappa - q * std::tan(q);
    };
    SquareWellSolution out;
    out.multiple_roots = g >= pi * pi / 4.0;
    // tan q is finite for q < pi/2, i.e. kappa > sqrt(g - pi^2/4)
    double lo = out.multiple_roots ? std::sqrt(g - pi * pi / 4.0) : 0.0;
    double hi = std::sqrt(g);
    if (out.multiple_roots) lo = std::nextafter(lo, hi);
    if (!(f(lo) < 0.0 && f(hi) > 0.0)) fail(ErrorKind::NoBoundState, "square well: root not bracketed");
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? lo : hi) = mid;
    }
    double kappa = 0.5 * (lo + hi);
    for (int it = 0; it < 3; ++it) {
        const double q = std::sqrt(g - kappa * kappa);
        if (!(q > 0.0)) break;
        const double t = std::tan(q);
        // d/dkappa [q tan q] = (tan q + q sec^2 q) dq/dkappa, dq/dkappa = -kappa/q
        const double df = 1.0 + (t + q * (1.0 + t * t)) * kappa / q;
        const double step = f(kappa) / df;
        if (!std::isfinite(step) || std::abs(step) > hi - lo + 1e-300) break;
        kappa -= step;
        if (std::abs(step) <= 1e-14) break;
    }
    out.kappa = kappa;
    out.energy = -kappa * kappa;
    return out;
}

inline double square_well_eigenvalue(double g) { return square_well_solve(g).energy; }

struct BifurcationPoint {
    double g = 0.0;
    double energy = 0.0;
    double predicted = 0.0;          // -g^2
    double perturbation_norm = 0.0;  // norm of V as a map L^2_{-s'} -> L^2_{s}
};

struct BifurcationCurve {
    std::vector<BifurcationPoint> points;
    double fitted_c = 0.0;  // max |E + g^2| / g^3
    double slope = 0.0;     // least-squares slope of log|E| against log g
};

/// Ground-state energies along a family of couplings, with the size of each
/// well measured as a multiplication operator L^2_{-s'} -> L^2_{s}, which is
/// g <1>^{s+s'}.
inline BifurcationCurve bifurcation_curve(const std::vector<double>& couplings, double s = 1.0, double s_prime = 1.0) {
    BifurcationCurve c;
    double mx = 0, my = 0;
    for (double g : couplings) {
        BifurcationPoint p;
        p.g = g;
        p.energy = square_well_eigenvalue(g);
        p.predicted = -g * g;
        p.perturbation_norm = g * std::pow(2.0, 0.5 * (s + s_prime));
        c.fitted_c = std::max(c.fitted_c, std::abs(p.energy - p.predicted) / (g * g * g));
        c.points.push_back(p);
        mx += std::log(g);
        my += std::log(-p.energy);
    }
    if (c.points.size() >= 2) {
        mx /= double(c.points.size());
        my /= double(c.points.size());
        double sxx = 0, sxy = 0;
        for (const auto& p : c.points) {
            sxx += (std::log(p.g) - mx) * (std::log(p.g) - mx);
            sxy += (std::log(p.g) - mx) * (std::log(-p.energy) - my);
        }
        if (sxx > 0.0) c.slope = sxy / sxx;
    }
    return c;
}

// ------------------------------------------------- rank-one regularized model

struct RankOneModelOptions {
    double half_width = 20.0;
    double spacing = 0.05;
    SweepConfig sweep = [] {
        SweepConfig c;
        c.s = 2.0;
        c.s_prime = 2.0;
        return c;
    }();
    ClassifyOptions classify{};
};

struct RankOneModelReport {
    Eigen::Matrix3d matching;          // rows: u'(-1) = 0, u'(1) = 0, c - integral u = 0
    double determinant = 0.0;
    double normalized_determinant = 0.0;  // after scaling rows to unit length
    ThresholdReport perturbed;         // -d^2/dx^2 + 1 <1, .>
    ThresholdReport unperturbed;       // -d^2/dx^2
};

inline RankOneTerm indicator_projection(double a = 1.0) {
    auto f = [a](double x) -> cplx { return std::abs(x) <= a ? 1.0 : 0.0; };
    return {f, f, "1[-a,a]<1[-a,a],.>"};
}

/// Matching conditions for bounded solutions of u'' = c 1_[-1,1] with
/// c = integral of u over [-1,1]. Inside u = a + b x + c x^2/2; bounded
/// solutions are constant outside, so u'(+-1) = 0. Integrals are by
/// three-point Gauss-Legendre, exact for quadratics.
inline Eigen::Matrix3d rank_one_matching_matrix() {
    const std::array<double, 3> nodes{-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
    const std::array<double, 3> weights{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    const auto basis = [](int m, double x) { return m == 0 ? 1.0 : m == 1 ? x : 0.5 * x * x; };
    const auto dbasis = [](int m, double x) { return m == 0 ? 0.0 : m == 1 ? 1.0 : x; };
    Eigen::Matrix3d m;
    for (int col = 0; col < 3; ++col) {
        m(0, col) = dbasis(col, -1.0);
        m(1, col) = dbasis(col, 1.0);
        double integral = 0.0;
        for (std::size_t q = 0; q < 3; ++q) integral += weights[q] * basis(col, nodes[q]);
        m(2, col) = (col == 2 ? 1.0 : 0.0) - integral;
    }
    return m;
}

/// The threshold z0 = 0 of -d^2/dx^2 + 1_[-1,1] <1_[-1,1], .>: the matching
/// system shows there is no bounded null solution, the resolvent sweep must
/// then be Regular, and dropping the rank-one term must give a virtual level.
inline RankOneModelReport rank_one_regularized_threshold(const RankOneModelOptions& o = {}) {
    RankOneModelReport rep;
    rep.matching = rank_one_matching_matrix();
    rep.determinant = rep.matching.determinant();
    Eigen::Matrix3d scaled = rep.matching;
    for (int r = 0; r < 3; ++r) scaled.row(r) /= scaled.row(r).norm();
    rep.normalized_determinant = scaled.determinant();

    const Grid1D grid = Grid1D::with_spacing(o.half_width, o.spacing);
    SweepConfig cfg = o.sweep;
    cfg.z0 = 0.0;
    rep.perturbed = classify(Schrodinger1D{zero_potential(), grid, {indicator_projection()}}, cfg, o.classify);
    rep.unperturbed = classify(Schrodinger1D{zero_potential(), grid, {}}, cfg, o.classify);

    const bool no_null_solution = std::abs(rep.normalized_determinant) > 0.1;
    const bool regular = rep.perturbed.classification == Classification::Regular;
    if (no_null_solution != regular)
        fail(ErrorKind::ClassificationConflict, "rank-one model: matching system and resolvent sweep disagree");
    return rep;
}

// ------------------------------------------------ embedded eigenvalue family

struct EmbeddedValue {
    cplx psi;
    cplx v;
};

/// psi(r) = e^{i zeta r}/r for r >= 1 and ((3 - r^2)/2) e^{i zeta (1 + r^2)/2}
/// inside, with V = zeta^2 + (Delta psi)/psi. Outside V = 0; inside
/// V = zeta^2 - zeta^2 r^2 + (-3 - 2 i zeta r^2 + 3 i zeta p)/p, p = (3 - r^2)/2.
inline EmbeddedValue embedded_potential_3d(cplx zeta, double r) {
    if (!(r >= 0.0) || !std::isfinite(r)) fail(ErrorKind::InvalidInput, "embedded potential: r must be >= 0");
    if (!is_finite(zeta)) fail(ErrorKind::InvalidInput, "embedded potential: non-finite zeta");
    if (r >= 1.0) return {std::exp(I * zeta * r) / r, 0.0};
    const double r2 = r * r;
    const double p = 0.5 * (3.0 - r2);
    const cplx psi = p * std::exp(I * zeta * (1.0 + r2) / 2.0);
    const cplx zz = zeta * zeta;
    const cplx v = zz - zz * r2 + (-3.0 - 2.0 * I * zeta * r2 + 3.0 * I * zeta * p) / p;
    return {psi, v};
}

inline Potential1D embedded_radial_potential(cplx zeta) {
    std::ostringstream os;
    os.precision(15);
    os << "embedded:zeta=" << zeta.real() << (zeta.imag() < 0 ? "" : "+") << zeta.imag() << "i";
    return {1.0, [zeta](double r) { return r < 1.0 ? embedded_potential_3d(zeta, std::abs(r)).v : cplx(0.0); },
            os.str()};
}

/// sup over r in [2h, rmax], |r - 1| > 2h, of |(-Delta + V - zeta^2) psi|, with
/// Delta psi = u''/r for u = r psi and u'' from the five-point stencil.
inline double embedded_residual(cplx zeta, double h = 1e-3, double rmax = 3.0) {
    const auto u = [&](double r) { return r == 0.0 ? cplx(0.0) : r * embedded_potential_3d(zeta, r).psi; };
    double worst = 0.0;
    const auto steps = static_cast<long>(std::floor(rmax / h + 1e-9));
    for (long i = 2; i <= steps; ++i) {
        const double r = double(i) * h;
        if (std::abs(r - 1.0) <= 2.0 * h + 1e-12) continue;
        const cplx d2 = (-u(r - 2 * h) + 16.0 * u(r - h) - 30.0 * u(r) + 16.0 * u(r + h) - u(r + 2 * h)) / (12.0 * h * h);
        const auto e = embedded_potential_3d(zeta, r);
        worst = std::max(worst, std::abs(-d2 / r + (e.v - zeta * zeta) * e.psi));
    }
    return worst;
}

struct EmbeddedSample {
    int j = 0;
    cplx zeta;
    cplx z;  // eigenvalue zeta^2
    double residual = 0.0;
};

struct EmbeddedOptions {
    double residual_spacing = 1e-3;
    double residual_tolerance = 1e-6;
    double radius = 10.0;
    double spacing = 0.01;
    SweepConfig sweep = [] {
        SweepConfig c;
        c.theta = pi / 2.0;
        c.r0 = 1e-1;
        c.count = 7;
        c.s = 2.0;
        c.s_prime = 2.0;
        return c;
    }();
};

struct EmbeddedFamily {
    double zeta0 = 0.0;
    std::vector<EmbeddedSample> samples;
    ThresholdReport sweep;  // of -Delta + V(., zeta0) towards zeta0^2
    bool monotone = false;
    double decades = 0.0;
    bool diverges = false;
};

/// Eigen-triples (V(zeta_j), psi(zeta_j), zeta_j^2), zeta_j = zeta0 + (1+i)/j,
/// and a resolvent sweep of the s-wave part of -Delta + V(., zeta0) towards
/// zeta0^2 from the upper half plane.
inline EmbeddedFamily embedded_family_check(double zeta0, int n, const EmbeddedOptions& o = {}) {
    if (!(zeta0 >= 0.0) || !std::isfinite(zeta0)) fail(ErrorKind::InvalidInput, "embedded family: zeta0 must be >= 0");
    if (n < 1) fail(ErrorKind::InvalidInput, "embedded family: need n >= 1");
    EmbeddedFamily fam;
    fam.zeta0 = zeta0;
    for (int j = 1; j <= n; ++j) {
        EmbeddedSample s;
        s.j = j;
        s.zeta = zeta0 + cplx(1.0, 1.0) / double(j);
        s.z = s.zeta * s.zeta;
        s.residual = embedded_residual(s.zeta, o.residual_spacing);
        if (!(s.residual <= o.residual_tolerance))
            fail(ErrorKind::Model, "embedded family: eigen-residual above tolerance at j = " + std::to_string(j));
        fam.samples.push_back(s);
    }
    SweepConfig cfg = o.sweep;
    cfg.z0 = zeta0 * zeta0;
    ClassifyOptions co;
    co.refine = false;
    co.search_regularization = false;
    const Schrodinger3DRadial op{embedded_radial_potential(zeta0), RadialGrid::with_spacing(o.radius, o.spacing)};
    fam.sweep = classify(op, cfg, co);
    const auto& pts = fam.sweep.norms;
    fam.monotone = true;
    for (std::size_t k = 1; k < pts.size(); ++k) fam.monotone = fam.monotone && pts[k].norm > pts[k - 1].norm;
    fam.decades = std::log10(pts.front().radius / pts.back().radius);
    fam.diverges = fam.sweep.classification == Classification::Virtual;
    return fam;
}

// ------------------------------------------------- nullity by perturbation

struct NullityResult {
    std::size_t nullity = 0;      // smallest rank k with det(M + N) != 0
    std::size_t svd_nullity = 0;  // singular values <= 1e-10 sigma_max
    std::vector<double> best_det; // largest |det(M + N)| per tried rank, relative to the threshold
};

inline std::size_t svd_nullity(const CMatrix& m) {
    Eigen::JacobiSVD<CMatrix> svd(m);
    const RVector sv = svd.singularValues();
    const double smax = sv.size() ? sv[0] : 0.0;
    if (!(smax > 0.0)) return std::size_t(m.cols());
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] <= 1e-10 * smax) ++k;
    return k;
}

/// dim ker M as the least rank k of a perturbation N making M + N invertible.
/// Perturbations are sums of k complex Gaussian outer products, scaled to
/// Frobenius norm eps = 1e-3 sigma_max(M). A rank-k perturbation that does
/// not cover the kernel leaves det(M + N) at rounding level; one that does
/// gives |det| of order sigma_max^{n-k} eps^k, so the threshold at rank k is
/// 1e-12 sigma_max^{n-k} eps^k.
inline NullityResult matrix_nullity_by_perturbation(const CMatrix& m, int trials = 20, std::uint64_t seed = 1) {
    const Eigen::Index n = m.rows();
    if (n != m.cols() || n == 0) fail(ErrorKind::Dimension, "nullity: matrix must be square and non-empty");
    if (n > 8) fail(ErrorKind::InvalidInput, "nullity: brute force is limited to 8x8");
    if (!m.allFinite()) fail(ErrorKind::InvalidInput, "nullity: non-finite entries");
    if (trials < 1) fail(ErrorKind::InvalidInput, "nullity: need at least one trial");
    NullityResult res;
    res.svd_nullity = svd_nullity(m);
    res.nullity = std::size_t(n) + 1;  // not found
    Eigen::JacobiSVD<CMatrix> svd(m);
    double smax = svd.singularValues()[0];
    if (!(smax > 0.0)) smax = 1.0;
    const double eps = 1e-3 * smax;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    const auto gaussian_vector = [&] {
        CVector v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = cplx(gauss(rng), gauss(rng));
        return v;
    };
    for (Eigen::Index k = 0; k <= n; ++k) {
        const double threshold = 1e-12 * std::pow(smax, double(n - k)) * std::pow(eps, double(k));
        double best = 0.0;
        const int tries = k == 0 ? 1 : trials;
        for (int t = 0; t < tries; ++t) {
            CMatrix pert = CMatrix::Zero(n, n);
            for (Eigen::Index l = 0; l < k; ++l) pert += gaussian_vector() * gaussian_vector().transpose();
            if (k > 0) pert *= eps / pert.norm();
            const double d = std::abs(Eigen::PartialPivLU<CMatrix>(m + pert).determinant());
            best = std::max(best, d / threshold);
        }
        res.best_det.push_back(best);
        if (best > 1.0) {
            res.nullity = std::size_t(k);
            break;
        }
    }
    if (res.nullity != res.svd_nullity)
        fail(ErrorKind::SamplingFailure, "nullity: perturbation count disagrees with the SVD; retry with more trials");
    return res;
}

} // namespace virtlev
