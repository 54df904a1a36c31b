#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "virtlev/core.hpp"

namespace virtlev {

/// Weight exponent s of the space L^p_s, finite.
class WeightExponent {
public:
    constexpr WeightExponent() = default;
    explicit WeightExponent(double s) : s_(s) {
        if (!std::isfinite(s)) fail(ErrorKind::InvalidInput, "weight exponent must be finite");
    }
    double value() const noexcept { return s_; }
    WeightExponent operator-() const { return WeightExponent(-s_); }

private:
    double s_ = 0.0;
};

/// <x>^s = (1 + x^2)^{s/2}
inline double weight(double x, WeightExponent s) {
    return std::pow(1.0 + x * x, 0.5 * s.value());
}

/// Sample points together with quadrature weights. Every grid reduces to one
/// of these; kernel operators carry one for each side.
struct Sampling {
    std::vector<double> points;
    std::vector<double> weights;

    std::size_t size() const noexcept { return points.size(); }
};

/// Uniform symmetric grid on [-R, R] with an odd number of points, so that
/// x = 0 is a node.
class Grid1D {
public:
    Grid1D(double half_width, std::size_t n_points) : half_width_(half_width), n_(n_points) {
        if (!(half_width > 0.0) || !std::isfinite(half_width))
            fail(ErrorKind::InvalidInput, "Grid1D: half width must be positive");
        if (n_points < 3 || n_points % 2 == 0)
            fail(ErrorKind::InvalidInput, "Grid1D: number of points must be odd and >= 3");
        h_ = 2.0 * half_width / double(n_points - 1);
    }

    /// Grid with the given spacing; R is rounded so that R/h is an integer.
    static Grid1D with_spacing(double half_width, double spacing) {
        if (!(spacing > 0.0)) fail(ErrorKind::InvalidInput, "Grid1D: spacing must be positive");
        const auto half = static_cast<std::size_t>(std::llround(half_width / spacing));
        return Grid1D(double(half) * spacing, 2 * std::max<std::size_t>(half, 1) + 1);
    }

    double half_width() const noexcept { return half_width_; }
    double spacing() const noexcept { return h_; }
    std::size_t size() const noexcept { return n_; }
    std::size_t center_index() const noexcept { return (n_ - 1) / 2; }

    // computed from the center so the grid is exactly symmetric
    double point(std::size_t i) const noexcept {
        return (double(i) - double(center_index())) * h_;
    }

    std::vector<double> points() const {
        std::vector<double> x(n_);
        for (std::size_t i = 0; i < n_; ++i) x[i] = point(i);
        return x;
    }

    Sampling sampling() const { return {points(), std::vector<double>(n_, h_)}; }

    Grid1D refined() const { return Grid1D(half_width_, 2 * n_ - 1); }

private:
    double half_width_;
    std::size_t n_;
    double h_;
};

/// Uniform radial grid r_i = (i+1) h, i = 0..n-1, on (0, R]; r = 0 carries
/// the Dirichlet condition of the reduced radial function u = r psi.
class RadialGrid {
public:
    RadialGrid(double radius, std::size_t n_points) : radius_(radius), n_(n_points) {
        if (!(radius > 0.0) || !std::isfinite(radius))
            fail(ErrorKind::InvalidInput, "RadialGrid: radius must be positive");
        if (n_points < 2) fail(ErrorKind::InvalidInput, "RadialGrid: need at least 2 points");
        h_ = radius / double(n_points);
    }

    static RadialGrid with_spacing(double radius, double spacing) {
        if (!(spacing > 0.0)) fail(ErrorKind::InvalidInput, "RadialGrid: spacing must be positive");
        const auto n = static_cast<std::size_t>(std::llround(radius / spacing));
        return RadialGrid(double(n) * spacing, std::max<std::size_t>(n, 2));
    }

    double radius() const noexcept { return radius_; }
    double spacing() const noexcept { return h_; }
    std::size_t size() const noexcept { return n_; }
    double point(std::size_t i) const noexcept { return double(i + 1) * h_; }

    std::vector<double> points() const {
        std::vector<double> r(n_);
        for (std::size_t i = 0; i < n_; ++i) r[i] = point(i);
        return r;
    }

    Sampling sampling() const { return {points(), std::vector<double>(n_, h_)}; }

    RadialGrid refined() const { return RadialGrid(radius_, 2 * n_); }

private:
    double radius_;
    std::size_t n_;
    double h_;
};

/// Index set 1..n with unit weights, the carrier of sequence spaces.
inline Sampling index_sampling(std::size_t n) {
    Sampling s;
    s.points.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.points[i] = double(i + 1);
    s.weights.assign(n, 1.0);
    return s;
}

/// Discretized integral operator f -> sum_j K(x_i, y_j) f(y_j) w_j.
class KernelOperator {
public:
    KernelOperator(Sampling out, Sampling in, CMatrix entries)
        : out_(std::move(out)), in_(std::move(in)), entries_(std::move(entries)) {
        if (out_.points.size() != out_.weights.size() || in_.points.size() != in_.weights.size())
            fail(ErrorKind::Dimension, "KernelOperator: points and weights differ in length");
        if (std::size_t(entries_.rows()) != out_.size() || std::size_t(entries_.cols()) != in_.size())
            fail(ErrorKind::Dimension, "KernelOperator: entry matrix does not match the grids");
        if (!entries_.allFinite())
            fail(ErrorKind::InvalidOperator, "KernelOperator: non-finite kernel entries");
    }

    const Sampling& out() const noexcept { return out_; }
    const Sampling& in() const noexcept { return in_; }
    const CMatrix& entries() const noexcept { return entries_; }
    std::size_t rows() const noexcept { return out_.size(); }
    std::size_t cols() const noexcept { return in_.size(); }

    /// Kernel of the adjoint operator (conjugate transpose, grids swapped).
    KernelOperator adjoint() const { return {in_, out_, entries_.adjoint()}; }

    /// Applies the operator to samples on the input grid.
    CVector apply(const CVector& f) const {
        if (std::size_t(f.size()) != cols()) fail(ErrorKind::Dimension, "KernelOperator::apply: length mismatch");
        CVector wf(f.size());
        for (Eigen::Index j = 0; j < f.size(); ++j) wf[j] = f[j] * in_.weights[std::size_t(j)];
        return entries_ * wf;
    }

private:
    Sampling out_;
    Sampling in_;
    CMatrix entries_;
};

/// (sum_i w_i <x_i>^{2s} |f_i|^2)^{1/2}
inline double weighted_l2_norm(std::span<const cplx> f, const Sampling& grid, WeightExponent s) {
    if (f.size() != grid.size()) fail(ErrorKind::Dimension, "weighted_l2_norm: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double w = weight(grid.points[i], s);
        acc += grid.weights[i] * w * w * std::norm(f[i]);
    }
    return std::sqrt(acc);
}

inline double weighted_l2_norm(std::span<const cplx> f, const Grid1D& grid, WeightExponent s) {
    return weighted_l2_norm(f, grid.sampling(), s);
}

inline double weighted_l2_norm(const CVector& f, const Sampling& grid, WeightExponent s) {
    return weighted_l2_norm(std::span<const cplx>(f.data(), std::size_t(f.size())), grid, s);
}

enum class NormMethod { Auto, Power, Svd };

struct NormOptions {
    NormMethod method = NormMethod::Auto;
    double rel_tol = 1e-12;        // target relative accuracy of sigma_max
    int max_iterations = 20000;
    std::size_t svd_limit = 2000;  // Auto falls back to a full SVD up to this size
    std::uint64_t seed = 0x5eedULL;
};

struct NormEstimate {
    double value = 0.0;
    NormMethod method = NormMethod::Power;
    int iterations = 0;
    bool converged = false;
};

/// Largest singular value of a dense matrix.
///
/// Power iteration on M*M from a fixed pseudo-random start. The Rayleigh
/// quotients lambda_k = |M v_k|^2 increase monotonically to sigma_max^2 with
/// geometric increments; the remaining error is estimated from the ratio of
/// successive increments. If that estimate does not reach the tolerance
/// within max_iterations, Auto switches to a full SVD (small matrices only).
inline NormEstimate largest_singular_value(const CMatrix& m, const NormOptions& opts = {}) {
    NormEstimate est;
    if (m.size() == 0) {
        est.converged = true;
        return est;
    }
    const auto svd_value = [&] {
        Eigen::BDCSVD<CMatrix> svd(m);
        return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
    };
    if (opts.method == NormMethod::Svd) {
        est.value = svd_value();
        est.method = NormMethod::Svd;
        est.converged = true;
        return est;
    }

    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> gauss;
    CVector v(m.cols());
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = cplx(gauss(rng), gauss(rng));
    v.normalize();

    double lambda = 0.0;
    double prev_delta = 0.0;
    CVector mv;
    for (int it = 1; it <= opts.max_iterations; ++it) {
        mv.noalias() = m * v;
        const double next = mv.squaredNorm();
        const double delta = next - lambda;
        lambda = next;
        est.iterations = it;
        if (lambda == 0.0) {
            est.converged = true;
            break;
        }
        if (it > 2) {
            const double floor = 64.0 * std::numeric_limits<double>::epsilon() * lambda;
            if (std::abs(delta) <= floor) {
                est.converged = true;
                break;
            }
            const double q = prev_delta > 0.0 ? delta / prev_delta : 1.0;
            if (q > 0.0 && q < 1.0) {
                const double remaining = delta * q / (1.0 - q);
                // sigma relative error is half the relative error of lambda
                if (remaining <= 2.0 * opts.rel_tol * lambda) {
                    est.converged = true;
                    break;
                }
            }
        }
        prev_delta = delta;
        v.noalias() = m.adjoint() * mv;
        const double nv = v.norm();
        if (nv == 0.0) {
            est.converged = true;
            break;
        }
        v /= nv;
    }
    est.value = std::sqrt(lambda);
    est.method = NormMethod::Power;
    if (!est.converged && opts.method == NormMethod::Auto &&
        std::size_t(std::max(m.rows(), m.cols())) <= opts.svd_limit) {
        est.value = svd_value();
        est.method = NormMethod::Svd;
        est.converged = true;
    }
    return est;
}

/// Matrix of the operator between weighted spaces, rescaled so that its
/// spectral norm is the L^2_{s_in} -> L^2_{-s_out} norm on the grid:
/// M_ij = sqrt(w_i) <x_i>^{-s_out} K_ij <y_j>^{-s_in} sqrt(w_j).
inline CMatrix weighted_matrix(const KernelOperator& k, WeightExponent s_in, WeightExponent s_out) {
    CMatrix m = k.entries();
    const auto& out = k.out();
    const auto& in = k.in();
    RVector left(Eigen::Index(out.size()));
    RVector right(Eigen::Index(in.size()));
    for (std::size_t i = 0; i < out.size(); ++i)
        left[Eigen::Index(i)] = std::sqrt(out.weights[i]) / weight(out.points[i], s_out);
    for (std::size_t j = 0; j < in.size(); ++j)
        right[Eigen::Index(j)] = std::sqrt(in.weights[j]) / weight(in.points[j], s_in);
    return left.asDiagonal() * m * right.asDiagonal();
}

/// Norm of K as a map L^2_{s_in} -> L^2_{-s_out} on the grid.
inline double operator_norm_weighted(const KernelOperator& k, WeightExponent s_in, WeightExponent s_out,
                                     const NormOptions& opts = {}) {
    return largest_singular_value(weighted_matrix(k, s_in, s_out), opts).value;
}

/// Exact L^1 -> L^infinity norm of a kernel operator: sup |K|.
inline double l1_to_linf_norm(const KernelOperator& k) {
    return k.entries().size() ? k.entries().cwiseAbs().maxCoeff() : 0.0;
}

/// Truncation radius at which <R>^{-min(s,s')} has dropped to rel_drop of its
/// peak value 1.
inline double truncation_radius(WeightExponent s, WeightExponent s_prime, double rel_drop = 1e-6) {
    const double e = std::min(s.value(), s_prime.value());
    if (!(e > 0.0)) fail(ErrorKind::InvalidInput, "truncation_radius: needs positive exponents");
    return std::sqrt(std::pow(rel_drop, -2.0 / e) - 1.0);
}

} // namespace virtlev
