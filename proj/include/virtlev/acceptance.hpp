#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "virtlev/criticality.hpp"
#include "virtlev/csv.hpp"
#include "virtlev/discrete_ops.hpp"
#include "virtlev/free_resolvent.hpp"
#include "virtlev/jost.hpp"
#include "virtlev/lap_sweep.hpp"
#include "virtlev/perturbation.hpp"

namespace virtlev::acceptance {

struct Outcome {
    int id = 0;
    std::string title;
    bool pass = false;
    std::string detail;  // deterministic: no timings
};

namespace detail {

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline std::string failure_text(const std::exception& e) {
    if (const auto* ve = dynamic_cast<const Error*>(&e))
        return std::string(to_string(ve->kind())) + ": " + ve->what();
    return e.what();
}

} // namespace detail

// ---------------------------------------------------------------- criterion 1

inline SweepConfig free_1d_sweep_config(unsigned threads = 1) {
    SweepConfig c;
    c.z0 = 0.0;
    c.theta = pi;
    c.r0 = 1e-2;
    c.count = 7;  // r = 1e-2 .. 1e-5
    c.s = 2.0;
    c.s_prime = 2.0;
    c.threads = threads;
    return c;
}

inline Free1D free_1d_operator() { return {Grid1D::with_spacing(30.0, 0.1)}; }

inline Outcome criterion_1() {
    Outcome o{1, "1D threshold divergence", false, ""};
    detail::Stopwatch sw;
    const SweepResult res = sweep(free_1d_operator(), free_1d_sweep_config());
    const FitResult fit = fit_exponent(res.points);
    const bool in_time = sw.seconds() < 30.0;
    o.pass = res.complete && fit.alpha >= 0.45 && fit.alpha <= 0.55 && fit.r_squared >= 0.99 && in_time;
    o.detail = "alpha=" + fmt(fit.alpha) + " r2=" + fmt(fit.r_squared) + (in_time ? "" : " (over 30 s)");
    return o;
}

// ---------------------------------------------------------------- criterion 2

inline Outcome criterion_2() {
    Outcome o{2, "3D threshold regularity", false, ""};
    detail::Stopwatch sw;
    SweepConfig c = free_1d_sweep_config();
    c.s = 1.1;
    c.s_prime = 1.1;
    const SweepResult res = sweep(Free3DRadial{RadialGrid::with_spacing(100.0, 0.1)}, c);
    const FitResult fit = fit_exponent(res.points);
    double lo = INFINITY, hi = 0.0;
    for (const auto& p : res.points) {
        lo = std::min(lo, p.norm);
        hi = std::max(hi, p.norm);
    }
    const double variation = (hi - lo) / lo;
    const bool in_time = sw.seconds() < 60.0;
    o.pass = res.complete && variation <= 0.05 && fit.alpha <= 0.05 && in_time;
    o.detail = "variation=" + fmt(variation) + " alpha=" + fmt(fit.alpha) + (in_time ? "" : " (over 60 s)");
    return o;
}

// ---------------------------------------------------------------- criterion 3

inline Outcome criterion_3() {
    Outcome o{3, "square-well bifurcation law", false, ""};
    detail::Stopwatch sw;
    const BifurcationCurve c = bifurcation_curve({0.04, 0.02, 0.01, 0.005});
    bool ok = true;
    double worst = 0.0;
    for (const auto& p : c.points) {
        const double dev = std::abs(p.energy / p.predicted - 1.0);
        worst = std::max(worst, dev / p.g);
        ok = ok && dev <= 3.0 * p.g;
    }
    const bool in_time = sw.seconds() < 1.0;
    o.pass = ok && std::abs(c.slope - 2.0) <= 0.05 && in_time;
    o.detail = "max|E/(-g^2)-1|/g=" + fmt(worst) + " slope=" + fmt(c.slope) + (in_time ? "" : " (over 1 s)");
    return o;
}

// ---------------------------------------------------------------- criterion 4

struct NamedPotential {
    std::string name;
    Potential1D v;
    bool nonnegative_form = false;  // real V >= 0, used for the criticality cross-check
};

inline std::vector<NamedPotential> threshold_suite() {
    std::vector<double> xs{-1.5, -0.5, 0.0, 0.5, 1.5};
    std::vector<cplx> vs{0.0, 0.8, 0.3, 0.8, 0.0};
    return {
        {"zero", zero_potential(), true},
        {"bump", bump_potential(1.0), true},
        {"wide bump", bump_potential(0.5, 2.0), true},
        {"smooth bump", smooth_bump_potential(2.0), true},
        {"table", table_potential(xs, vs, "table:w-shape"), true},
        {"shallow well", well_potential(0.5), false},
        {"deep well", well_potential(1.5), false},
        {"critical well", well_potential(pi * pi / 4.0), false},
        {"complex bump", bump_potential(cplx(1.0, 1.0)), false},
        {"absorbing bump", bump_potential(cplx(0.0, -0.5)), false},
        {"complex well", bump_potential(cplx(-0.5, 0.3)), false},
    };
}

inline Grid1D jost_grid() { return Grid1D::with_spacing(20.0, 0.01); }

inline Outcome criterion_4() {
    Outcome o{4, "Wronskian dichotomy", false, ""};
    detail::Stopwatch sw;
    std::ostringstream d;
    const cplx w0 = wronskian(jost_pair(zero_potential(), jost_grid()));
    const cplx w1 = wronskian(jost_pair(bump_potential(1.0), jost_grid()));
    const double rel1 = std::abs(w1 - std::sinh(2.0)) / std::sinh(2.0);
    bool ok = std::abs(w0) <= 1e-8 && rel1 <= 1e-6;
    d << "|W0|=" << fmt(std::abs(w0)) << " rel(W1)=" << fmt(rel1);

    SweepConfig cfg;
    cfg.s = 2.0;
    cfg.s_prime = 2.0;
    int agree = 0, total = 0;
    std::string disagreements;
    for (const auto& p : threshold_suite()) {
        const ThresholdReport j = classify_threshold_1d(p.v, jost_grid());
        const ThresholdReport s = classify(Schrodinger1D{p.v, Grid1D::with_spacing(20.0, 0.05), {}}, cfg);
        ++total;
        if (j.classification == s.classification && j.classification != Classification::Inconclusive) {
            ++agree;
        } else {
            disagreements += " " + p.name + "(" + std::string(to_string(j.classification)) + "/" +
                             std::string(to_string(s.classification)) + ")";
        }
    }
    ok = ok && total >= 10 && agree == total;
    d << " agree=" << agree << "/" << total << disagreements;
    const bool in_time = sw.seconds() < 60.0;
    o.pass = ok && in_time;
    o.detail = d.str() + (in_time ? "" : " (over 60 s)");
    return o;
}

// ---------------------------------------------------------------- criterion 5

inline Outcome criterion_5() {
    Outcome o{5, "rank-one regularization", false, ""};
    const RankOneModelReport rep = rank_one_regularized_threshold();
    double dev = INFINITY;
    if (rep.unperturbed.classification == Classification::Virtual && !rep.unperturbed.states.empty()) {
        const RankOneModelOptions opts;
        dev = 0.0;
        const auto& st = rep.unperturbed.states.front();
        for (std::size_t i = 0; i < rep.unperturbed.state_points.size(); ++i)
            if (std::abs(rep.unperturbed.state_points[i]) <= 0.5 * opts.half_width)
                dev = std::max(dev, std::abs(st[Eigen::Index(i)] - 1.0));
    }
    o.pass = std::abs(rep.normalized_determinant) > 0.1 && rep.perturbed.classification == Classification::Regular &&
             rep.unperturbed.classification == Classification::Virtual && dev <= 0.05;
    o.detail = "det=" + fmt(rep.determinant) + " perturbed=" + std::string(to_string(rep.perturbed.classification)) +
               " unperturbed=" + std::string(to_string(rep.unperturbed.classification)) + " state_dev=" + fmt(dev);
    return o;
}

// ---------------------------------------------------------------- criterion 6

inline std::vector<CVector> shift_test_profiles() {
    CVector a(1), b(3), c(6);
    a << 1.0;
    b << 1.0, cplx(0.0, 0.5), -0.25;
    for (int i = 0; i < 6; ++i) c[i] = std::polar(std::pow(0.6, i), 0.7 * i);
    return {a, b, c};
}

inline Outcome criterion_6() {
    Outcome o{6, "shift operator", false, ""};
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> radius(1.0, 10.0), angle(0.0, 2.0 * pi);
    double worst_norm = 0.0;
    for (int k = 0; k < 100; ++k) {
        double r = radius(rng);
        if (r <= 1.0) r = std::nextafter(1.0, 2.0);
        const cplx z = std::polar(r, angle(rng));
        const Sampling s = index_sampling(64);
        worst_norm = std::max(worst_norm, l1_to_linf_norm(KernelOperator(s, s, shift_resolvent_matrix(64, z))));
    }
    double worst_res = 0.0;
    for (cplx z0 : {cplx(1.0), cplx(0.0, 1.0), std::polar(1.0, pi / 4.0)})
        for (const CVector& phi : shift_test_profiles())
            worst_res = std::max(worst_res, build_shift_virtual_level(z0, phi).residual);
    o.pass = worst_norm <= 1.0 + 1e-12 && worst_res <= 1e-10;
    o.detail = "max_norm=" + fmt(worst_norm) + " max_residual=" + fmt(worst_res);
    return o;
}

// ---------------------------------------------------------------- criterion 7

inline Outcome criterion_7() {
    Outcome o{7, "embedded eigenvalue family", false, ""};
    bool ok = true;
    std::ostringstream d;
    for (double zeta0 : {0.0, 1.0}) {
        const EmbeddedFamily f = embedded_family_check(zeta0, 8);
        double worst = 0.0;
        for (const auto& s : f.samples) worst = std::max(worst, s.residual);
        ok = ok && worst <= 1e-6 && f.monotone && f.decades >= 3.0 - 1e-9;
        d << (zeta0 == 0.0 ? "" : " ") << "zeta0=" << fmt(zeta0) << ": residual=" << fmt(worst)
          << " monotone=" << (f.monotone ? "yes" : "no") << " decades=" << fmt(f.decades)
          << " growth=" << fmt(f.sweep.norms.back().norm / f.sweep.norms.front().norm);
    }
    o.pass = ok;
    o.detail = d.str();
    return o;
}

// ---------------------------------------------------------------- criterion 8

inline Outcome criterion_8() {
    Outcome o{8, "criticality dichotomy", false, ""};
    std::ostringstream d;
    const DichotomyCheck line = criticality_dichotomy(FormGeometry::Line, zero_potential(), 400.0, 0.5);
    double dev = INFINITY;
    if (line.at_r.verdict == Dichotomy::NullState) {
        dev = 0.0;
        for (std::size_t i = 0; i < line.at_r.points.size(); ++i)
            if (std::abs(line.at_r.points[i]) <= 1.0) dev = std::max(dev, std::abs(line.at_r.phi[i] - 1.0));
    }
    const DichotomyCheck radial = criticality_dichotomy(FormGeometry::Radial3D, zero_potential(), 400.0, 0.5);
    bool ok = line.stable && line.at_r.verdict == Dichotomy::NullState && dev <= 0.05 && radial.stable &&
              radial.at_r.verdict == Dichotomy::WeightedGap && radial.at_r.margin > 0.0 && radial.at_2r.margin > 0.0;
    d << "line=" << to_string(line.at_r.verdict) << "/" << to_string(line.at_2r.verdict) << " dev=" << fmt(dev)
      << " radial=" << to_string(radial.at_r.verdict) << "/" << to_string(radial.at_2r.verdict)
      << " c=" << fmt(radial.at_r.weight_c) << " margin=" << fmt(radial.at_r.margin);

    int consistent = 0, shared = 0;
    for (const auto& p : threshold_suite()) {
        if (!p.nonnegative_form) continue;
        ++shared;
        const DichotomyCheck c = criticality_dichotomy(FormGeometry::Line, p.v, 400.0, 0.5);
        const ThresholdReport j = classify_threshold_1d(p.v, jost_grid());
        const bool null_state = c.stable && c.at_r.verdict == Dichotomy::NullState;
        const bool gap = c.stable && c.at_r.verdict == Dichotomy::WeightedGap;
        if ((null_state && j.classification == Classification::Virtual) ||
            (gap && j.classification == Classification::Regular))
            ++consistent;
        else
            d << " mismatch:" << p.name;
    }
    ok = ok && consistent == shared;
    d << " consistent=" << consistent << "/" << shared;
    o.pass = ok;
    o.detail = d.str();
    return o;
}

// ---------------------------------------------------------------- criterion 9

/// Random n x n complex matrix of nullity k, as a product of n x (n-k) factors.
inline CMatrix planted_nullity_matrix(int n, int k, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    CMatrix a = CMatrix::Zero(n, n - k), b = CMatrix::Zero(n, n - k);
    for (int j = 0; j < n - k; ++j)
        for (int i = 0; i < n; ++i) {
            a(i, j) = cplx(g(rng), g(rng));
            b(i, j) = cplx(g(rng), g(rng));
        }
    return a * b.adjoint();
}

inline Outcome criterion_9() {
    Outcome o{9, "matrix nullity", false, ""};
    std::mt19937_64 rng(99);
    int agree = 0;
    for (int t = 0; t < 100; ++t) {
        const int k = t % 4;
        const int n = std::max(k + 1, 2 + (t / 4) % 7);
        const NullityResult r = matrix_nullity_by_perturbation(planted_nullity_matrix(n, k, rng), 20, std::uint64_t(t) + 1);
        if (r.nullity == r.svd_nullity && r.nullity == std::size_t(k)) ++agree;
    }
    CMatrix jordan = CMatrix::Zero(3, 3);
    jordan(0, 1) = 1.0;
    jordan(1, 2) = 1.0;
    const NullityResult jr = matrix_nullity_by_perturbation(jordan);
    o.pass = agree == 100 && jr.nullity == 1 && jr.svd_nullity == 1;
    o.detail = "agree=" + std::to_string(agree) + "/100 jordan=" + std::to_string(jr.nullity);
    return o;
}

// --------------------------------------------------------------- criterion 10

/// sup over interior nodes of |(-D_h^2 - z) u - f| for u = K f, and of
/// |K (-D_h^2 - z) f - f|, with f a smooth bump supported in [-2, 2].
struct InverseResiduals {
    double left = 0.0;
    double right = 0.0;
};

inline cplx smooth_test_function(double x) {
    if (std::abs(x) >= 2.0) return 0.0;
    const double t = 1.0 - x * x / 4.0;
    return t * t * t * t * cplx(1.0, 0.5 * x);
}

inline InverseResiduals inverse_residuals(const KernelOperator& k, const Grid1D& grid, cplx z, double interior) {
    const auto n = Eigen::Index(grid.size());
    const double h = grid.spacing();
    CVector f(n);
    for (Eigen::Index i = 0; i < n; ++i) f[i] = smooth_test_function(grid.point(std::size_t(i)));
    const auto apply_fd = [&](const CVector& u) {
        CVector out = CVector::Zero(n);
        for (Eigen::Index i = 1; i + 1 < n; ++i) out[i] = -(u[i - 1] - 2.0 * u[i] + u[i + 1]) / (h * h) - z * u[i];
        return out;
    };
    InverseResiduals r;
    const CVector u = k.apply(f);
    const CVector lu = apply_fd(u);
    const CVector rf = k.apply(apply_fd(f));
    for (Eigen::Index i = 1; i + 1 < n; ++i) {
        if (std::abs(grid.point(std::size_t(i))) > interior) continue;
        r.left = std::max(r.left, std::abs(lu[i] - f[i]));
        r.right = std::max(r.right, std::abs(rf[i] - f[i]));
    }
    return r;
}

inline std::string sweep_csv(unsigned threads) {
    const SweepResult res = sweep(free_1d_operator(), free_1d_sweep_config(threads));
    CsvTable t({"radius", "norm", "z_re", "z_im"});
    for (const auto& p : res.points) t.row({p.radius, p.norm, p.z.real(), p.z.imag()});
    std::ostringstream os;
    t.write(os, {{"op", "free1d"}});
    return os.str();
}

inline Outcome criterion_10() {
    Outcome o{10, "numerical hygiene", false, ""};
    std::ostringstream d;
    bool ok = true;

    // left and right inverse at z = -1, second order in h
    const auto free_res = [](double h) {
        const Grid1D g = Grid1D::with_spacing(12.0, h);
        return inverse_residuals(build_free_kernel_operator(1, g, SpectralParameter::interior(-1.0)), g, -1.0, 4.0);
    };
    const InverseResiduals a = free_res(0.1), b = free_res(0.05);
    const double left_order = std::log2(a.left / b.left);
    const double right_order = std::log2(a.right / b.right);
    ok = ok && left_order >= 1.8 && right_order >= 1.8 && b.left <= 1e-2 && b.right <= 1e-2;
    d << "inverse_order=" << fmt(std::min(left_order, right_order));

    // adjoint symmetry of weighted norms
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst_adj = 0.0;
    for (int t = 0; t < 5; ++t) {
        const double s = 0.5 + 2.0 * unit(rng), sp = 0.5 + 2.0 * unit(rng);
        const cplx z = std::polar(0.01 + unit(rng), 2.0 * pi * unit(rng));
        const KernelOperator k =
            build_free_kernel_operator(1, Grid1D::with_spacing(10.0, 0.1), SpectralParameter::upper(z));
        NormOptions no;
        no.method = NormMethod::Svd;
        const double n1 = operator_norm_weighted(k, WeightExponent(s), WeightExponent(sp), no);
        const double n2 = operator_norm_weighted(k.adjoint(), WeightExponent(sp), WeightExponent(s), no);
        worst_adj = std::max(worst_adj, std::abs(n1 - n2) / n1);
    }
    ok = ok && worst_adj <= 1e-10;
    d << " adjoint=" << fmt(worst_adj);

    // kernel symmetry and conjugation on random samples
    double worst_sym = 0.0;
    for (int t = 0; t < 200; ++t) {
        const double x = 10.0 * unit(rng) - 5.0, y = 10.0 * unit(rng) - 5.0;
        const double r = 0.01 + 5.0 * unit(rng), rp = 0.01 + 5.0 * unit(rng);
        const cplx z = std::polar(0.01 + 2.0 * unit(rng), 2.0 * pi * unit(rng));
        const SpectralParameter up = SpectralParameter::upper(z);
        const SpectralParameter down = SpectralParameter::lower(std::conj(z));
        const auto rel = [](cplx p, cplx q) { return std::abs(p - q) / std::max(1e-300, std::abs(p)); };
        worst_sym = std::max({worst_sym, rel(kernel_1d(x, y, up), kernel_1d(y, x, up)),
                              rel(kernel_1d(x, y, down), std::conj(kernel_1d(x, y, up))),
                              rel(kernel_3d(r, down), std::conj(kernel_3d(r, up))),
                              rel(kernel_2d(r, down), std::conj(kernel_2d(r, up))),
                              rel(radial_kernel_3d(r, rp, up), radial_kernel_3d(rp, r, up)),
                              rel(radial_kernel_2d(r, rp, up), radial_kernel_2d(rp, r, up))});
    }
    ok = ok && worst_sym <= 1e-12;
    d << " symmetry=" << fmt(worst_sym);

    // byte-identical sweep output, independent of the worker count
    const std::string first = sweep_csv(1);
    const bool deterministic = first == sweep_csv(1) && first == sweep_csv(3);
    ok = ok && deterministic;
    d << " deterministic=" << (deterministic ? "yes" : "no");

    o.pass = ok;
    o.detail = d.str();
    return o;
}

// -------------------------------------------------------------------- driver

inline const std::vector<std::function<Outcome()>>& criteria() {
    static const std::vector<std::function<Outcome()>> all{criterion_1, criterion_2, criterion_3, criterion_4,
                                                           criterion_5, criterion_6, criterion_7, criterion_8,
                                                           criterion_9, criterion_10};
    return all;
}

/// Runs one criterion; exceptions count as failure with their message.
inline Outcome run_criterion(int id) {
    if (id < 1 || id > int(criteria().size())) fail(ErrorKind::Usage, "acceptance: no criterion " + std::to_string(id));
    try {
        return criteria()[std::size_t(id - 1)]();
    } catch (const std::exception& e) {
        return {id, "criterion " + std::to_string(id), false, "error: " + detail::failure_text(e)};
    }
}

inline std::string format_line(const Outcome& o) {
    return std::string(o.pass ? "PASS" : "FAIL") + " criterion " + std::to_string(o.id) + " (" + o.title +
           "): " + o.detail;
}

} // namespace virtlev::acceptance
