#include "support.hpp"

#include <filesystem>
#include <fstream>

using namespace virtlev;

namespace {

// W at z = 0 for V = c on [-1, 1]: theta_+ = cosh(sqrt(c)(x - 1)) inside, so
// W = sqrt(c) sinh(2 sqrt(c)); for c < 0 this continues to -sqrt(g) sin(2 sqrt(g)).
cplx box_wronskian(cplx c) {
    const cplx q = std::sqrt(c);
    return q == cplx(0.0) ? cplx(0.0) : q * std::sinh(2.0 * q);
}

Potential1D shifted(const Potential1D& v, double shift) {
    return {v.support_radius + std::abs(shift), [v, shift](double x) { return v(x - shift); }, v.label + "+shift"};
}

} // namespace

TEST(Potentials, ParseSpecs) {
    EXPECT_EQ(parse_potential("zero")(0.3), cplx(0.0));
    const Potential1D w = parse_potential("well:g=0.5");
    EXPECT_EQ(w(0.2), cplx(-0.5));
    EXPECT_EQ(w(1.5), cplx(0.0));
    const Potential1D b = parse_potential("bump:amp=1,amp_im=2,a=0.5");
    EXPECT_EQ(b(0.4), cplx(1.0, 2.0));
    EXPECT_EQ(b(0.6), cplx(0.0));
    EXPECT_NEAR(parse_potential("smooth:amp=2")(0.5).real(), 2.0 * 0.75 * 0.75, 1e-15);
    EXPECT_ERROR_KIND(parse_potential("well"), ErrorKind::Usage);
    EXPECT_ERROR_KIND(parse_potential("well:g=abc"), ErrorKind::Usage);
    EXPECT_ERROR_KIND(parse_potential("bump:amp=1,b=2"), ErrorKind::Usage);
    EXPECT_ERROR_KIND(parse_potential("spike:amp=1"), ErrorKind::Usage);
}

TEST(Potentials, TableInterpolation) {
    const auto path = std::filesystem::temp_directory_path() / "virtlev_table_test.csv";
    {
        std::ofstream out(path);
        out << "x,v\n-1,0\n0,2,1\n1,0\n";
    }
    const Potential1D v = parse_potential("table:" + path.string());
    EXPECT_NEAR(std::abs(v(0.5) - cplx(1.0, 0.5)), 0.0, 1e-15);
    EXPECT_EQ(v(1.5), cplx(0.0));
    EXPECT_EQ(v.support_radius, 1.0);
    std::filesystem::remove(path);
    EXPECT_ERROR_KIND(table_potential({0.0, 0.0}, {1.0, 1.0}), ErrorKind::InvalidInput);
}

TEST(Potentials, CellAverageOfJumpAtNode) {
    const Potential1D b = bump_potential(1.0);
    EXPECT_NEAR(cell_average(b, 1.0, 0.1).real(), 0.5, 1e-15);
    EXPECT_NEAR(cell_average(b, 0.5, 0.1).real(), 1.0, 1e-15);
}

TEST(Jost, FreeWronskianAtMinusOne) {
    const JostPair p = jost_pair(zero_potential(), Grid1D::with_spacing(20.0, 0.01), -1.0);
    EXPECT_NEAR(std::abs(wronskian(p) - 2.0), 0.0, 1e-8);  // RK4, O(h^4)
}

TEST(Jost, BoxWronskianClosedForm) {
    const Grid1D g = Grid1D::with_spacing(20.0, 0.01);
    for (cplx c : {cplx(1.0), cplx(0.3), cplx(3.0), cplx(-0.5), cplx(1.0, 1.0), cplx(0.0, -0.5), cplx(-0.5, 0.3)}) {
        const cplx w = wronskian(jost_pair(bump_potential(c), g, 0.0));
        const cplx oracle = box_wronskian(c);
        EXPECT_NEAR(std::abs(w - oracle), 0.0, 1e-8 * std::max(1.0, std::abs(oracle))) << c;
    }
    EXPECT_NEAR(wronskian(jost_pair(bump_potential(1.0), g, 0.0)).real(), std::sinh(2.0), 1e-9);
}

TEST(Jost, SolutionMatchesCoshInsideBox) {
    const Grid1D g = Grid1D::with_spacing(5.0, 0.01);
    const double c = 2.0;
    const JostSolution s = jost_solve(bump_potential(c), g, 0.0, JostSide::Plus);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.point(i);
        double oracle = 1.0;
        if (x < 1.0 && x >= -1.0) oracle = std::cosh(std::sqrt(c) * (x - 1.0));
        if (x < -1.0) {
            const double a = std::cosh(-2.0 * std::sqrt(c));
            const double da = std::sqrt(c) * std::sinh(-2.0 * std::sqrt(c));
            oracle = a + da * (x + 1.0);
        }
        ASSERT_NEAR(s.value[Eigen::Index(i)].real(), oracle, 1e-8 * std::max(1.0, std::abs(oracle))) << "x = " << x;
    }
}

TEST(Jost, FreeThresholdIsVirtual) {
    const Grid1D g = Grid1D::with_spacing(20.0, 0.01);
    const JostPair p = jost_pair(zero_potential(), g, 0.0);
    EXPECT_LE(std::abs(wronskian(p)), 1e-8);
    EXPECT_ERROR_KIND(green_kernel(p), ErrorKind::VirtualLevel);
    const ThresholdReport r = classify_threshold_1d(zero_potential(), g);
    EXPECT_EQ(r.classification, Classification::Virtual);
    ASSERT_EQ(r.states.size(), 1u);
    EXPECT_NEAR((r.states[0].array() - 1.0).abs().maxCoeff(), 0.0, 1e-12);
}

TEST(Jost, CriticalWellIsVirtualAndNeighboursRegular) {
    const Grid1D g = Grid1D::with_spacing(20.0, 0.01);
    EXPECT_EQ(classify_threshold_1d(well_potential(pi * pi / 4.0), g).classification, Classification::Virtual);
    for (double gg : {0.5, 1.5, 3.0}) {
        const ThresholdReport r = classify_threshold_1d(well_potential(gg), g);
        EXPECT_EQ(r.classification, Classification::Regular) << gg;
        EXPECT_TRUE(r.green.has_value());
    }
}

TEST(Jost, RejectsSpectrumAndShortGrids) {
    EXPECT_ERROR_KIND(jost_pair(bump_potential(1.0), Grid1D::with_spacing(5.0, 0.01), 1.0), ErrorKind::Unsupported);
    EXPECT_ERROR_KIND(jost_pair(bump_potential(1.0, 3.0), Grid1D::with_spacing(2.0, 0.01), 0.0), ErrorKind::InvalidInput);
}

TEST(Jost, WronskianTranslationInvariant) {
    const Grid1D g = Grid1D::with_spacing(20.0, 0.01);
    for (cplx z : {cplx(0.0), cplx(-1.0), cplx(-0.2, 0.3)}) {
        const cplx w0 = wronskian(jost_pair(bump_potential(1.5), g, z));
        const cplx w1 = wronskian(jost_pair(shifted(bump_potential(1.5), 0.5), g, z));
        const cplx w2 = wronskian(jost_pair(shifted(bump_potential(1.5), -2.0), g, z));
        EXPECT_NEAR(std::abs(w1 - w0), 0.0, 1e-8 * std::abs(w0));
        EXPECT_NEAR(std::abs(w2 - w0), 0.0, 1e-8 * std::abs(w0));
    }
}

TEST(Jost, NonnegativeBumpsHavePositiveWronskian) {
    gen::Rng rng(41);
    for (int t = 0; t < 25; ++t) {
        const double amp = rng.uniform(0.05, 5.0);
        const double a = 0.01 * rng.integer(20, 200);
        const Grid1D g = Grid1D::with_spacing(a + 5.0, 0.01);
        const cplx w = wronskian(jost_pair(rng.integer(0, 1) ? bump_potential(amp, a) : smooth_bump_potential(amp, a), g, 0.0));
        EXPECT_GT(w.real(), 0.0);
        EXPECT_NEAR(w.imag(), 0.0, 1e-12);
    }
}

TEST(Jost, GreenKernelOfFreeLine) {
    const Grid1D g = Grid1D::with_spacing(6.0, 0.01);
    const auto p = SpectralParameter::interior(cplx(-1.0, 0.5));
    const KernelOperator gk = green_kernel(jost_pair(zero_potential(), g, p.z));
    const KernelOperator fk = build_free_kernel_operator(1, g, p);
    EXPECT_LE(gen::max_abs(gk.entries() - fk.entries()), 1e-8);
}

TEST(Jost, GreenKernelSolvesTheEquation) {
    // (-d^2 + V - z) G(., y) = 0 away from x = y and the jumps of V; the
    // three-point second difference leaves an O(h^2) residual
    const Potential1D v = smooth_bump_potential(2.0, 1.5);
    const cplx z(-0.5, 0.2);
    double prev = 0.0;
    for (double h : {0.02, 0.01}) {
        const Grid1D g = Grid1D::with_spacing(8.0, h);
        const KernelOperator gk = green_kernel(jost_pair(v, g, z));
        const auto& e = gk.entries();
        const Eigen::Index col = Eigen::Index(g.center_index());
        double worst = 0.0;
        for (Eigen::Index i = 1; i + 1 < e.rows(); ++i) {
            if (std::abs(i - col) < 2) continue;
            const cplx d2 = (e(i + 1, col) - 2.0 * e(i, col) + e(i - 1, col)) / (h * h);
            worst = std::max(worst, std::abs(-d2 + (v(g.point(std::size_t(i))) - z) * e(i, col)));
        }
        if (prev > 0.0) {
            EXPECT_GT(prev / worst, 3.0);
        }
        prev = worst;
    }
    EXPECT_LT(prev, 1e-3);
}
