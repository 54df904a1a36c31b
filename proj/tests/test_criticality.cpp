#include "support.hpp"

using namespace virtlev;

namespace {

double deviation_from_one(const DichotomyResult& r, double k_radius) {
    double m = 0.0;
    for (std::size_t i = 0; i < r.points.size(); ++i)
        if (std::abs(r.points[i]) <= k_radius) m = std::max(m, std::abs(r.phi[i] - 1.0));
    return m;
}

} // namespace

TEST(QuadraticForm, NodesAndRejections) {
    const QuadraticForm line = make_form(FormGeometry::Line, zero_potential(), 10.0, 0.5);
    EXPECT_EQ(line.size(), 39u);
    EXPECT_DOUBLE_EQ(line.points.front(), -9.5);
    const QuadraticForm radial = make_form(FormGeometry::Radial3D, zero_potential(), 10.0, 0.5);
    EXPECT_EQ(radial.size(), 19u);
    EXPECT_DOUBLE_EQ(radial.points.front(), 0.5);
    EXPECT_ERROR_KIND(make_form(FormGeometry::Line, well_potential(1.0), 50.0, 0.25), ErrorKind::InvalidInput);
    EXPECT_ERROR_KIND(make_form(FormGeometry::Line, bump_potential(cplx(1.0, 1.0)), 10.0, 0.5), ErrorKind::InvalidInput);
    EXPECT_ERROR_KIND(make_form(FormGeometry::Line, zero_potential(), 1.0, 0.5), ErrorKind::InvalidInput);
}

TEST(QuadraticForm, NonnegativeOnRandomVectors) {
    gen::Rng rng(55);
    const QuadraticForm f = make_form(FormGeometry::Line, smooth_bump_potential(1.0), 20.0, 0.25);
    const auto d = f.diagonal();
    const auto o = f.off_diagonal();
    for (int t = 0; t < 100; ++t) {
        std::vector<double> u(f.size());
        double n2 = 0.0;
        for (double& x : u) { x = rng.gauss(); n2 += x * x; }
        double a = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            a += d[i] * u[i] * u[i];
            if (i + 1 < u.size()) a += 2.0 * o[i] * u[i] * u[i + 1];
        }
        EXPECT_GE(a, -1e-10 * n2);
    }
}

TEST(HardyGap, RadialFreeWithHalfTheHardyConstant) {
    const QuadraticForm f = make_form(FormGeometry::Radial3D, zero_potential(), 200.0, 0.25);
    std::vector<double> w(f.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = 0.125 / (f.points[i] * f.points[i]);
    EXPECT_TRUE(hardy_gap_check(f, w).holds);
}

TEST(HardyGap, LineFreeFailsOnLargeGrids) {
    const auto w_for = [](const QuadraticForm& f) {
        std::vector<double> w(f.size());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::abs(f.points[i]) <= 1.0 ? 0.1 : 0.0;
        return w;
    };
    const QuadraticForm small = make_form(FormGeometry::Line, zero_potential(), 2.0, 0.1);
    EXPECT_TRUE(hardy_gap_check(small, w_for(small)).holds);
    const QuadraticForm large = make_form(FormGeometry::Line, zero_potential(), 400.0, 0.5);
    const GapCheck c = hardy_gap_check(large, w_for(large));
    EXPECT_FALSE(c.holds);
    EXPECT_LT(c.margin, 0.0);
}

TEST(HardyGap, ZeroWeightAlwaysHolds) {
    for (FormGeometry g : {FormGeometry::Line, FormGeometry::Radial3D}) {
        const QuadraticForm f = make_form(g, bump_potential(0.5), 30.0, 0.25);
        const GapCheck c = hardy_gap_check(f, std::vector<double>(f.size(), 0.0));
        EXPECT_TRUE(c.holds);
        EXPECT_GE(c.margin, 0.0);
    }
    const QuadraticForm f = make_form(FormGeometry::Line, zero_potential(), 5.0, 0.5);
    EXPECT_ERROR_KIND(hardy_gap_check(f, std::vector<double>(3, 0.0)), ErrorKind::Dimension);
    EXPECT_ERROR_KIND(hardy_gap_check(f, std::vector<double>(f.size(), -1.0)), ErrorKind::InvalidInput);
}

TEST(Dichotomy, FreeLineHasConstantNullState) {
    const QuadraticForm f = make_form(FormGeometry::Line, zero_potential(), 400.0, 0.5);
    const DichotomyResult r = null_state_iteration(f, 1.0, 64);
    ASSERT_EQ(r.verdict, Dichotomy::NullState);
    EXPECT_LE(deviation_from_one(r, 1.0), 0.05);
    for (double x : r.phi) EXPECT_GT(x, 0.0);
    ASSERT_EQ(r.trace.size(), 64u);
    for (std::size_t j = 1; j < r.trace.size(); ++j) EXPECT_GT(r.trace[j].lambda, r.trace[j - 1].lambda);
}

TEST(Dichotomy, RadialFreeHasWeightedGap) {
    const QuadraticForm f = make_form(FormGeometry::Radial3D, zero_potential(), 400.0, 0.5);
    const DichotomyResult r = null_state_iteration(f, 1.0, 64);
    ASSERT_EQ(r.verdict, Dichotomy::WeightedGap);
    EXPECT_GT(r.weight_c, 0.0);
    EXPECT_GE(r.margin, -1e-10);
}

TEST(Dichotomy, GapWeightsScaleDown) {
    const QuadraticForm f = make_form(FormGeometry::Radial3D, zero_potential(), 100.0, 0.5);
    const DichotomyResult r = null_state_iteration(f, 1.0, 64);
    ASSERT_EQ(r.verdict, Dichotomy::WeightedGap);
    for (double t : {1.0, 0.75, 0.5, 0.1, 1e-3}) EXPECT_TRUE(hardy_gap_check(f, decay_weight(f, t * r.weight_c)).holds) << t;
    // the reported c is half the largest admissible one
    EXPECT_FALSE(hardy_gap_check(f, decay_weight(f, 2.5 * r.weight_c)).holds);
}

TEST(Dichotomy, ExactlyOneVerdictAndAgreementWithJost) {
    const Grid1D jgrid = Grid1D::with_spacing(20.0, 0.01);
    for (const Potential1D& v : {zero_potential(), bump_potential(1.0), bump_potential(0.5, 2.0), smooth_bump_potential(2.0)}) {
        const DichotomyCheck c = criticality_dichotomy(FormGeometry::Line, v, 200.0, 0.5);
        EXPECT_TRUE(c.stable) << v.label;
        EXPECT_NE(c.at_r.verdict, Dichotomy::Inconclusive) << v.label;
        const bool virtual_level = classify_threshold_1d(v, jgrid).classification == Classification::Virtual;
        EXPECT_EQ(c.at_r.verdict == Dichotomy::NullState, virtual_level) << v.label;
    }
}

TEST(Dichotomy, Preconditions) {
    const QuadraticForm f = make_form(FormGeometry::Line, zero_potential(), 5.0, 0.5);
    EXPECT_ERROR_KIND(null_state_iteration(f, 1.0, 1), ErrorKind::InvalidInput);
    EXPECT_ERROR_KIND(null_state_iteration(f, 0.0, 8), ErrorKind::InvalidInput);
}
