#include "support.hpp"

using namespace virtlev;

namespace {

// K_0(t) = integral_0^inf exp(-t cosh u) du for Re t > 0, composite Simpson.
cplx k0_integral(cplx t) {
    double upper = 1.0;
    while (t.real() * std::cosh(upper) < 50.0) upper += 0.5;
    const int n = 40000;
    const double h = upper / n;
    cplx sum = std::exp(-t) + std::exp(-t * std::cosh(upper));
    for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * std::exp(-t * std::cosh(i * h));
    return sum * h / 3.0;
}

// I_0(t) = (1/pi) integral_0^pi exp(t cos u) du
cplx i0_integral(cplx t) {
    const int n = 4000;
    const double h = pi / n;
    cplx sum = std::exp(t) + std::exp(-t);
    for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * std::exp(t * std::cos(i * h));
    return sum * h / (3.0 * pi);
}

} // namespace

TEST(Branch, SquareRootExamples) {
    EXPECT_NEAR(std::abs(sqrt_minus_z(SpectralParameter::interior(-1.0)).value - 1.0), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(sqrt_minus_z(SpectralParameter::upper(1.0)).value - cplx(0.0, -1.0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(sqrt_minus_z(SpectralParameter::lower(1.0)).value - cplx(0.0, 1.0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(sqrt_minus_z(SpectralParameter::interior(cplx(0.0, 2.0))).value - cplx(1.0, -1.0)), 0.0, 1e-15);
}

TEST(Branch, PositiveAxisNeedsSide) {
    EXPECT_ERROR_KIND(sqrt_minus_z(SpectralParameter::interior(1.0)), ErrorKind::BranchAmbiguity);
    EXPECT_ERROR_KIND(sqrt_minus_z(SpectralParameter::interior(cplx(NAN, 0.0))), ErrorKind::InvalidInput);
}

TEST(Branch, PrincipalPropertyAndContinuity) {
    gen::Rng rng(101);
    for (int t = 0; t < 1000; ++t) {
        cplx z = rng.annulus(1e-6, 100.0);
        if (z.imag() == 0.0) continue;
        const cplx k = sqrt_minus_z(SpectralParameter::interior(z)).value;
        EXPECT_GT(k.real(), 0.0);
        EXPECT_NEAR(std::abs(k * k + z), 0.0, 1e-12 * std::abs(z));
    }
    // the upper boundary value is the limit from Im z > 0
    for (double x : {0.3, 1.0, 7.0}) {
        const cplx above = sqrt_minus_z(SpectralParameter::interior(cplx(x, 1e-12))).value;
        const cplx below = sqrt_minus_z(SpectralParameter::interior(cplx(x, -1e-12))).value;
        EXPECT_NEAR(std::abs(above - sqrt_minus_z(SpectralParameter::upper(x)).value), 0.0, 1e-9);
        EXPECT_NEAR(std::abs(below - sqrt_minus_z(SpectralParameter::lower(x)).value), 0.0, 1e-9);
    }
}

TEST(Kernel1D, Examples) {
    EXPECT_NEAR(std::abs(kernel_1d(1.0, 0.0, SpectralParameter::interior(-1.0)) - std::exp(-1.0) / 2.0), 0.0, 1e-16);
    EXPECT_NEAR(kernel_1d(0.0, 0.0, SpectralParameter::interior(-1e-4)).real(), 50.0, 1e-12);
    EXPECT_ERROR_KIND(kernel_1d(0.0, 1.0, SpectralParameter::interior(0.0)), ErrorKind::ThresholdSingularity);
    EXPECT_ERROR_KIND(kernel_1d(NAN, 1.0, SpectralParameter::interior(-1.0)), ErrorKind::InvalidInput);
}

TEST(Kernel1D, SymmetryAndConjugation) {
    gen::Rng rng(7);
    for (int t = 0; t < 300; ++t) {
        const double x = rng.uniform(-10, 10), y = rng.uniform(-10, 10);
        cplx z = rng.annulus(1e-3, 20.0);
        if (z.imag() == 0.0) continue;
        const auto p = SpectralParameter::interior(z);
        const auto pc = SpectralParameter::interior(std::conj(z));
        EXPECT_NEAR(std::abs(kernel_1d(x, y, p) - kernel_1d(y, x, p)), 0.0, 1e-15);
        EXPECT_NEAR(std::abs(kernel_1d(x, y, pc) - std::conj(kernel_1d(x, y, p))), 0.0, 1e-14 * (1 + std::abs(kernel_1d(x, y, p))));
    }
}

TEST(Kernel1D, SolvesTheEquationAwayFromTheDiagonal) {
    // -G'' - z G = 0 for x != y, and the integral of G is 1/k^2 = -1/z
    const cplx z(-0.7, 0.4);
    const auto p = SpectralParameter::interior(z);
    const double h = 1e-3;
    for (double x : {-3.0, -0.5, 0.8, 2.5}) {
        const cplx g = kernel_1d(x, 0.0, p);
        const cplx d2 = (kernel_1d(x + h, 0.0, p) - 2.0 * g + kernel_1d(x - h, 0.0, p)) / (h * h);
        EXPECT_NEAR(std::abs(-d2 - z * g), 0.0, 1e-6);
    }
    const double dx = 1e-3;
    cplx integral = 0.0;
    for (int i = -60000; i <= 60000; ++i) integral += kernel_1d(i * dx, 0.0, p) * dx;
    EXPECT_NEAR(std::abs(integral + 1.0 / z), 0.0, 1e-6);
}

TEST(Kernel3D, Examples) {
    EXPECT_NEAR(kernel_3d(1.0, SpectralParameter::interior(0.0)).real(), 1.0 / (4.0 * pi), 1e-16);
    const cplx v = kernel_3d(2.0, SpectralParameter::upper(1.0));
    EXPECT_NEAR(std::abs(v - std::exp(cplx(0.0, 2.0)) / (8.0 * pi)), 0.0, 1e-16);
    EXPECT_ERROR_KIND(kernel_3d(0.0, SpectralParameter::interior(-1.0)), ErrorKind::OnDiagonalSingularity);
}

TEST(Kernel2D, BesselK0AgainstIntegral) {
    EXPECT_NEAR(special::bessel_k0(1.0).real(), 0.4210244382407084, 1e-14);
    for (cplx t : {cplx(0.05), cplx(0.5), cplx(1.0), cplx(1.99), cplx(2.01), cplx(3.5), cplx(12.0), cplx(1.0, 1.5), cplx(3.0, -2.0), cplx(0.2, 0.3)}) {
        const cplx oracle = k0_integral(t);
        EXPECT_NEAR(std::abs(special::bessel_k0(t) - oracle), 0.0, 1e-10 * std::max(1.0, std::abs(oracle))) << t;
    }
}

TEST(Kernel2D, SmallArgumentLogarithm) {
    for (double t : {1e-3, 1e-5, 1e-7}) {
        const double lead = -std::log(t / 2.0) - euler_gamma;
        EXPECT_NEAR(special::bessel_k0(t).real(), lead, 2.0 * t * t * std::abs(std::log(t)) + 1e-14);
    }
}

TEST(Kernel2D, KernelAndRestrictions) {
    const cplx v = kernel_2d(1.0, SpectralParameter::interior(-1.0));
    EXPECT_NEAR(std::abs(v - k0_integral(1.0) / (2.0 * pi)), 0.0, 1e-11);
    EXPECT_ERROR_KIND(kernel_2d(1.0, SpectralParameter::upper(1.0)), ErrorKind::Unsupported);
    EXPECT_ERROR_KIND(kernel_2d(0.0, SpectralParameter::interior(-1.0)), ErrorKind::OnDiagonalSingularity);
}

TEST(RadialKernels, ThreeDimensionalClosedForm) {
    EXPECT_DOUBLE_EQ(radial_kernel_3d(0.5, 2.0, SpectralParameter::interior(0.0)).real(), 0.5);
    gen::Rng rng(19);
    for (int t = 0; t < 200; ++t) {
        const double r = rng.uniform(1e-3, 10.0), rp = rng.uniform(1e-3, 10.0);
        const cplx z = rng.annulus(1e-4, 10.0);
        if (z.imag() == 0.0) continue;
        const auto p = SpectralParameter::interior(z);
        const cplx k = sqrt_minus_z(p).value;
        const cplx oracle = std::exp(-k * std::max(r, rp)) * std::sinh(k * std::min(r, rp)) / k;
        EXPECT_NEAR(std::abs(radial_kernel_3d(r, rp, p) - oracle), 0.0, 1e-12 * std::max(1.0, std::abs(oracle)));
    }
}

TEST(RadialKernels, TwoDimensionalAgainstIntegrals) {
    const auto p = SpectralParameter::interior(cplx(-1.0, 0.5));
    const cplx k = sqrt_minus_z(p).value;
    for (auto [r, rp] : {std::pair{0.3, 1.2}, std::pair{2.0, 0.7}, std::pair{4.0, 5.0}}) {
        const double a = std::min(r, rp), b = std::max(r, rp);
        const cplx oracle = std::sqrt(a * b) * i0_integral(k * a) * k0_integral(k * b);
        EXPECT_NEAR(std::abs(radial_kernel_2d(r, rp, p) - oracle), 0.0, 1e-9 * std::abs(oracle));
    }
}

TEST(FreeKernelOperator, LineGridEntries) {
    const Grid1D g(5.0, 51);
    const auto p = SpectralParameter::interior(cplx(-0.5, 0.2));
    const KernelOperator k = build_free_kernel_operator(1, g, p);
    for (std::size_t i = 0; i < g.size(); i += 7)
        for (std::size_t j = 0; j < g.size(); j += 5)
            EXPECT_NEAR(std::abs(k.entries()(Eigen::Index(i), Eigen::Index(j)) - kernel_1d(g.point(i), g.point(j), p)), 0.0, 1e-14);
    EXPECT_ERROR_KIND(build_free_kernel_operator(3, g, p), ErrorKind::Unsupported);
    EXPECT_ERROR_KIND(build_free_kernel_operator(4, g, p), ErrorKind::InvalidInput);
}

TEST(FreeKernelOperator, TwoDimensionalDiagonalIsCellAverage) {
    const Grid1D g(1.0, 201);
    const double h = g.spacing();
    const auto p = SpectralParameter::interior(-1.0);
    const KernelOperator k = build_free_kernel_operator(2, g, p);
    // average of K_0(|x|)/(2 pi) over [-h/2, h/2] by the midpoint rule on a fine split
    const int n = 20000;
    double avg = 0.0;
    for (int i = 0; i < n; ++i) avg += special::bessel_k0((i + 0.5) * (0.5 * h) / n).real();
    avg /= n * 2.0 * pi;
    EXPECT_NEAR(k.entries()(0, 0).real(), avg, 1e-4 * avg);
}

TEST(FreeKernelOperator, RadialGridEntries) {
    const RadialGrid g(10.0, 100);
    const auto p = SpectralParameter::interior(-0.3);
    const KernelOperator k = build_free_kernel_operator(3, g, p);
    EXPECT_NEAR(std::abs(k.entries()(3, 40) - radial_kernel_3d(g.point(3), g.point(40), p)), 0.0, 1e-15);
    EXPECT_TRUE(k.entries().isApprox(k.entries().transpose()));
    EXPECT_ERROR_KIND(build_free_kernel_operator(1, g, p), ErrorKind::Unsupported);
}
