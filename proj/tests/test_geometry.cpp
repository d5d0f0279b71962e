#include <cmath>
#include <functional>
#include <random>

#include <gtest/gtest.h>

#include "fbp/geometry.hpp"
#include "fbp/specfun.hpp"
#include "fbp/verify.hpp"

using namespace fbp;

namespace {

double fd_x(const std::function<double(double, double)>& v, double x, double z, double h)
{
    return (v(x - 2 * h, z) - 8 * v(x - h, z) + 8 * v(x + h, z) - v(x + 2 * h, z)) / (12 * h);
}

double fd_z(const std::function<double(double, double)>& v, double x, double z, double h)
{
    return (v(x, z - 2 * h) - 8 * v(x, z - h) + 8 * v(x, z + h) - v(x, z + 2 * h)) / (12 * h);
}

double fd_zz(const std::function<double(double, double)>& v, double x, double z, double h)
{
    return (-v(x, z - 2 * h) + 16 * v(x, z - h) - 30 * v(x, z) + 16 * v(x, z + h) - v(x, z + 2 * h)) / (12 * h * h);
}

} // namespace

TEST(Polar, RoundTrip)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> R(0.05, 2), T(-5, 5);
    for (int k = 0; k < 200; ++k) {
        const double r = R(rng), t = T(rng);
        double dx, z;
        polar_to_cartesian(r, t, dx, z);
        const PolarPoint<double> p = polar_coords(dx, z, 0.0, 1);
        EXPECT_NEAR(p.r, r, 1e-13 * r);
        EXPECT_NEAR(p.t, t, 1e-12 * std::max(1.0, std::abs(t)));
    }
}

TEST(Polar, OrientationMirrorsTheCorner)
{
    const PolarPoint<double> a = polar_coords(0.2, 0.3, 0.0, 1);
    const PolarPoint<double> b = polar_coords(0.8, 0.3, 1.0, -1);
    EXPECT_DOUBLE_EQ(a.r, b.r);
    EXPECT_DOUBLE_EQ(a.t, -b.t);
}

TEST(Polar, SingularPointThrows)
{
    EXPECT_THROW(polar_coords(0.0, 0.0, 0.0, 1), DomainError);
}

TEST(Polar, VerticalLineSaturates)
{
    EXPECT_EQ(polar_coords(0.0, 0.5, 0.0, 1).t, t_saturation);
    EXPECT_EQ(polar_coords(0.0, -0.5, 0.0, 1).t, -t_saturation);
}

TEST(Polar, JacobianMatchesDifferences)
{
    for (double r : {0.1, 0.7, 1.5})
        for (double t : {-2.0, 0.0, 0.4, 3.0}) {
            double x, z;
            polar_to_cartesian(r, t, x, z);
            const double h = 1e-6 * x;
            const auto rr = [&](double xx, double zz) { return polar_coords(xx, zz, 0.0, 1).r; };
            const auto tt = [&](double xx, double zz) { return polar_coords(xx, zz, 0.0, 1).t; };
            const double det = fd_x(rr, x, z, h) * fd_z(tt, x, z, 1e-6) - fd_z(rr, x, z, 1e-6) * fd_x(tt, x, z, h);
            EXPECT_NEAR(jacobian_det(r, t) / det, 1.0, 1e-5) << "r=" << r << " t=" << t;
        }
}

TEST(Cutoffs, SmoothStepLimitsAndSymmetry)
{
    EXPECT_EQ(smooth_step(-0.5).v, 0.0);
    EXPECT_EQ(smooth_step(1.5).v, 1.0);
    EXPECT_DOUBLE_EQ(smooth_step(0.5).v, 0.5);
    for (double s : {0.05, 0.2, 0.37, 0.81}) {
        EXPECT_NEAR(smooth_step(s).v + smooth_step(1 - s).v, 1.0, 1e-15);
        const double h = 1e-5;
        EXPECT_NEAR(smooth_step(s).d1, (smooth_step(s + h).v - smooth_step(s - h).v) / (2 * h), 1e-7);
        EXPECT_NEAR(smooth_step(s).d2, (smooth_step(s + h).d1 - smooth_step(s - h).d1) / (2 * h), 1e-5);
    }
}

TEST(Cutoffs, Plateau)
{
    EXPECT_EQ(plateau(0.0).v, 1.0);
    EXPECT_EQ(plateau(1.0 / 3).v, 1.0);
    EXPECT_EQ(plateau(-0.5).v, 0.0);
    EXPECT_EQ(plateau(0.7).v, 0.0);
    EXPECT_DOUBLE_EQ(plateau(0.4).v, plateau(-0.4).v);
    EXPECT_DOUBLE_EQ(plateau(0.4).d1, -plateau(-0.4).d1);
}

TEST(Cutoffs, RadialCutoff)
{
    const Cutoff c(0.0, 0.0, 0.1, 0.2);
    EXPECT_EQ(c.value(0.05, 0.05), 1.0);
    EXPECT_EQ(c.value(0.3, 0.0), 0.0);
    const double v = c.value(0.1, 0.1);
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
    const Partials p = c.partials(0.1, 0.08);
    const auto f = [&](double x, double z) { return c.value(x, z); };
    EXPECT_NEAR(p.dx, fd_x(f, 0.1, 0.08, 1e-4), 1e-6);
    EXPECT_NEAR(p.dz, fd_z(f, 0.1, 0.08, 1e-4), 1e-6);
    EXPECT_NEAR(p.dzz, fd_zz(f, 0.1, 0.08, 1e-4), 1e-4);
}

TEST(SingularSolution, ValueOnTheCriticalLine)
{
    // v_0 = r^(1/2) G_0(t); at z = 0, r = x^(1/3)
    const double x = 0.001;
    EXPECT_NEAR(singular_solution(0, x, 0.0).value, std::pow(x, 1.0 / 6) * angular_profile(0).eval(0), 1e-15);
    EXPECT_NEAR(std::pow(x, 1.0 / 6), 0.31622776601683794, 1e-15);
}

TEST(SingularSolution, AnalyticPartialsMatchDifferences)
{
    for (int k : {0, 1})
        for (double x : {0.02, 0.3, 1.1})
            for (double z : {-0.4, -0.05, 0.1, 0.6}) {
                const auto v = [&](double xx, double zz) { return singular_solution(k, xx, zz).value; };
                const Partials p = singular_solution(k, x, z);
                const double scale = std::max(1.0, std::abs(p.dzz));
                EXPECT_NEAR(p.dx, fd_x(v, x, z, 1e-4 * x), 1e-6 * std::max(1.0, std::abs(p.dx)));
                EXPECT_NEAR(p.dz, fd_z(v, x, z, 1e-4), 1e-6 * std::max(1.0, std::abs(p.dz)));
                EXPECT_NEAR(p.dzz, fd_zz(v, x, z, 1e-3), 1e-5 * scale);
            }
}

TEST(SingularSolution, HomogeneousEquation)
{
    std::mt19937_64 rng(11);
    EXPECT_LE(homogeneous_residual(rng, 100), 1e-5);
}

TEST(SingularSolution, LocalizedProfileSolvesWithFbar)
{
    const Cutoff cut(0.0, 0.0, 0.1, 0.2);
    const auto v = [&](double x, double z) { return busing(0, cut, x, z).value; };
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> rho(0.03, 0.3), ang(0.05, 3.09);
    for (int k = 0; k < 60; ++k) {
        const double r = rho(rng), a = ang(rng);
        const double x = r * std::sin(a), z = r * std::cos(a);
        const double res = z * fd_x(v, x, z, 5e-4 * x) - fd_zz(v, x, z, 1e-4) - fbar(0, cut, x, z);
        EXPECT_LE(std::abs(res), 1e-5) << "x=" << x << " z=" << z;
    }
}

TEST(SingularSolution, FbarVanishesOffTheAnnulus)
{
    const Cutoff cut(0.0, 0.0, 0.1, 0.2);
    EXPECT_EQ(fbar(0, cut, 0.01, 0.05), 0.0);
    EXPECT_EQ(fbar(0, cut, 0.3, 0.1), 0.0);
}

TEST(SingularSolution, SecondCornerIsTheMirrorImage)
{
    const Cutoff c0(0.0, 0.0, 0.1, 0.2), c1(1.0, 0.0, 0.1, 0.2);
    for (double dx : {0.01, 0.08, 0.15})
        for (double z : {-0.1, 0.05, 0.12}) {
            EXPECT_NEAR(busing(1, c1, 1 - dx, -z).value, busing(0, c0, dx, z).value, 1e-14);
            EXPECT_NEAR(fbar(1, c1, 1 - dx, -z), fbar(0, c0, dx, z), 1e-10 * std::max(1.0, std::abs(fbar(0, c0, dx, z))));
        }
}
