#include <cmath>
#include <memory>
#include <random>

#include <gtest/gtest.h>

#include "fbp/shear.hpp"
#include "fbp/verify.hpp"

using namespace fbp;

namespace {

const ShearContext& context65()
{
    static const ShearContext ctx(Grid(0, 1, 65, 65));
    return ctx;
}

DataTriplet bump_triplet()
{
    DataTriplet d;
    d.f = Source(std::make_shared<GaussianBump>(1.0, 0.5, 0.1, 0.06, 0.15));
    return d;
}

double gap(const OrthoResult& a, const OrthoResult& b)
{
    return std::max(std::abs(a[0] - b[0]), std::abs(a[1] - b[1]));
}

} // namespace

TEST(Cutoffs, InvalidRadiiAreRejected)
{
    EXPECT_THROW(make_cutoffs(0, 1, 0.2, 0.1), ConfigError);
    EXPECT_THROW(make_cutoffs(0, 1, 0.1, 0.6), ConfigError);
    EXPECT_THROW(make_cutoffs(0, 0.3, 0.1, 0.2), ConfigError);
    const CutoffPair c = make_cutoffs(0, 2, 0.1, 0.2);
    EXPECT_EQ(c[0].center_x, 0.0);
    EXPECT_EQ(c[1].center_x, 2.0);
}

TEST(DeltaCap, QuotientAndLimit)
{
    // f = 0, delta = z^3 (1 - z): Delta = delta''/z = 6 - 12 z
    const Boundary delta = polynomial_boundary({0, 0, 0, 1, -1});
    const std::vector<double> z{0.0, 0.25, 0.5, 1.0};
    const TraceSamples s = delta_cap(Source(), delta, 0, 0.0, z);
    for (std::size_t k = 0; k < z.size(); ++k)
        EXPECT_NEAR(s.value[k], 6 - 12 * z[k], 1e-6) << "z = " << z[k];
}

TEST(DeltaCap, IncompatibleDataThrow)
{
    const Boundary delta = polynomial_boundary({0, 0, 1});   // delta''(0) = 2
    EXPECT_THROW(delta_cap(Source(), delta, 0, 0.0, {0.0, 0.5, 1.0}), IncompatibleDataError);
}

TEST(Compatibility, RandomTripletsAreCompatible)
{
    std::mt19937_64 rng(20261014);
    for (int k = 0; k < 10; ++k)
        EXPECT_TRUE(check_compatibility(random_triplet(rng), 0, 1, 1e-8).compatible);
    DataTriplet bad;
    bad.delta0 = polynomial_boundary({0, 1});
    EXPECT_FALSE(check_compatibility(bad, 0, 1).compatible);
}

TEST(Ortho, ZeroDataAndLinearity)
{
    const ShearContext& ctx = context65();
    const OrthoResult z = ortho_jump(ctx, DataTriplet{}, false);
    EXPECT_EQ(z[0], 0.0);
    EXPECT_EQ(z[1], 0.0);
    std::mt19937_64 rng(1);
    const DataTriplet a = random_triplet(rng), b = random_triplet(rng);
    for (Route r : {Route::jump, Route::dual}) {
        const OrthoResult la = ortho(ctx, a, r, false), lb = ortho(ctx, b, r, false);
        const OrthoResult lc = ortho(ctx, 2.5 * a + b, r, false);
        EXPECT_NEAR(lc[0], 2.5 * la[0] + lb[0], 1e-10) << to_string(r);
        EXPECT_NEAR(lc[1], 2.5 * la[1] + lb[1], 1e-10) << to_string(r);
    }
}

TEST(Ortho, RoutesAgreeOnRandomTriplets)
{
    const ShearContext& ctx = context65();
    std::mt19937_64 rng(20261014);
    for (int k = 0; k < 4; ++k) {
        const DataTriplet d = random_triplet(rng);
        const OrthoResult J = ortho_jump(ctx, d, false), D = ortho_dual(ctx, d, false);
        EXPECT_LE(gap(J, D) / std::max(std::abs(D[0]), std::abs(D[1])), 0.1) << "triplet " << k;
    }
}

TEST(Ortho, ErrorEstimateUsesTheCoarseGrid)
{
    const ShearContext& ctx = context65();
    ASSERT_NE(ctx.coarse(), nullptr);
    const OrthoResult l = ortho_jump(ctx, bump_triplet(), true);
    EXPECT_TRUE(std::isfinite(l.error_estimate));
    EXPECT_GE(l.error_estimate, 0.0);
}

TEST(Mbar, StructureAndInvertibility)
{
    const ShearContext& ctx = context65();
    for (Route r : {Route::dual, Route::jump}) {
        const MbarResult& m = ctx.mbar(r);
        // m [[-1, 1], [1, 1]]
        EXPECT_NEAR(m.m(0, 0), -m.m(0, 1), 1e-8);
        EXPECT_NEAR(m.m(1, 0), m.m(1, 1), 1e-8);
        EXPECT_NEAR(m.m(0, 1), 0.51, 0.03);
        EXPECT_NEAR(m.m(1, 1), 0.51, 0.03);
        EXPECT_LE(m.condition, 1.1);
        EXPECT_LE((m.m * m.inverse - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Mbar, ColumnsAreTheFunctionalsOfFbar)
{
    const ShearContext& ctx = context65();
    const MbarResult& m = ctx.mbar(Route::jump);
    for (int k = 0; k < 2; ++k) {
        const OrthoResult l = ortho_jump(ctx, ctx.fbar_triplet(k), false);
        EXPECT_NEAR(l[0], m.m(0, k), 1e-12);
        EXPECT_NEAR(l[1], m.m(1, k), 1e-12);
    }
}

TEST(Biorthogonal, IdentityToRounding)
{
    const ShearContext& ctx = context65();
    const auto xi = biorthogonal_basis(ctx);
    for (int k = 0; k < 2; ++k) {
        const OrthoResult l = ortho_jump(ctx, xi[k], false);
        for (int j = 0; j < 2; ++j)
            EXPECT_NEAR(l[j], j == k ? 1.0 : 0.0, 1e-8);
    }
}

TEST(Biorthogonal, ProjectionRemovesTheFunctionals)
{
    const ShearContext& ctx = context65();
    std::mt19937_64 rng(4);
    const DataTriplet p = project_orthogonal(ctx, random_triplet(rng));
    const OrthoResult l = ortho_jump(ctx, p, false);
    EXPECT_LE(std::max(std::abs(l[0]), std::abs(l[1])), 1e-10);
}

TEST(Decompose, FbarZeroGivesUnitCoefficient)
{
    const ShearContext& ctx = context65();
    const Decomposition d = decompose(ctx, ctx.fbar_triplet(0));
    EXPECT_NEAR(d.c[0], 1.0, 0.1);
    EXPECT_LE(std::abs(d.c[1]), 0.05);
    EXPECT_TRUE(d.u.grid() == ctx.grid());
    EXPECT_TRUE(d.u_reg.grid() == ctx.grid());
}

TEST(Decompose, RegularPartSolvesTheCorrectedProblem)
{
    const ShearContext& ctx = context65();
    const DataTriplet d = bump_triplet();
    const Decomposition dec = decompose(ctx, d);
    const DataTriplet corrected = d - dec.c[0] * ctx.fbar_triplet(0) - dec.c[1] * ctx.fbar_triplet(1);
    EXPECT_LE(l2_norm(dec.u_reg - solve_shear(ctx, corrected)), 1e-10);
}

TEST(Decompose, CutoffIndependence)
{
    const Grid g(0, 1, 65, 65);
    const ShearContext a(g, make_cutoffs(0, 1, 0.1, 0.2));
    const ShearContext b(g, make_cutoffs(0, 1, 0.1, 0.15));
    const auto ca = decompose(a, bump_triplet()).c, cb = decompose(b, bump_triplet()).c;
    const double scale = std::max(std::abs(ca[0]), std::abs(ca[1]));
    EXPECT_LE(std::max(std::abs(ca[0] - cb[0]), std::abs(ca[1] - cb[1])) / scale, 0.05);
}

TEST(Solve, SolutionMatchesItsBoundaryData)
{
    const ShearContext& ctx = context65();
    const DataTriplet d = nonlinear_probe_triplet(1.0);
    const Field u = solve_shear(ctx, d);
    const Grid& g = ctx.grid();
    for (int j = g.j0() + 1; j < g.nz(); j += 4)
        EXPECT_NEAR(u(0, j), d.delta0.value(g.z(j)), 1e-12);
    for (int j = 0; j < g.j0(); j += 4)
        EXPECT_NEAR(u(g.nx() - 1, j), d.delta1.value(g.z(j)), 1e-12);
    for (int i = 0; i < g.nx(); i += 8) {
        EXPECT_EQ(u(i, 0), 0.0);
        EXPECT_EQ(u(i, g.nz() - 1), 0.0);
    }
}

TEST(Solve, DerivativeProblemMatchesDifferencedSolution)
{
    const ShearContext& ctx = context65();
    const DataTriplet d = bump_triplet();
    const Field w = solve_dx(ctx, d);
    const Field ux = diff_x(solve_shear(ctx, d));
    // compare away from the corners, where both are smooth
    double worst = 0, scale = 0;
    for (int i = 16; i < 49; ++i)
        for (int j = 8; j < 57; ++j) {
            worst = std::max(worst, std::abs(w(i, j) - ux(i, j)));
            scale = std::max(scale, std::abs(w(i, j)));
        }
    EXPECT_LE(worst, 0.1 * scale);
}

TEST(HigherOrder, LevelsAreProducedInOrder)
{
    const ShearContext& ctx = context65();
    // f = 0 and delta_i = z^4 - 2.5 z^6 +- 1.5 z^7, so Delta_i = 12 z - 75 z^3 +- 63 z^4 is
    // reproduced exactly by the sampled stencils and stays compatible at the corners
    DataTriplet d;
    d.delta0 = polynomial_boundary({0, 0, 0, 0, 1, 0, -2.5, 1.5});
    d.delta1 = polynomial_boundary({0, 0, 0, 0, 1, 0, -2.5, -1.5});
    ASSERT_TRUE(check_compatibility(d, 0, 1, 1e-12).compatible);
    const auto levels = higher_order_data(ctx, d, 1, 65);
    ASSERT_EQ(levels.size(), 2u);
    for (int n = 0; n < 2; ++n) {
        EXPECT_EQ(levels[n].n, n);
        EXPECT_EQ(levels[n].delta0.z.size(), 65u);
    }
    for (std::size_t q = 8; q < 65; q += 8) {
        const double z0 = levels[1].delta0.z[q], z1 = levels[1].delta1.z[q];
        EXPECT_NEAR(levels[1].delta0.value[q], 12 * z0 - 75 * std::pow(z0, 3) + 63 * std::pow(z0, 4), 1e-9);
        EXPECT_NEAR(levels[1].delta1.value[q], 12 * z1 - 75 * std::pow(z1, 3) - 63 * std::pow(z1, 4), 1e-9);
    }
    EXPECT_TRUE(std::isfinite(levels[1].ell[0]));
}
