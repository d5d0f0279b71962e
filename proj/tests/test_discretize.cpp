#include <cmath>
#include <cstdio>
#include <filesystem>

#include <gtest/gtest.h>

#include "fbp/data.hpp"
#include "fbp/discretize.hpp"
#include "fbp/shear.hpp"
#include "fbp/verify.hpp"

using namespace fbp;

namespace {

Field constant(const Grid& g, double c)
{
    return Field::sample(g, [c](double, double) { return c; });
}

double coefficient(const SparseOperator& op, int row, int col)
{
    return op.matrix.coeff(row, col);
}

} // namespace

TEST(Grid, RejectsEvenOrSmallSizes)
{
    EXPECT_THROW(Grid(0, 1, 64, 65), ConfigError);
    EXPECT_THROW(Grid(0, 1, 65, 31), ConfigError);
    EXPECT_THROW(Grid(1, 0, 65, 65), ConfigError);
}

TEST(Grid, NodesAndCriticalLine)
{
    const Grid g(0.5, 2.5, 65, 33);
    EXPECT_EQ(g.j0(), 16);
    EXPECT_EQ(g.z(g.j0()), 0.0);
    EXPECT_EQ(g.z(0), -1.0);
    EXPECT_EQ(g.z(32), 1.0);
    EXPECT_EQ(g.x(64), 2.5);
    EXPECT_DOUBLE_EQ(g.hx(), 2.0 / 64);
    EXPECT_DOUBLE_EQ(g.hz(), 1.0 / 16);
}

TEST(Grid, CoarseningAndRefinementEmbed)
{
    const Grid g(0, 1, 129, 65);
    const Grid c = g.coarsened();
    EXPECT_EQ(c.nx(), 65);
    EXPECT_EQ(c.nz(), 33);
    const Grid r = g.corner_refined();
    EXPECT_FALSE(r.uniform_x());
    EXPECT_GT(r.nx(), g.nx());
    const std::vector<int> e = r.embedding(g);
    ASSERT_EQ(int(e.size()), g.nx());
    for (int i = 0; i < g.nx(); ++i)
        EXPECT_EQ(r.x(e[i]), g.x(i));
    EXPECT_NEAR(r.dx(0), 1e-6, 1e-12);
    EXPECT_THROW(g.embedding(Grid(0, 1, 65, 33)), DomainError);
}

TEST(Field, RestrictAndResample)
{
    const Grid g(0, 1, 65, 65);
    const Grid r = g.corner_refined();
    const auto f = [](double x, double z) { return 1 + 2 * x - z + x * z; };
    const Field u = Field::sample(r, f);
    const Field v = restrict_to(u, g);
    EXPECT_EQ((v.values() - Field::sample(g, f).values()).cwiseAbs().maxCoeff(), 0.0);
    const Field w = resample(Field::sample(g, f), r);
    EXPECT_LE((w.values() - u.values()).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_NEAR(interpolate(Field::sample(g, f), 0.31, -0.27), f(0.31, -0.27), 1e-13);
}

TEST(Assemble, UpwindDirectionFollowsTheSignOfZ)
{
    const Grid g(0, 1, 33, 33);
    const SparseOperator op = shear_operator(g);
    const int i = 10;
    const int jp = g.j0() + 4, jm = g.j0() - 4;
    const int rp = g.index(i, jp), rm = g.index(i, jm);
    EXPECT_EQ(op.tags[rp], RowTag::interior);
    EXPECT_LT(coefficient(op, rp, g.index(i - 1, jp)), 0.0);
    EXPECT_EQ(coefficient(op, rp, g.index(i + 1, jp)), 0.0);
    EXPECT_LT(coefficient(op, rm, g.index(i + 1, jm)), 0.0);
    EXPECT_EQ(coefficient(op, rm, g.index(i - 1, jm)), 0.0);
    // on z = 0 the transport vanishes
    const int r0 = g.index(i, g.j0());
    EXPECT_EQ(op.tags[r0], RowTag::degenerate_z0);
    EXPECT_EQ(coefficient(op, r0, g.index(i - 1, g.j0())), 0.0);
    EXPECT_EQ(coefficient(op, r0, g.index(i + 1, g.j0())), 0.0);
}

TEST(Assemble, FicheraSplittingOfTheBoundary)
{
    const Grid g(0, 1, 33, 33);
    const SparseOperator op = shear_operator(g);
    EXPECT_EQ(op.tags[g.index(5, 0)], RowTag::dirichlet_bottom);
    EXPECT_EQ(op.tags[g.index(5, 32)], RowTag::dirichlet_top);
    EXPECT_EQ(op.tags[g.index(0, 25)], RowTag::inflow_sigma0);
    EXPECT_EQ(op.tags[g.index(0, 5)], RowTag::outflow);
    EXPECT_EQ(op.tags[g.index(32, 5)], RowTag::inflow_sigma1);
    EXPECT_EQ(op.tags[g.index(32, 25)], RowTag::outflow);
    const SparseOperator rev = shear_operator(g, Direction::reversed);
    EXPECT_TRUE(is_dirichlet(rev.tags[g.index(0, 5)]));
    EXPECT_FALSE(is_dirichlet(rev.tags[g.index(0, 25)]));
}

TEST(Assemble, MultipleSignChangesAreRejected)
{
    const Grid g(0, 1, 33, 33);
    const Field a = Field::sample(g, [](double, double z) { return std::sin(6 * z); });
    EXPECT_THROW(assemble(g, a, Field(g), Field(g), constant(g, 1)), SignStructureError);
}

TEST(Assemble, ViscousTermCouplesBothNeighbours)
{
    const Grid g(0, 1, 33, 33);
    const Field a = Field::sample(g, [](double, double z) { return z; });
    const SparseOperator op = assemble(g, a, Field(g), Field(g), constant(g, 1), 1e-2);
    const int i = 10, j = g.j0() + 4;
    EXPECT_LT(coefficient(op, g.index(i, j), g.index(i - 1, j)), 0.0);
    EXPECT_NE(coefficient(op, g.index(i, j), g.index(i + 1, j)), 0.0);
}

TEST(Solve, ResidualWithinTolerance)
{
    const Grid g(0, 1, 65, 65);
    const SparseOperator op = shear_operator(g);
    const FactoredOperator f(op);
    const Field rhs = Field::sample(g, [](double x, double z) { return std::cos(3 * x) * z * (1 - z * z); });
    const Field u = f.solve(rhs, BoundaryValues(g));
    EXPECT_LE(f.last_residual(), 1e-10);
    EXPECT_GT(l2_norm(u), 0.0);
}

TEST(Solve, ZeroDataGivesZero)
{
    const Grid g(0, 1, 33, 33);
    const Field u = solve(shear_operator(g), Field(g), BoundaryValues(g));
    EXPECT_EQ(u.values().cwiseAbs().maxCoeff(), 0.0);
}

TEST(Solve, ManufacturedSolutionConvergesAtFirstOrder)
{
    const double e33 = manufactured_error(Grid(0, 1, 33, 33));
    const double e65 = manufactured_error(Grid(0, 1, 65, 65));
    EXPECT_GE(e33 / e65, 1.7);
    EXPECT_LE(e65, 0.05);
}

TEST(Operators, DifferencesAreExactForQuadratics)
{
    const Grid g(0, 2, 33, 33);
    const Field u = Field::sample(g, [](double x, double z) { return x * x + 3 * x * z + z * z; });
    const Field ux = diff_x(u), uz = diff_z(u), uzz = diff_zz(u);
    for (int i = 0; i < g.nx(); i += 4)
        for (int j = 0; j < g.nz(); j += 4) {
            EXPECT_NEAR(ux(i, j), 2 * g.x(i) + 3 * g.z(j), 1e-11);
            EXPECT_NEAR(uz(i, j), 3 * g.x(i) + 2 * g.z(j), 1e-11);
            EXPECT_NEAR(uzz(i, j), 2.0, 1e-9);
        }
}

TEST(Norms, ConstantField)
{
    const Grid g(0, 2, 33, 33);
    const Field one = constant(g, 1);
    EXPECT_NEAR(integrate(one), 4.0, 1e-14);
    EXPECT_NEAR(l2_norm(one), 2.0, 1e-14);
    EXPECT_NEAR(mixed_derivative_norm(one), 0.0, 1e-14);
    const NormRecord n = norms(Field(g));
    EXPECT_EQ(n.l2, 0.0);
    EXPECT_EQ(n.h1x_h1z, 0.0);
    EXPECT_EQ(n.z0, 0.0);
}

TEST(Norms, CornerLocalMixedNorm)
{
    const Grid g(0, 1, 65, 65);
    const Field u = Field::sample(g, [](double x, double z) { return x * z; });
    // d_x d_z u = 1; the nodes within 0.1 of the corners cover about pi/100 of the area
    const double local = mixed_derivative_norm_near_corners(u, 0.1);
    EXPECT_NEAR(local * local, std::acos(-1.0) * 0.01, 4e-3);
    EXPECT_NEAR(mixed_derivative_norm_near_corners(u, 10.0), mixed_derivative_norm(u), 1e-12);
}

TEST(Norms, Traces)
{
    const Grid g(0, 1, 33, 33);
    const Field u = Field::sample(g, [](double x, double z) { return (1 + x) * z; });
    const std::vector<double> t0 = trace(u, Edge::x0, 0), t1 = trace(u, Edge::x1, 1), tz = trace(u, Edge::z0, 1);
    EXPECT_NEAR(t0[g.nz() - 1], 1.0, 1e-15);
    EXPECT_NEAR(t1[g.nz() - 1], 1.0, 1e-12);
    EXPECT_NEAR(tz[5], 1 + g.x(5), 1e-12);
}

TEST(Csv, RoundTripIsBitStable)
{
    const Grid g(0, 1, 33, 33);
    const Field u = Field::sample(g, [](double x, double z) { return std::exp(x) * std::sin(7 * z) / 3; });
    const std::string a = to_csv(u);
    EXPECT_EQ(a.rfind("x,z,value\n", 0), 0u);
    const Field v = parse_csv(a);
    EXPECT_TRUE(v.grid() == g);
    EXPECT_EQ((u.values() - v.values()).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(to_csv(v), a);

    const std::string path = (std::filesystem::temp_directory_path() / "fbp_csv_roundtrip.csv").string();
    write_csv(u, path);
    EXPECT_EQ(to_csv(read_csv(path)), a);
    std::remove(path.c_str());
}

TEST(Csv, MalformedInputThrows)
{
    EXPECT_THROW(parse_csv("a,b,c\n0,0,1\n"), ConfigError);
    EXPECT_THROW(parse_csv("x,z,value\n0,0,zz\n"), ConfigError);
    EXPECT_THROW(read_csv("/nonexistent/field.csv"), ConfigError);
}

TEST(Csv, FormatDoubleRoundTrips)
{
    for (double v : {0.1, 1.0 / 3, -2.5e-300, 6.02214076e23, 0.0})
        EXPECT_EQ(std::stod(format_double(v)), v);
    EXPECT_EQ(format_double(-7), "-7");
}
