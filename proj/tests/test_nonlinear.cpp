#include <cmath>

#include <gtest/gtest.h>
#include <json.hpp>

#include "fbp/nonlinear.hpp"
#include "fbp/verify.hpp"

using namespace fbp;

namespace {

const ShearContext& context65()
{
    static const ShearContext ctx(Grid(0, 1, 65, 65));
    return ctx;
}

const double probe_scale = 0.01;

double bound(const Grid& g)
{
    return 10 * (g.hx() + g.hz() * g.hz()) * probe_scale;
}

} // namespace

TEST(Initialize, BoundaryDataOnTheirInflowHalves)
{
    const Grid g(0, 1, 65, 65);
    const DataTriplet d = nonlinear_probe_triplet(1.0);
    const Field u = initialize(d, g);
    for (int j = 0; j < g.nz(); j += 4) {
        const double y = g.z(j);
        EXPECT_NEAR(u(0, j), y > 0 ? d.delta0.value(y) : 0.0, 1e-15) << "y = " << y;
        EXPECT_NEAR(u(g.nx() - 1, j), y < 0 ? d.delta1.value(y) : 0.0, 1e-15) << "y = " << y;
        // outside both plateau supports
        EXPECT_EQ(u(32, j), 0.0);
    }
    EXPECT_EQ(initialize(DataTriplet{}, g).values().cwiseAbs().maxCoeff(), 0.0);
}

TEST(Iterate, ZeroDataGiveTheZeroSolution)
{
    const NonlinearResult r = iterate(context65(), DataTriplet{});
    EXPECT_EQ(r.report.status, IterationStatus::converged);
    EXPECT_EQ(r.u.values().cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(r.nu[0], 0.0);
    EXPECT_EQ(r.nu[1], 0.0);
}

TEST(Iterate, ProbeConvergesWithinTheResidualBound)
{
    const ShearContext& ctx = context65();
    const NonlinearResult r = iterate(ctx, nonlinear_probe_triplet(probe_scale));
    ASSERT_EQ(r.report.status, IterationStatus::converged);
    EXPECT_LE(r.report.records.size(), 15u);
    EXPECT_LE(r.report.residual, bound(ctx.grid()));
    EXPECT_NEAR(nonlinear_residual(ctx, r.u_fine, nonlinear_probe_triplet(probe_scale), r.nu), r.report.residual,
                1e-15);
    EXPECT_TRUE(r.u.grid() == ctx.grid());
    EXPECT_TRUE(r.u_fine.grid() == ctx.solve_grid());
    // increments decrease from step to step
    const auto& rec = r.report.records;
    for (std::size_t k = 1; k < rec.size(); ++k)
        EXPECT_LT(rec[k].increment_l2, rec[k - 1].increment_l2);
}

TEST(Iterate, InitializationsAndFrozenVariantAgree)
{
    const ShearContext& ctx = context65();
    const DataTriplet d = nonlinear_probe_triplet(probe_scale);
    const NonlinearResult a = iterate(ctx, d);
    NonlinearOptions zero;
    zero.init = Initialization::zero;
    NonlinearOptions frozen;
    frozen.frozen = true;
    for (const NonlinearOptions& o : {zero, frozen}) {
        const NonlinearResult b = iterate(ctx, d, o);
        ASSERT_EQ(b.report.status, IterationStatus::converged);
        EXPECT_LE(l2_norm(a.u - b.u), 1e-8);
        EXPECT_NEAR(a.nu[0], b.nu[0], 1e-8);
        EXPECT_NEAR(a.nu[1], b.nu[1], 1e-8);
    }
}

TEST(Iterate, AdmissibilityGuards)
{
    const ShearContext& ctx = context65();
    const DataTriplet d = nonlinear_probe_triplet(probe_scale);
    NonlinearOptions o;
    o.eta_bar = 1e-6;
    EXPECT_THROW(iterate(ctx, d, o), InadmissibleError);
    o = {};
    o.first_iterate_bound = 1e-9;
    EXPECT_THROW(iterate(ctx, d, o), InadmissibleError);
    o = {};
    o.n_max = 0;
    EXPECT_THROW(iterate(ctx, d, o), ConfigError);
}

TEST(Manifold, UnconvergedRunThrows)
{
    const ShearContext& ctx = context65();
    const DataTriplet p = project_orthogonal(ctx, nonlinear_probe_triplet(probe_scale));
    NonlinearOptions o;
    o.n_max = 1;
    EXPECT_THROW(manifold_nu(ctx, p, o), DivergenceError);
}

TEST(Manifold, CorrectorIsQuadraticInTheData)
{
    const ShearContext& ctx = context65();
    const DataTriplet p = project_orthogonal(ctx, nonlinear_probe_triplet(probe_scale));
    const auto full = manifold_nu(ctx, p), half = manifold_nu(ctx, 0.5 * p);
    for (int k = 0; k < 2; ++k) {
        ASSERT_NE(full[k], 0.0);
        const double q = half[k] / full[k];
        EXPECT_GE(q, 0.125) << "component " << k;
        EXPECT_LE(q, 0.5) << "component " << k;
    }
}

TEST(Report, JsonCarriesEveryField)
{
    const NonlinearResult r = iterate(context65(), nonlinear_probe_triplet(probe_scale));
    const auto j = nlohmann::json::parse(to_json(r.report));
    EXPECT_EQ(j.at("status"), "converged");
    EXPECT_EQ(j.at("iterations"), r.report.records.size());
    EXPECT_EQ(j.at("residual").get<double>(), r.report.residual);
    EXPECT_TRUE(j.contains("contraction"));
    ASSERT_EQ(j.at("records").size(), r.report.records.size());
    for (const char* key : {"n", "increment_l2", "increment_h1", "nu", "ell", "condition"})
        EXPECT_TRUE(j.at("records")[0].contains(key)) << key;
    EXPECT_EQ(j.at("records").back().at("nu")[1].get<double>(), r.nu[1]);
}
