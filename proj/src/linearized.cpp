#include "fbp/linearized.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include <boost/math/tools/toms748_solve.hpp>

namespace fbp {

// ---------------------------------------------------------------- interpolation

// cubic through the nodes k-1 .. k+2 of cell k (shifted inwards at the walls)
static double cubic_in_cell(const Field& u, int i, int k, double y)
{
    const Grid& g = u.grid();
    const int s = std::clamp(k - 1, 0, g.nz() - 4);
    const double t = (y - g.z(s)) / g.hz();
    const double l0 = -(t - 1) * (t - 2) * (t - 3) / 6;
    const double l1 = t * (t - 2) * (t - 3) / 2;
    const double l2 = -t * (t - 1) * (t - 3) / 2;
    const double l3 = t * (t - 1) * (t - 2) / 6;
    return l0 * u(i, s) + l1 * u(i, s + 1) + l2 * u(i, s + 2) + l3 * u(i, s + 3);
}

static int cell_z(const Grid& g, double y)
{
    return std::clamp(int(std::floor((y + 1) / g.hz())), 0, g.nz() - 2);
}

double column_cubic(const Field& u, int i, double y)
{
    const Grid& g = u.grid();
    const int k = cell_z(g, y);
    // exact node values on the gridlines
    if (y == g.z(k))
        return u(i, k);
    if (y == g.z(k + 1))
        return u(i, k + 1);
    return cubic_in_cell(u, i, k, y);
}

static double column_linear(const Field& u, int i, double y)
{
    const Grid& g = u.grid();
    const int k = cell_z(g, y);
    const double t = std::clamp((y - g.z(k)) / g.hz(), 0.0, 1.0);
    return (1 - t) * u(i, k) + t * u(i, k + 1);
}

// root of cubic_in_cell(u, i, k, .) = level on [z_k, z_{k+1}]
static double cell_root(const Field& u, int i, int k, double level)
{
    const Grid& g = u.grid();
    const double a = g.z(k), b = g.z(k + 1);
    const double fa = u(i, k) - level, fb = u(i, k + 1) - level;
    if (fa == 0)
        return a;
    if (fb == 0)
        return b;
    auto f = [&](double y) { return cubic_in_cell(u, i, k, y) - level; };
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(
        f, a, b, fa, fb, [](double lo, double hi) { return std::abs(hi - lo) <= 1e-12; }, iters);
    return 0.5 * (r.first + r.second);
}

// ---------------------------------------------------------------- flow

std::vector<double> critical_curve(const Field& ubar)
{
    const Grid& g = ubar.grid();
    std::vector<double> out(g.nx());
    for (int i = 0; i < g.nx(); ++i) {
        int k = -1;
        for (int j = 0; j + 1 < g.nz(); ++j)
            if (ubar(i, j) <= 0 && ubar(i, j + 1) > 0) {
                k = j;
                break;
            }
        if (k < 0)
            throw InadmissibleError("critical_curve: flow does not change sign in column " + std::to_string(i));
        out[i] = cell_root(ubar, i, k, 0.0);
    }
    return out;
}

FlowProfile::FlowProfile(Field ubar) : u_(std::move(ubar))
{
    const Grid& g = u_.grid();
    uy_ = diff_z(u_);
    ux_ = diff_x(u_);
    uyy_ = diff_zz(u_);
    const double uy_min = uy_.values().minCoeff();
    if (!(uy_min >= 0.5))
        throw InadmissibleError("flow: d_y ubar drops to " + format_double(uy_min) + " below 1/2");
    for (int i = 0; i < g.nx(); ++i)
        if (!(std::abs(u_(i, 0) + 1) <= 1e-10 && std::abs(u_(i, g.nz() - 1) - 1) <= 1e-10))
            throw InadmissibleError("flow: ubar(x, +-1) != +-1 at x = " + format_double(g.x(i)));
    ybar_ = critical_curve(u_);
    for (int i = 0; i < g.nx(); ++i)
        if (!(std::abs(ybar_[i]) < 0.25))
            throw InadmissibleError("flow: critical curve leaves |y| < 1/4 at x = " + format_double(g.x(i)));
    Field dev = u_;
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 0; j < g.nz(); ++j)
            dev(i, j) -= g.z(j);
    smallness_ = norms(dev).h1x_h1z;
}

FlowProfile FlowProfile::shear(const Grid& g)
{
    return FlowProfile(Field::sample(g, [](double, double y) { return y; }));
}

FlowProfile FlowProfile::sample(const Grid& g, const std::function<double(double, double)>& ubar)
{
    return FlowProfile(Field::sample(g, ubar));
}

double flow_distance(const FlowProfile& a, const FlowProfile& b)
{
    if (!(a.grid() == b.grid()))
        throw DomainError("flow_distance: flows live on different grids");
    return norms(a.u() - b.u()).h1x_h1z;
}

Field change_of_variables(const FlowProfile& flow)
{
    const Field& u = flow.u();
    const Grid& g = u.grid();
    Field Y(g);
    for (int i = 0; i < g.nx(); ++i) {
        Y(i, 0) = -1;
        Y(i, g.nz() - 1) = 1;
        int k = 0;
        for (int j = 1; j + 1 < g.nz(); ++j) {
            const double z = g.z(j);
            while (k + 1 < g.nz() - 1 && u(i, k + 1) < z)
                ++k;
            if (!(u(i, k) <= z && z <= u(i, k + 1)))
                throw ConvergenceError("change_of_variables: cannot bracket ubar = " + format_double(z)
                                       + " in column " + std::to_string(i));
            Y(i, j) = cell_root(u, i, k, z);
        }
    }
    return Y;
}

Coefficients coefficients(const FlowProfile& flow, const Field& Y)
{
    const Grid& g = flow.grid();
    if (!(Y.grid() == g))
        throw DomainError("coefficients: Y lives on another grid");
    Coefficients c{Field(g), Field(g), Field(g), Field(g)};
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 0; j < g.nz(); ++j) {
            const double y = Y(i, j);
            const double uy = column_linear(flow.uy(), i, y);
            c.alpha(i, j) = uy * uy;
            c.gamma1(i, j) = column_linear(flow.ux(), i, y);
            c.gamma2(i, j) = -column_linear(flow.uyy(), i, y);
            c.gamma(i, j) = g.z(j) * c.gamma1(i, j) + c.gamma2(i, j);
        }
    return c;
}

// ---------------------------------------------------------------- context

static FlowProfile on_grid(const FlowProfile& flow, const Grid& g)
{
    if (flow.grid() == g)
        return flow;
    return FlowProfile(resample(flow.u(), g));
}

LinearizedContext::LinearizedContext(const ShearContext& shear, const FlowProfile& flow)
    : shear_(shear), flow_(on_grid(flow, shear.solve_grid()))
{
}

const FactoredOperator& LinearizedContext::forward() const
{
    std::call_once(forward_once_, [&] {
        const Grid& g = flow_.grid();
        const Field zero(g);
        const Field one = Field::sample(g, [](double, double) { return 1.0; });
        forward_ = std::make_unique<FactoredOperator>(
            assemble(g, flow_.u(), zero, zero, one, 0.0, Direction::forward, shear_.stencil()), shear_.solver());
    });
    return *forward_;
}

const FactoredOperator& LinearizedContext::dx_operator() const
{
    std::call_once(dx_once_, [&] {
        const Grid& g = flow_.grid();
        const Field zero(g);
        const Field one = Field::sample(g, [](double, double) { return 1.0; });
        dx_ = std::make_unique<FactoredOperator>(
            assemble(g, flow_.u(), zero, flow_.ux(), one, 0.0, Direction::forward, shear_.stencil()), shear_.solver());
    });
    return *dx_;
}

// ---------------------------------------------------------------- solves

Field solve_linearized_fine(const LinearizedContext& lc, const DataTriplet& d)
{
    const Grid& g = lc.flow().grid();
    return lc.forward().solve(lc.shear().load(d.f, 0), inflow_values(g, d.delta0, d.delta1));
}

Field solve_linearized(const LinearizedContext& lc, const DataTriplet& d)
{
    return restrict_to(solve_linearized_fine(lc, d), lc.shear().grid());
}

Field solve_linearized(const FlowProfile& flow, const DataTriplet& d, const Grid& g)
{
    const ShearContext ctx(g);
    const LinearizedContext lc(ctx, flow);
    return solve_linearized(lc, d);
}

// delta_0 extended by 0 to y < 0, delta_1 by 0 to y > 0
static double boundary_deriv(const DataTriplet& d, int i, int n, double y)
{
    if (i == 0)
        return y >= 0 ? d.delta0.deriv(n, y) : 0.0;
    return y <= 0 ? d.delta1.deriv(n, y) : 0.0;
}

// inflow data of the d_x u problem on {x_i} x (-1, 1)
static void dx_inflow(const LinearizedContext& lc, const DataTriplet& d, int i, BoundaryValues& bc)
{
    const FlowProfile& flow = lc.flow();
    const Grid& g = flow.grid();
    const int col = i == 0 ? 0 : g.nx() - 1;
    const double xi = g.x(col);
    auto N = [&](double y) { return d.f.value(xi, y) + boundary_deriv(d, i, 2, y); };
    double scale = 1;
    for (int j = 0; j < g.nz(); ++j)
        scale = std::max(scale, std::abs(N(g.z(j))));
    const double n0 = N(0.0);
    if (std::abs(n0) > 1e-8 * scale)
        throw IncompatibleDataError("solve_dx_linearized: f(x_i, 0) + delta_i''(0) = " + format_double(n0)
                                    + " does not vanish");
    // towards the inflow side ubar > 0 at x0 and ubar < 0 at x1
    const double sgn = i == 0 ? 1.0 : -1.0;
    std::vector<double>& out = i == 0 ? bc.left : bc.right;
    for (int j = 1; j + 1 < g.nz(); ++j) {
        const double y = g.z(j);
        const double a = flow.u()(col, j);
        if (!(sgn * a > 0))
            continue;
        if (std::abs(a) > 1e-8) {
            out[j] = N(y) / a;
        } else {
            const double yb = flow.critical()[col];
            const double h = 1e-3;
            const double dn = sgn * (-11 * N(yb) + 18 * N(yb + sgn * h) - 9 * N(yb + 2 * sgn * h)
                                     + 2 * N(yb + 3 * sgn * h)) / (6 * h);
            out[j] = dn / column_cubic(flow.uy(), col, yb);
        }
    }
}

Field solve_dx_linearized_fine(const LinearizedContext& lc, const DataTriplet& d)
{
    const Grid& g = lc.flow().grid();
    BoundaryValues bc(g);
    dx_inflow(lc, d, 0, bc);
    dx_inflow(lc, d, 1, bc);
    return lc.dx_operator().solve(lc.shear().load(d.f, 1), bc);
}

Field solve_dx_linearized(const LinearizedContext& lc, const DataTriplet& d)
{
    return restrict_to(solve_dx_linearized_fine(lc, d), lc.shear().grid());
}

Field solve_dx_linearized(const FlowProfile& flow, const DataTriplet& d, const Grid& g)
{
    const ShearContext ctx(g);
    const LinearizedContext lc(ctx, flow);
    return solve_dx_linearized(lc, d);
}

// ---------------------------------------------------------------- functionals

OrthoResult ortho_linearized(const LinearizedContext& lc, const DataTriplet& d, CurveSampling sampling)
{
    const FlowProfile& flow = lc.flow();
    const Grid& g = flow.grid();
    const int nx = g.nx(), j0 = g.j0();
    const double hz = g.hz();
    const Field w = solve_dx_linearized_fine(lc, d);
    const std::vector<double>& yb = flow.critical();
    std::array<std::vector<double>, 2> integrand{std::vector<double>(nx), std::vector<double>(nx)};
    std::array<double, 2> b{};

    if (sampling == CurveSampling::curve) {
        const Field wy = diff_z(w);
        for (int i = 0; i < nx; ++i) {
            integrand[0][i] = column_cubic(w, i, yb[i]);
            integrand[1][i] = column_cubic(wy, i, yb[i]) / column_cubic(flow.uy(), i, yb[i]);
        }
        for (int s = 0; s < 2; ++s) {
            const int col = s == 0 ? 0 : nx - 1;
            const double sign = s == 0 ? 1.0 : -1.0;
            const double y = yb[col];
            b[0] += sign * boundary_deriv(d, s, 0, y);
            b[1] += sign * boundary_deriv(d, s, 1, y) / column_cubic(flow.uy(), col, y);
        }
    } else {
        const Field Y = change_of_variables(flow);
        for (int i = 0; i < nx; ++i) {
            const double wm = column_cubic(w, i, Y(i, j0 - 1));
            const double wp = column_cubic(w, i, Y(i, j0 + 1));
            integrand[0][i] = column_cubic(w, i, Y(i, j0));
            integrand[1][i] = (wp - wm) / (2 * hz);
        }
        for (int s = 0; s < 2; ++s) {
            const int col = s == 0 ? 0 : nx - 1;
            const double sign = s == 0 ? 1.0 : -1.0;
            b[0] += sign * boundary_deriv(d, s, 0, Y(col, j0));
            b[1] += sign * (boundary_deriv(d, s, 0, Y(col, j0 + 1)) - boundary_deriv(d, s, 0, Y(col, j0 - 1)))
                / (2 * hz);
        }
    }

    const std::vector<double> xs = g.x_nodes();
    OrthoResult r;
    r.route = Route::jump;
    for (int j = 0; j < 2; ++j)
        r.ell[j] = b[j] + trapezoid(integrand[j], xs);
    return r;
}

OrthoResult ortho_linearized(const FlowProfile& flow, const DataTriplet& d, const Grid& g)
{
    const ShearContext ctx(g);
    const LinearizedContext lc(ctx, flow);
    return ortho_linearized(lc, d);
}

} // namespace fbp
