#include "fbp/shear.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>
#include <Eigen/SVD>

namespace fbp {

CutoffPair make_cutoffs(double x0, double x1, double r_inner, double r_outer)
{
    if (!(r_outer < 0.5 * std::min(1.0, x1 - x0)))
        throw ConfigError("cutoff: outer radius must be below min(1, x1 - x0)/2");
    return {{Cutoff(x0, 0.0, r_inner, r_outer), Cutoff(x1, 0.0, r_inner, r_outer)}};
}

const char* to_string(Route r) { return r == Route::jump ? "jump" : "dual"; }

// ---------------------------------------------------------------- Delta_i

TraceSamples delta_cap(const Source& f, const Boundary& delta, int i, double x_i,
                       const std::vector<double>& z)
{
    auto N = [&](double s) { return f.value(x_i, s) + delta.deriv(2, s); };
    TraceSamples out;
    out.z = z;
    out.value.resize(z.size());
    double scale = 1;
    for (double s : z)
        scale = std::max(scale, std::abs(N(s)));
    const double sgn = i == 0 ? 1.0 : -1.0;
    const double h = 1e-3;
    const double n0 = N(0);
    if (std::abs(n0) > 1e-8 * scale)
        throw IncompatibleDataError("delta_cap: f(x_i, 0) + delta_i''(0) = " + std::to_string(n0)
                                    + " does not vanish");
    // quartic extrapolation of the quotient from z = h, ..., 5h towards Sigma_i
    const double w[5] = {5, -10, 10, -5, 1};
    double limit = 0;
    for (int k = 1; k <= 5; ++k)
        limit += w[k - 1] * N(sgn * k * h) / (sgn * k * h);
    for (std::size_t q = 0; q < z.size(); ++q)
        out.value[q] = z[q] == 0 ? limit : N(z[q]) / z[q];
    return out;
}

static std::vector<double> sigma_nodes(const Grid& g, int i)
{
    std::vector<double> z;
    if (i == 0)
        for (int j = g.j0(); j < g.nz(); ++j)
            z.push_back(g.z(j));
    else
        for (int j = 0; j <= g.j0(); ++j)
            z.push_back(g.z(j));
    return z;
}

TraceSamples delta_cap(const DataTriplet& d, int i, const Grid& g)
{
    return delta_cap(d.f, i == 0 ? d.delta0 : d.delta1, i, i == 0 ? g.x0() : g.x1(), sigma_nodes(g, i));
}

// ---------------------------------------------------------------- duals

Jet1<double> lift_profile(double z) { return plateau(z); }

std::vector<double> DualProfiles::upper(int j) const
{
    const Grid& g = grid;
    std::vector<double> v(g.nx());
    for (int i = 0; i < g.nx(); ++i)
        v[i] = psi[j](i, g.j0()) + (j == 1 ? 1.0 : 0.0);
    return v;
}

std::vector<double> DualProfiles::lower(int j) const
{
    const Grid& g = grid;
    std::vector<double> v(g.nx());
    for (int i = 0; i < g.nx(); ++i)
        v[i] = psi[j](i, g.j0());
    return v;
}

std::vector<double> DualProfiles::jump(int j, int order) const
{
    const Grid& g = grid;
    const int j0 = g.j0();
    const double h = g.hz();
    const auto up = upper(j), lo = lower(j);
    std::vector<double> out(g.nx());
    for (int i = 0; i < g.nx(); ++i) {
        const Field& p = phi[j];
        if (order == 0) {
            const double a = 3 * p(i, j0 + 1) - 3 * p(i, j0 + 2) + p(i, j0 + 3);
            const double b = 3 * p(i, j0 - 1) - 3 * p(i, j0 - 2) + p(i, j0 - 3);
            out[i] = a - b;
        } else {
            const double a = (-3 * up[i] + 4 * p(i, j0 + 1) - p(i, j0 + 2)) / (2 * h);
            const double b = (3 * lo[i] - 4 * p(i, j0 - 1) + p(i, j0 - 2)) / (2 * h);
            out[i] = a - b;
        }
    }
    return out;
}

DualProfiles dual_profiles(const FactoredOperator& reversed)
{
    if (reversed.op().direction != Direction::reversed)
        throw DomainError("dual_profiles: operator must be assembled in reversed direction");
    const SparseOperator& op = reversed.op();
    const Grid& g = op.grid;
    DualProfiles out;
    out.grid = g;
    for (int j = 0; j < 2; ++j) {
        // smooth extension of the lift over the whole grid
        auto lift = [j](double z) { return j == 0 ? -z * lift_profile(z).v : lift_profile(z).v; };
        Eigen::VectorXd ext(g.size());
        for (int i = 0; i < g.nx(); ++i)
            for (int q = 0; q < g.nz(); ++q)
                ext[g.index(i, q)] = lift(g.z(q));
        const Eigen::VectorXd residual = op.matrix * ext;
        Field rhs(g);
        BoundaryValues bc(g);
        for (int q = g.j0() + 1; q < g.nz() - 1; ++q) {
            bc.right[q] = -lift(g.z(q));
            for (int i = 0; i < g.nx(); ++i) {
                const int r = g.index(i, q);
                if (!is_dirichlet(op.tags[r]))
                    rhs(i, q) = -residual[r];
            }
        }
        out.psi[j] = reversed.solve(rhs, bc);
        out.phi[j] = out.psi[j];
        for (int q = g.j0(); q < g.nz(); ++q) {
            const double z = g.z(q);
            const double lv = z == 0 ? (j == 1 ? 0.5 : 0.0) : lift(z);
            for (int i = 0; i < g.nx(); ++i)
                out.phi[j](i, q) += lv;
        }
    }
    return out;
}

DualProfiles dual_profiles(const Grid& g)
{
    FactoredOperator rev(shear_operator(g, Direction::reversed));
    return dual_profiles(rev);
}

// ---------------------------------------------------------------- context

SparseOperator shear_operator(const Grid& g, Direction direction, DiffusionStencil stencil)
{
    const Field a = Field::sample(g, [](double, double z) { return z; });
    const Field zero(g);
    const Field one = Field::sample(g, [](double, double) { return 1.0; });
    return assemble(g, a, zero, zero, one, 0.0, direction, stencil);
}

ShearContext::ShearContext(const Grid& g, std::optional<CutoffPair> cutoffs, DiffusionStencil stencil,
                           SolverOptions solver)
    : grid_(g),
      solve_grid_(g.corner_refined()),
      cutoffs_(cutoffs ? *cutoffs : make_cutoffs(g.x0(), g.x1())),
      stencil_(stencil),
      solver_(solver),
      forward_(shear_operator(solve_grid_, Direction::forward, stencil), solver),
      reversed_(shear_operator(solve_grid_, Direction::reversed, stencil), solver),
      duals_(dual_profiles(reversed_))
{
    for (int i = 0; i < 2; ++i) {
        fbar_[i].f = Source(std::make_shared<FbarSource>(i, cutoffs_[i]));
        busing_[i] = Field::sample(g, [&](double x, double z) { return busing(i, cutoffs_[i], x, z).value; });
    }
}

const MbarResult& ShearContext::mbar(Route route) const
{
    const int k = route == Route::jump ? 0 : 1;
    std::call_once(mbar_once_[k], [&] { mbar_[k] = fbp::mbar(*this, route); });
    return *mbar_[k];
}

const Field& ShearContext::singular_solution_field(int i) const
{
    std::call_once(sing_once_[i], [&] { sing_[i] = solve_shear(*this, fbar_[i]); });
    return sing_[i];
}

const ShearContext* ShearContext::coarse() const
{
    if (!grid_.can_coarsen())
        return nullptr;
    std::call_once(coarse_once_,
                   [&] { coarse_ = std::make_unique<ShearContext>(grid_.coarsened(), cutoffs_, stencil_, solver_); });
    return coarse_.get();
}

ShearContext::CachedTerm& ShearContext::cached(const std::shared_ptr<const SourceTerm>& t) const
{
    for (CachedTerm& c : cache_)
        if (c.term == t)
            return c;
    if (cache_.size() >= 32)
        cache_.erase(cache_.begin());
    cache_.push_back({t, {}, {}});
    return cache_.back();
}

static std::array<double, 2> term_lift_moments(const SourceTerm& t, const Grid& g)
{
    Box box = t.support();
    box.z_lo = std::max(box.z_lo, 0.0);
    box.z_hi = std::min(box.z_hi, 0.5);
    std::array<double, 2> m{};
    for_each_gauss_point(g, box, t.resolution(), [&](int, int, double, double, double x, double z, double w) {
        if (z <= 0)
            return;
        const double ze = lift_profile(z).v;
        if (ze == 0)
            return;
        const double v = t.dx(1, x, z, g.x0(), g.x1()) * w;
        m[0] -= v * z * ze;
        m[1] += v * ze;
    });
    return m;
}

Field ShearContext::load(const Source& f, int n) const
{
    if (n != 0 && n != 1)
        return fbp::load(f, solve_grid_, n);
    Field out(solve_grid_);
    for (const auto& [c, t] : f.terms()) {
        std::unique_lock lock(cache_mutex_);
        CachedTerm& e = cached(t);
        if (!e.load[n]) {
            lock.unlock();
            Field l = fbp::load(*t, solve_grid_, n);
            lock.lock();
            CachedTerm& e2 = cached(t);
            if (!e2.load[n])
                e2.load[n] = std::move(l);
            out += c * *e2.load[n];
        } else {
            out += c * *e.load[n];
        }
    }
    return out;
}

std::array<double, 2> ShearContext::lift_moments(const Source& f) const
{
    std::array<double, 2> out{};
    for (const auto& [c, t] : f.terms()) {
        std::unique_lock lock(cache_mutex_);
        CachedTerm& e = cached(t);
        if (!e.lift) {
            lock.unlock();
            const auto m = term_lift_moments(*t, solve_grid_);
            lock.lock();
            cached(t).lift = m;
        }
        const auto m = *cached(t).lift;
        out[0] += c * m[0];
        out[1] += c * m[1];
    }
    return out;
}

// ---------------------------------------------------------------- solves

BoundaryValues inflow_values(const Grid& g, const Boundary& delta0, const Boundary& delta1)
{
    BoundaryValues bc(g);
    for (int j = 0; j < g.nz(); ++j) {
        const double z = g.z(j);
        if (z >= 0 && !delta0.empty())
            bc.left[j] = delta0.value(z);
        if (z <= 0 && !delta1.empty())
            bc.right[j] = delta1.value(z);
    }
    return bc;
}

BoundaryValues inflow_values(const Grid& g, const TraceSamples& s0, const TraceSamples& s1)
{
    BoundaryValues bc(g);
    const int j0 = g.j0();
    if (int(s0.value.size()) != g.nz() - j0 || int(s1.value.size()) != j0 + 1)
        throw DomainError("inflow_values: samples do not match the grid");
    for (int q = 0; q < int(s0.value.size()); ++q)
        bc.left[j0 + q] = s0.value[q];
    for (int q = 0; q < int(s1.value.size()); ++q)
        bc.right[q] = s1.value[q];
    return bc;
}

Field solve_shear_fine(const ShearContext& ctx, const DataTriplet& d)
{
    const Grid& g = ctx.solve_grid();
    return ctx.forward().solve(ctx.load(d.f, 0), inflow_values(g, d.delta0, d.delta1));
}

Field solve_shear(const ShearContext& ctx, const DataTriplet& d)
{
    return restrict_to(solve_shear_fine(ctx, d), ctx.grid());
}

Field solve_shear(const DataTriplet& d, const Grid& g)
{
    const ShearContext ctx(g);
    return solve_shear(ctx, d);
}

Field solve_dx_fine(const ShearContext& ctx, const DataTriplet& d)
{
    const Grid& g = ctx.solve_grid();
    const TraceSamples s0 = delta_cap(d, 0, g);
    const TraceSamples s1 = delta_cap(d, 1, g);
    return ctx.forward().solve(ctx.load(d.f, 1), inflow_values(g, s0, s1));
}

Field solve_dx(const ShearContext& ctx, const DataTriplet& d)
{
    return restrict_to(solve_dx_fine(ctx, d), ctx.grid());
}

Field solve_dx(const DataTriplet& d, const Grid& g)
{
    const ShearContext ctx(g);
    return solve_dx(ctx, d);
}

// ---------------------------------------------------------------- functionals

static std::array<double, 2> boundary_terms(const DataTriplet& d)
{
    std::array<double, 2> b{};
    for (int j = 0; j < 2; ++j)
        b[j] = d.delta0.deriv(j, 0.0) - d.delta1.deriv(j, 0.0);
    return b;
}

static OrthoResult jump_only(const ShearContext& ctx, const DataTriplet& d)
{
    const Grid& g = ctx.solve_grid();
    const Field w = solve_dx_fine(ctx, d);
    const auto b = boundary_terms(d);
    const std::vector<double> xs = g.x_nodes();
    OrthoResult r;
    r.route = Route::jump;
    for (int j = 0; j < 2; ++j)
        r.ell[j] = b[j] + trapezoid(trace(w, Edge::z0, j), xs);
    return r;
}

static void add_estimate(OrthoResult& fine, const OrthoResult& coarse)
{
    fine.error_estimate = std::max(std::abs(fine.ell[0] - coarse.ell[0]), std::abs(fine.ell[1] - coarse.ell[1]));
}

OrthoResult ortho_jump(const ShearContext& ctx, const DataTriplet& d, bool estimate_error)
{
    OrthoResult r = jump_only(ctx, d);
    if (estimate_error)
        if (const ShearContext* c = ctx.coarse())
            add_estimate(r, jump_only(*c, d));
    return r;
}

// ortho_dual given the hat averages of d_x f and its lift moments
static OrthoResult dual_with(const DataTriplet& d, const DualProfiles& duals, const Field& fx_load,
                             const std::array<double, 2>& lift)
{
    const Grid& g = duals.grid;
    const int j0 = g.j0();
    const auto b = boundary_terms(d);
    OrthoResult r;
    r.route = Route::dual;
    for (int j = 0; j < 2; ++j) {
        const double vol = integrate(Field(g, fx_load.values().cwiseProduct(duals.psi[j].values()))) + lift[j];
        const auto up = duals.upper(j);
        const auto lo = duals.lower(j);
        // z Delta_i = f(x_i, z) + delta_i''(z)
        std::vector<double> s0, s1;
        for (int q = j0; q < g.nz(); ++q) {
            const double z = g.z(q);
            const double n0 = d.f.value(g.x0(), z) + d.delta0.deriv(2, z);
            s0.push_back(n0 * (q == j0 ? up[0] : duals.phi[j](0, q)));
        }
        for (int q = 0; q <= j0; ++q) {
            const double z = g.z(q);
            const double n1 = d.f.value(g.x1(), z) + d.delta1.deriv(2, z);
            s1.push_back(n1 * (q == j0 ? lo[g.nx() - 1] : duals.phi[j](g.nx() - 1, q)));
        }
        r.ell[j] = b[j] + vol + trapezoid(s0, g.hz()) - trapezoid(s1, g.hz());
    }
    return r;
}

OrthoResult ortho_dual(const DataTriplet& d, const DualProfiles& duals)
{
    const Grid& g = duals.grid;
    std::array<double, 2> lift{};
    for (const auto& [c, t] : d.f.terms()) {
        const auto m = term_lift_moments(*t, g);
        lift[0] += c * m[0];
        lift[1] += c * m[1];
    }
    return dual_with(d, duals, load(d.f, g, 1), lift);
}

static OrthoResult dual_only(const ShearContext& ctx, const DataTriplet& d)
{
    return dual_with(d, ctx.duals(), ctx.load(d.f, 1), ctx.lift_moments(d.f));
}

OrthoResult ortho_dual(const ShearContext& ctx, const DataTriplet& d, bool estimate_error)
{
    OrthoResult r = dual_only(ctx, d);
    if (estimate_error)
        if (const ShearContext* c = ctx.coarse())
            add_estimate(r, dual_only(*c, d));
    return r;
}

OrthoResult ortho(const ShearContext& ctx, const DataTriplet& d, Route route, bool estimate_error)
{
    return route == Route::jump ? ortho_jump(ctx, d, estimate_error) : ortho_dual(ctx, d, estimate_error);
}

MbarResult mbar(const ShearContext& ctx, Route route)
{
    MbarResult res;
    res.route = route;
    for (int k = 0; k < 2; ++k) {
        const OrthoResult r = ortho(ctx, ctx.fbar_triplet(k), route, false);
        res.m(0, k) = r.ell[0];
        res.m(1, k) = r.ell[1];
    }
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(res.m);
    const auto sv = svd.singularValues();
    res.condition = sv(1) > 0 ? sv(0) / sv(1) : std::numeric_limits<double>::infinity();
    if (!(res.condition <= 1e6))
        throw SingularMatrixError("mbar: condition number " + std::to_string(res.condition) + " above 1e6");
    res.inverse = res.m.inverse();
    return res;
}

// ---------------------------------------------------------------- decomposition

Decomposition decompose(const ShearContext& ctx, const DataTriplet& d)
{
    Decomposition out;
    out.ell = ortho_jump(ctx, d, false);
    const MbarResult& M = ctx.mbar(Route::dual);
    const Eigen::Vector2d c = M.inverse * Eigen::Vector2d(out.ell[0], out.ell[1]);
    out.c = {c(0), c(1)};
    out.u = solve_shear(ctx, d);
    out.u_reg = out.u - c(0) * ctx.singular_solution_field(0) - c(1) * ctx.singular_solution_field(1);
    out.u_reg_sampled = out.u - c(0) * ctx.busing_field(0) - c(1) * ctx.busing_field(1);
    return out;
}

std::array<DataTriplet, 2> biorthogonal_basis(const ShearContext& ctx)
{
    const MbarResult& M = ctx.mbar(Route::jump);
    std::array<DataTriplet, 2> xi;
    for (int k = 0; k < 2; ++k)
        for (int m = 0; m < 2; ++m)
            xi[k] += M.inverse(m, k) * ctx.fbar_triplet(m);
    return xi;
}

DataTriplet project_orthogonal(const ShearContext& ctx, const DataTriplet& d)
{
    const OrthoResult l = ortho_jump(ctx, d, false);
    const auto xi = biorthogonal_basis(ctx);
    return d - (l.ell[0] * xi[0] + l.ell[1] * xi[1]);
}

// ---------------------------------------------------------------- higher order

std::vector<HigherOrderLevel> higher_order_data(const ShearContext& ctx, const DataTriplet& d, int n_max,
                                                int samples)
{
    if (n_max < 0)
        throw ConfigError("higher_order_data: n_max must be non-negative");
    if (samples < 6)
        throw ConfigError("higher_order_data: need at least 6 samples per boundary");
    const Grid& g = ctx.grid();
    const double xs[2] = {g.x0(), g.x1()};
    std::array<std::vector<double>, 2> z;
    for (int q = 0; q < samples; ++q) {
        const double s = double(q) / (samples - 1);
        z[0].push_back(s);
        z[1].push_back(s - 1.0);
    }
    z[1].back() = 0.0;

    std::vector<HigherOrderLevel> out;
    std::array<Boundary, 2> prev = {d.delta0, d.delta1};
    for (int n = 0; n <= n_max; ++n) {
        HigherOrderLevel lev;
        lev.n = n;
        std::array<TraceSamples, 2> cur;
        for (int i = 0; i < 2; ++i) {
            if (n == 0) {
                cur[i].z = z[i];
                for (double s : z[i])
                    cur[i].value.push_back(prev[i].value(s));
            } else {
                cur[i] = delta_cap(d.f.derivative(n - 1, g.x0(), g.x1()), prev[i], i, xs[i], z[i]);
            }
        }
        lev.delta0 = cur[0];
        lev.delta1 = cur[1];
        DataTriplet level;
        level.f = n == 0 ? d.f : d.f.derivative(n, g.x0(), g.x1());
        if (n == 0) {
            level.delta0 = d.delta0;
            level.delta1 = d.delta1;
        } else {
            level.delta0 = Boundary(std::make_shared<SampledBoundary>(0.0, 1.0, cur[0].value));
            level.delta1 = Boundary(std::make_shared<SampledBoundary>(-1.0, 0.0, cur[1].value));
            prev = {level.delta0, level.delta1};
        }
        lev.ell = ortho_jump(ctx, level, false);
        out.push_back(std::move(lev));
    }
    return out;
}

} // namespace fbp
