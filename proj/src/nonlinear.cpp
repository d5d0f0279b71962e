#include "fbp/nonlinear.hpp"

#include <cmath>

#include <Eigen/LU>
#include <Eigen/SVD>
#include <json.hpp>

#include "fbp/linearized.hpp"

namespace fbp {

const char* to_string(IterationStatus s)
{
    switch (s) {
    case IterationStatus::converged: return "converged";
    case IterationStatus::max_iter: return "max-iter";
    case IterationStatus::diverged: return "diverged";
    }
    return "unknown";
}

std::string to_json(const IterationReport& r)
{
    nlohmann::ordered_json j;
    j["status"] = to_string(r.status);
    j["iterations"] = r.records.size();
    j["residual"] = r.residual;
    j["contraction"] = r.contraction;
    auto& recs = j["records"] = nlohmann::ordered_json::array();
    for (const IterationRecord& q : r.records) {
        nlohmann::ordered_json e;
        e["n"] = q.n;
        e["increment_l2"] = q.increment_l2;
        e["increment_h1"] = q.increment_h1;
        e["nu"] = {q.nu[0], q.nu[1]};
        e["ell"] = {q.ell[0], q.ell[1]};
        e["condition"] = q.condition;
        recs.push_back(std::move(e));
    }
    return j.dump(2) + "\n";
}

Field initialize(const DataTriplet& d, const Grid& g)
{
    const double L = g.x1() - g.x0();
    Field u(g);
    for (int i = 0; i < g.nx(); ++i) {
        const double c0 = plateau((g.x(i) - g.x0()) / L).v;
        const double c1 = plateau((g.x1() - g.x(i)) / L).v;
        for (int j = 0; j < g.nz(); ++j) {
            const double y = g.z(j);
            double v = 0;
            if (c0 != 0 && y >= 0 && !d.delta0.empty())
                v += d.delta0.value(y) * c0;
            if (c1 != 0 && y <= 0 && !d.delta1.empty())
                v += d.delta1.value(y) * c1;
            u(i, j) = v;
        }
    }
    return u;
}

// y + u with the values at the corners (x_i, 0) pinned to delta_i(0) = 0.
// There the iterate is only determined up to the discretization error, and
// its sign would switch the corner row between inflow and degenerate from
// one step to the next.
static Field shifted_flow(const Field& u)
{
    const Grid& g = u.grid();
    Field f = u;
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 0; j < g.nz(); ++j)
            f(i, j) += g.z(j);
    f(0, g.j0()) = 0;
    f(g.nx() - 1, g.j0()) = 0;
    return f;
}

static DataTriplet corrected(const DataTriplet& d, const std::array<DataTriplet, 2>& xi,
                             const std::array<double, 2>& nu)
{
    DataTriplet out = d;
    for (int k = 0; k < 2; ++k)
        if (nu[k] != 0)
            out += nu[k] * xi[k];
    return out;
}

double nonlinear_residual(const ShearContext& ctx, const Field& u_fine, const DataTriplet& d,
                          const std::array<double, 2>& nu)
{
    const Grid& g = ctx.solve_grid();
    if (!(u_fine.grid() == g))
        throw DomainError("nonlinear_residual: field is not on the solve grid");
    const auto xi = biorthogonal_basis(ctx);
    const DataTriplet dc = corrected(d, xi, nu);
    const Field a = shifted_flow(u_fine);
    const Field zero(g);
    const Field one = Field::sample(g, [](double, double) { return 1.0; });
    const SparseOperator op = assemble(g, a, zero, zero, one, 0.0, Direction::forward, ctx.stencil());
    const Eigen::VectorXd b = assemble_rhs(op, ctx.load(dc.f, 0), inflow_values(g, dc.delta0, dc.delta1));
    Eigen::VectorXd r = op.matrix * u_fine.values() - b;
    for (int k = 0; k < g.size(); ++k)
        if (is_dirichlet(op.tags[k]))
            r[k] = 0;
    return l2_norm(Field(g, std::move(r)));
}

NonlinearResult iterate(const ShearContext& ctx, const DataTriplet& d, const NonlinearOptions& opts)
{
    if (!(opts.tol > 0) || opts.n_max < 1)
        throw ConfigError("iterate: need tol > 0 and n_max >= 1");
    const Grid& g = ctx.solve_grid();
    const double eta = hnorm(d, ctx.grid());
    if (!(eta <= opts.eta_bar))
        throw InadmissibleError("iterate: data norm " + format_double(eta) + " above the admissibility threshold "
                                + format_double(opts.eta_bar));
    const auto xi = biorthogonal_basis(ctx);

    NonlinearResult out;
    IterationReport& rep = out.report;
    Field u = opts.init == Initialization::cutoff ? initialize(d, g) : Field(g);
    std::array<double, 2> nu{};
    for (int n = 0; n < opts.n_max; ++n) {
        const LinearizedContext lc(ctx, FlowProfile(shifted_flow(u)));
        IterationRecord rec;
        rec.n = n;
        if (opts.frozen) {
            const OrthoResult l = ortho_linearized(lc, corrected(d, xi, nu));
            nu = {nu[0] - l.ell[0], nu[1] - l.ell[1]};
            rec.ell = ortho_linearized(lc, d).ell;
            rec.condition = 1;
        } else {
            const OrthoResult l = ortho_linearized(lc, d);
            Eigen::Matrix2d M;
            for (int k = 0; k < 2; ++k) {
                const OrthoResult m = ortho_linearized(lc, xi[k]);
                M(0, k) = m.ell[0];
                M(1, k) = m.ell[1];
            }
            Eigen::JacobiSVD<Eigen::Matrix2d> svd(M);
            const auto sv = svd.singularValues();
            rec.condition = sv(1) > 0 ? sv(0) / sv(1) : std::numeric_limits<double>::infinity();
            if (!(rec.condition <= 1e6))
                throw SingularMatrixError("iterate: M_n condition number " + format_double(rec.condition));
            const Eigen::Vector2d v = -M.inverse() * Eigen::Vector2d(l.ell[0], l.ell[1]);
            nu = {v(0), v(1)};
            rec.ell = l.ell;
        }
        rec.nu = nu;
        Field next = solve_linearized_fine(lc, corrected(d, xi, nu));
        const Field inc = next - u;
        rec.increment_l2 = l2_norm(inc);
        rec.increment_h1 = norms(inc).h1x_h1z;
        u = std::move(next);
        rep.records.push_back(rec);

        if (n == 0 && !(u.values().cwiseAbs().maxCoeff() <= opts.first_iterate_bound))
            throw InadmissibleError("iterate: first iterate exceeds " + format_double(opts.first_iterate_bound)
                                    + "; data too large for the fixed-point scheme");
        const auto& R = rep.records;
        const std::size_t m = R.size();
        if (m >= 3 && R[m - 1].increment_l2 > opts.tol)
            rep.contraction = std::max(rep.contraction, R[m - 1].increment_l2 / R[m - 2].increment_l2);
        if (rec.increment_l2 <= opts.tol) {
            rep.status = IterationStatus::converged;
            break;
        }
        if (m >= 4 && R[m - 1].increment_l2 > R[m - 2].increment_l2 && R[m - 2].increment_l2 > R[m - 3].increment_l2
            && R[m - 3].increment_l2 > R[m - 4].increment_l2) {
            rep.status = IterationStatus::diverged;
            break;
        }
    }
    rep.residual = nonlinear_residual(ctx, u, d, nu);
    out.nu = nu;
    out.u = restrict_to(u, ctx.grid());
    out.u_fine = std::move(u);
    return out;
}

NonlinearResult iterate(const DataTriplet& d, const Grid& g, const NonlinearOptions& opts)
{
    const ShearContext ctx(g);
    return iterate(ctx, d, opts);
}

std::array<double, 2> manifold_nu(const ShearContext& ctx, const DataTriplet& d_perp, const NonlinearOptions& opts)
{
    const NonlinearResult r = iterate(ctx, d_perp, opts);
    if (r.report.status != IterationStatus::converged)
        throw DivergenceError(std::string("manifold_nu: iteration ended with status ") + to_string(r.report.status));
    return r.nu;
}

} // namespace fbp
