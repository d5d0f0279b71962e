#include "fbp/discretize.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

namespace fbp {

// ---------------------------------------------------------------- Grid

Grid::Grid(double x0, double x1, int nx, int nz) : x0_(x0), x1_(x1), nx_(nx), nz_(nz)
{
    if (!(x1 > x0))
        throw ConfigError("grid: x1 must exceed x0");
    if (nx < 33 || nz < 33 || nx % 2 == 0 || nz % 2 == 0)
        throw ConfigError("grid: nx and nz must be odd and at least 33");
    hx_ = (x1 - x0) / (nx - 1);
    hz_ = 2.0 / (nz - 1);
}

Grid::Grid(std::vector<double> x_nodes, int nz) : nz_(nz)
{
    if (x_nodes.size() < 5)
        throw ConfigError("grid: need at least 5 x-nodes");
    if (nz < 33 || nz % 2 == 0)
        throw ConfigError("grid: nz must be odd and at least 33");
    for (std::size_t i = 1; i < x_nodes.size(); ++i)
        if (!(x_nodes[i] > x_nodes[i - 1]))
            throw ConfigError("grid: x-nodes must be strictly increasing");
    x0_ = x_nodes.front();
    x1_ = x_nodes.back();
    nx_ = int(x_nodes.size());
    hz_ = 2.0 / (nz - 1);
    for (int i = 0; i + 1 < nx_; ++i)
        hx_ = std::max(hx_, x_nodes[i + 1] - x_nodes[i]);
    xs_ = std::make_shared<const std::vector<double>>(std::move(x_nodes));
}

std::vector<double> Grid::x_nodes() const
{
    if (xs_)
        return *xs_;
    std::vector<double> v(nx_);
    for (int i = 0; i < nx_; ++i)
        v[i] = x(i);
    return v;
}

int Grid::cell_x(double x) const
{
    if (!xs_)
        return std::clamp(int(std::floor((x - x0_) / hx_)), 0, nx_ - 2);
    const auto it = std::upper_bound(xs_->begin(), xs_->end(), x);
    return std::clamp(int(it - xs_->begin()) - 1, 0, nx_ - 2);
}

bool Grid::operator==(const Grid& o) const
{
    if (!(x0_ == o.x0_ && x1_ == o.x1_ && nx_ == o.nx_ && nz_ == o.nz_))
        return false;
    if (uniform_x() != o.uniform_x())
        return false;
    return xs_ == o.xs_ || *xs_ == *o.xs_;
}

Grid Grid::coarsened() const
{
    if (!uniform_x())
        throw DomainError("grid: only uniform grids can be coarsened");
    return Grid(x0_, x1_, (nx_ + 1) / 2, (nz_ + 1) / 2);
}

Grid Grid::corner_refined(double h_min, double growth) const
{
    const double L = x1_ - x0_;
    if (!(h_min > 0) || !(growth > 0) || !(h_min < L / growth))
        throw ConfigError("grid: refinement needs 0 < h_min < (x1 - x0) / growth");
    const double q = 1 + growth * hx_ / L;
    const double reach = L / growth;
    std::vector<double> xs = x_nodes();
    for (double d = h_min; d < reach; d *= q) {
        xs.push_back(x0_ + d);
        xs.push_back(x1_ - d);
    }
    std::sort(xs.begin(), xs.end());
    // drop added nodes that nearly coincide with a kept one
    std::vector<double> kept;
    for (double v : xs)
        if (kept.empty() || v - kept.back() > 0.25 * h_min)
            kept.push_back(v);
        else if (v == x1_)
            kept.back() = v;
    return Grid(std::move(kept), nz_);
}

std::vector<int> Grid::embedding(const Grid& sub) const
{
    if (sub.nz() != nz_ || sub.x0() != x0_ || sub.x1() != x1_)
        throw DomainError("grid: embedding needs the same domain and z-grid");
    const double tol = 1e-12 * (x1_ - x0_);
    std::vector<int> idx(sub.nx());
    int i = 0;
    for (int k = 0; k < sub.nx(); ++k) {
        const double xk = sub.x(k);
        while (i < nx_ && x(i) < xk - tol)
            ++i;
        if (i == nx_ || std::abs(x(i) - xk) > tol)
            throw DomainError("grid: x-node " + std::to_string(xk) + " is not a node of the finer grid");
        idx[k] = i;
    }
    return idx;
}

// ---------------------------------------------------------------- Field

Field::Field(const Grid& g, Eigen::VectorXd values) : grid_(g), v_(std::move(values))
{
    if (v_.size() != g.size())
        throw DomainError("field: value count does not match grid");
}

Field Field::sample(const Grid& g, const std::function<double(double, double)>& f)
{
    Field out(g);
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 0; j < g.nz(); ++j)
            out(i, j) = f(g.x(i), g.z(j));
    return out;
}

static void check_same_grid(const Field& a, const Field& b)
{
    if (!(a.grid() == b.grid()))
        throw DomainError("field: grid mismatch");
}

Field& Field::operator+=(const Field& o)
{
    check_same_grid(*this, o);
    v_ += o.v_;
    return *this;
}

Field& Field::operator-=(const Field& o)
{
    check_same_grid(*this, o);
    v_ -= o.v_;
    return *this;
}

Field& Field::operator*=(double s)
{
    v_ *= s;
    return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

double interpolate(const Field& u, double x, double z)
{
    const Grid& g = u.grid();
    const int i = g.cell_x(x);
    const double sz = std::clamp((z + 1.0) / g.hz(), 0.0, double(g.nz() - 1));
    const int j = std::min(int(sz), g.nz() - 2);
    const double a = std::clamp((x - g.x(i)) / g.dx(i), 0.0, 1.0);
    const double b = sz - j;
    return (1 - a) * (1 - b) * u(i, j) + a * (1 - b) * u(i + 1, j) + (1 - a) * b * u(i, j + 1)
        + a * b * u(i + 1, j + 1);
}

Field restrict_to(const Field& u, const Grid& g)
{
    if (u.grid() == g)
        return u;
    const std::vector<int> idx = u.grid().embedding(g);
    Field out(g);
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 0; j < g.nz(); ++j)
            out(i, j) = u(idx[i], j);
    return out;
}

Field resample(const Field& u, const Grid& g)
{
    if (u.grid() == g)
        return u;
    return Field::sample(g, [&](double x, double z) { return interpolate(u, x, z); });
}

// ---------------------------------------------------------------- assembly

const char* to_string(RowTag t)
{
    switch (t) {
    case RowTag::interior: return "interior";
    case RowTag::dirichlet_bottom: return "dirichlet-bottom";
    case RowTag::dirichlet_top: return "dirichlet-top";
    case RowTag::inflow_sigma0: return "inflow-sigma0";
    case RowTag::inflow_sigma1: return "inflow-sigma1";
    case RowTag::outflow: return "outflow";
    case RowTag::degenerate_z0: return "degenerate-z0";
    }
    return "unknown";
}

static void check_sign_structure(const Field& a, double tol)
{
    const Grid& g = a.grid();
    for (int i = 0; i < g.nx(); ++i) {
        int last = 0, changes = 0;
        for (int j = 1; j < g.nz() - 1; ++j) {
            const double v = a(i, j);
            const int s = v > tol ? 1 : (v < -tol ? -1 : 0);
            if (s == 0)
                continue;
            if (last != 0 && s != last)
                ++changes;
            last = s;
        }
        if (changes > 1)
            throw SignStructureError("assemble: transport coefficient changes sign more than once in column "
                                     + std::to_string(i));
    }
}

SparseOperator assemble(const Grid& grid, const Field& a, const Field& b, const Field& c0,
                        const Field& d, double epsilon, Direction direction,
                        DiffusionStencil stencil)
{
    for (const Field* f : {&a, &b, &c0, &d})
        if (!(f->grid() == grid))
            throw DomainError("assemble: coefficient grid mismatch");
    if (epsilon < 0)
        throw DomainError("assemble: epsilon must be non-negative");

    const double amax = a.values().cwiseAbs().maxCoeff();
    const double tol = 1e-14 * std::max(1.0, amax);
    check_sign_structure(a, tol);

    const int nx = grid.nx(), nz = grid.nz();
    const double hz = grid.hz();
    const double sgn = direction == Direction::forward ? 1.0 : -1.0;

    SparseOperator op;
    op.grid = grid;
    op.direction = direction;
    op.epsilon = epsilon;
    op.tags.assign(grid.size(), RowTag::interior);

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(std::size_t(grid.size()) * 9);

    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < nz; ++j) {
            const int r = grid.index(i, j);
            auto add = [&](int ii, int jj, double v) {
                if (v != 0)
                    trip.emplace_back(r, grid.index(ii, jj), v);
            };
            if (j == 0 || j == nz - 1) {
                op.tags[r] = j == 0 ? RowTag::dirichlet_bottom : RowTag::dirichlet_top;
                add(i, j, 1.0);
                continue;
            }
            double av = sgn * a(i, j);
            if (std::abs(av) <= tol)
                av = 0;
            RowTag tag = RowTag::interior;
            if (av == 0)
                tag = RowTag::degenerate_z0;
            else if (i == 0)
                tag = av > 0 ? RowTag::inflow_sigma0 : RowTag::outflow;
            else if (i == nx - 1)
                tag = av < 0 ? RowTag::inflow_sigma1 : RowTag::outflow;
            op.tags[r] = tag;
            if (is_dirichlet(tag)) {
                add(i, j, 1.0);
                continue;
            }

            const double dv = d(i, j);
            if (!(dv > 0))
                throw DomainError("assemble: diffusion coefficient must be positive");

            const double bz = b(i, j) / (2 * hz);
            double diag = c0(i, j);
            if (stencil == DiffusionStencil::five_point && j >= 2 && j <= nz - 3) {
                const double q = dv / (12 * hz * hz);
                diag += 30 * q;
                add(i, j - 2, q);
                add(i, j + 2, q);
                add(i, j - 1, -16 * q - bz);
                add(i, j + 1, -16 * q + bz);
            } else {
                diag += 2 * dv / (hz * hz);
                add(i, j - 1, -dv / (hz * hz) - bz);
                add(i, j + 1, -dv / (hz * hz) + bz);
            }

            const bool interior_x = i > 0 && i < nx - 1;
            if (epsilon > 0 && interior_x) {
                const double hm = grid.dx(i - 1), hp = grid.dx(i);
                const double em = 2 * epsilon / (hm * (hm + hp)), ep = 2 * epsilon / (hp * (hm + hp));
                add(i - 1, j, -av / (hm + hp) - em);
                add(i + 1, j, av / (hm + hp) - ep);
                diag += em + ep;
            } else if (av > 0) {
                const double h = grid.dx(i - 1);
                add(i - 1, j, -av / h);
                diag += av / h;
            } else if (av < 0) {
                const double h = grid.dx(i);
                add(i + 1, j, av / h);
                diag -= av / h;
            }
            add(i, j, diag);
        }
    }
    op.matrix.resize(grid.size(), grid.size());
    op.matrix.setFromTriplets(trip.begin(), trip.end());
    op.matrix.makeCompressed();
    return op;
}

Eigen::VectorXd assemble_rhs(const SparseOperator& op, const Field& rhs, const BoundaryValues& bc)
{
    const Grid& g = op.grid;
    if (!(rhs.grid() == g))
        throw DomainError("assemble_rhs: grid mismatch");
    auto need = [](const std::vector<double>& v, int n, const char* name) {
        if (int(v.size()) != n)
            throw DomainError(std::string("assemble_rhs: boundary vector '") + name + "' has wrong size");
    };
    need(bc.bottom, g.nx(), "bottom");
    need(bc.top, g.nx(), "top");
    need(bc.left, g.nz(), "left");
    need(bc.right, g.nz(), "right");

    Eigen::VectorXd b(g.size());
    for (int i = 0; i < g.nx(); ++i) {
        for (int j = 0; j < g.nz(); ++j) {
            const int r = g.index(i, j);
            switch (op.tags[r]) {
            case RowTag::dirichlet_bottom: b[r] = bc.bottom[i]; break;
            case RowTag::dirichlet_top: b[r] = bc.top[i]; break;
            case RowTag::inflow_sigma0: b[r] = bc.left[j]; break;
            case RowTag::inflow_sigma1: b[r] = bc.right[j]; break;
            default: b[r] = rhs(i, j); break;
            }
        }
    }
    return b;
}

// ---------------------------------------------------------------- solver

struct FactoredOperator::Impl {
    // rows scaled by 1 / (largest entry): the refined grids mix spacings of
    // 1e-6 and 1e-2 in one matrix
    Eigen::VectorXd row_scale;
    Eigen::SparseMatrix<double> colmajor;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    bool lu_ok = false;
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> iterative;
};

FactoredOperator::FactoredOperator(SparseOperator op, SolverOptions options)
    : op_(std::move(op)), options_(options), impl_(std::make_unique<Impl>())
{
    Eigen::SparseMatrix<double, Eigen::RowMajor> scaled = op_.matrix;
    impl_->row_scale.setOnes(scaled.rows());
    for (int r = 0; r < scaled.outerSize(); ++r) {
        double m = 0;
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(scaled, r); it; ++it)
            m = std::max(m, std::abs(it.value()));
        if (m > 0) {
            impl_->row_scale[r] = 1.0 / m;
            for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(scaled, r); it; ++it)
                it.valueRef() /= m;
        }
    }
    impl_->colmajor = scaled;
    impl_->colmajor.makeCompressed();
    impl_->lu.analyzePattern(impl_->colmajor);
    impl_->lu.factorize(impl_->colmajor);
    impl_->lu_ok = impl_->lu.info() == Eigen::Success;
    if (!impl_->lu_ok) {
        impl_->iterative.setTolerance(0.01 * options_.tolerance);
        impl_->iterative.setMaxIterations(options_.max_iterations);
        impl_->iterative.compute(impl_->colmajor);
        if (impl_->iterative.info() != Eigen::Success)
            throw SingularMatrixError("solve: sparse LU and ILUT preconditioner both failed");
    }
}

FactoredOperator::~FactoredOperator() = default;
FactoredOperator::FactoredOperator(FactoredOperator&&) noexcept = default;
FactoredOperator& FactoredOperator::operator=(FactoredOperator&&) noexcept = default;

Eigen::VectorXd FactoredOperator::solve_vector(const Eigen::VectorXd& b_in) const
{
    const Eigen::VectorXd b = b_in.cwiseProduct(impl_->row_scale);
    const double bn = b.norm();
    if (bn == 0) {
        last_residual_ = 0;
        return Eigen::VectorXd::Zero(b.size());
    }
    const auto& A = impl_->colmajor;
    Eigen::VectorXd x;
    if (impl_->lu_ok) {
        x = impl_->lu.solve(b);
        for (int it = 0; it < 3; ++it) {
            const Eigen::VectorXd res = b - A * x;
            last_residual_ = res.norm() / bn;
            if (last_residual_ <= 0.01 * options_.tolerance)
                break;
            x += impl_->lu.solve(res);
        }
        last_residual_ = (b - A * x).norm() / bn;
    } else {
        x = impl_->iterative.solve(b);
        last_residual_ = (b - A * x).norm() / bn;
    }
    if (!(last_residual_ <= options_.tolerance))
        throw ConvergenceError("solve: relative residual " + format_double(last_residual_) + " above "
                               + format_double(options_.tolerance));
    return x;
}

Field FactoredOperator::solve(const Field& rhs, const BoundaryValues& bc) const
{
    return Field(op_.grid, solve_vector(assemble_rhs(op_, rhs, bc)));
}

Field solve(const SparseOperator& op, const Field& rhs, const BoundaryValues& bc, SolverOptions options)
{
    FactoredOperator f(op, options);
    return f.solve(rhs, bc);
}

// ---------------------------------------------------------------- derivatives

namespace {

template <class Get, class Set>
void diff1(int n, double h, Get get, Set set)
{
    for (int k = 1; k < n - 1; ++k)
        set(k, (get(k + 1) - get(k - 1)) / (2 * h));
    set(0, (-3 * get(0) + 4 * get(1) - get(2)) / (2 * h));
    set(n - 1, (3 * get(n - 1) - 4 * get(n - 2) + get(n - 3)) / (2 * h));
}

template <class Get, class Set>
void diff2(int n, double h, Get get, Set set)
{
    for (int k = 1; k < n - 1; ++k)
        set(k, (get(k + 1) - 2 * get(k) + get(k - 1)) / (h * h));
    set(0, (2 * get(0) - 5 * get(1) + 4 * get(2) - get(3)) / (h * h));
    set(n - 1, (2 * get(n - 1) - 5 * get(n - 2) + 4 * get(n - 3) - get(n - 4)) / (h * h));
}

} // namespace

// Weights of the second-order first derivative at node k from the nodes
// k, k + s, k + 2s (s = +-1) or, for centered = true, from k - 1, k, k + 1.
static std::array<double, 3> x_weights(const Grid& g, int k, bool centered, int s)
{
    if (centered) {
        const double hm = g.dx(k - 1), hp = g.dx(k);
        return {-hp / (hm * (hm + hp)), (hp - hm) / (hm * hp), hm / (hp * (hm + hp))};
    }
    const double h1 = std::abs(g.x(k + s) - g.x(k)), h2 = std::abs(g.x(k + 2 * s) - g.x(k + s));
    return {s * -(2 * h1 + h2) / (h1 * (h1 + h2)), s * (h1 + h2) / (h1 * h2), s * -h1 / (h2 * (h1 + h2))};
}

Field diff_x(const Field& u)
{
    const Grid& g = u.grid();
    if (g.uniform_x()) {
        Field out(g);
        for (int j = 0; j < g.nz(); ++j)
            diff1(g.nx(), g.hx(), [&](int i) { return u(i, j); }, [&](int i, double v) { out(i, j) = v; });
        return out;
    }
    Field out(g);
    const int n = g.nx();
    for (int i = 0; i < n; ++i) {
        const bool c = i > 0 && i < n - 1;
        const int s = i == 0 ? 1 : -1;
        const auto w = x_weights(g, i, c, s);
        const int a = c ? i - 1 : i, b = c ? i : i + s, e = c ? i + 1 : i + 2 * s;
        for (int j = 0; j < g.nz(); ++j)
            out(i, j) = w[0] * u(a, j) + w[1] * u(b, j) + w[2] * u(e, j);
    }
    return out;
}

Field diff_z(const Field& u)
{
    const Grid& g = u.grid();
    Field out(g);
    for (int i = 0; i < g.nx(); ++i)
        diff1(g.nz(), g.hz(), [&](int j) { return u(i, j); }, [&](int j, double v) { out(i, j) = v; });
    return out;
}

Field diff_zz(const Field& u)
{
    const Grid& g = u.grid();
    Field out(g);
    for (int i = 0; i < g.nx(); ++i)
        diff2(g.nz(), g.hz(), [&](int j) { return u(i, j); }, [&](int j, double v) { out(i, j) = v; });
    return out;
}

double trapezoid(const std::vector<double>& v, double h)
{
    if (v.size() < 2)
        return 0;
    double s = 0.5 * (v.front() + v.back());
    for (std::size_t k = 1; k + 1 < v.size(); ++k)
        s += v[k];
    return s * h;
}

double trapezoid(const std::vector<double>& v, const std::vector<double>& x)
{
    if (v.size() != x.size())
        throw DomainError("trapezoid: sample and abscissa counts differ");
    double s = 0;
    for (std::size_t k = 0; k + 1 < v.size(); ++k)
        s += 0.5 * (x[k + 1] - x[k]) * (v[k] + v[k + 1]);
    return s;
}

double integrate(const Field& u)
{
    const Grid& g = u.grid();
    const int nx = g.nx();
    double s = 0;
    for (int i = 0; i < nx; ++i) {
        const double wx = 0.5 * ((i > 0 ? g.dx(i - 1) : 0.0) + (i < nx - 1 ? g.dx(i) : 0.0));
        double col = 0;
        for (int j = 0; j < g.nz(); ++j) {
            const double wz = (j == 0 || j == g.nz() - 1) ? 0.5 : 1.0;
            col += wz * u(i, j);
        }
        s += wx * col;
    }
    return s * g.hz();
}

static double l2_sq(const Field& u)
{
    Field sq(u.grid(), u.values().array().square().matrix());
    return integrate(sq);
}

double l2_norm(const Field& u) { return std::sqrt(l2_sq(u)); }

double mixed_derivative_norm(const Field& u) { return l2_norm(diff_x(diff_z(u))); }

double mixed_derivative_norm_near_corners(const Field& u, double radius)
{
    const Grid& g = u.grid();
    Field d = diff_x(diff_z(u));
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 0; j < g.nz(); ++j) {
            const double z = g.z(j);
            const double r = std::min(std::hypot(g.x(i) - g.x0(), z), std::hypot(g.x(i) - g.x1(), z));
            if (!(r < radius))
                d(i, j) = 0;
        }
    return l2_norm(d);
}

double l2z_norm(const std::vector<double>& psi, double hz)
{
    const int n = int(psi.size());
    std::vector<double> w(n);
    for (int j = 0; j < n; ++j) {
        const double z = -1.0 + j * hz;
        w[j] = std::abs(z) * psi[j] * psi[j];
    }
    return std::sqrt(trapezoid(w, hz));
}

double h1z_norm(const std::vector<double>& psi, double hz)
{
    const int n = int(psi.size());
    std::vector<double> d(n);
    diff1(n, hz, [&](int j) { return psi[j]; }, [&](int j, double v) { d[j] = v; });
    return l2z_norm(psi, hz) + l2z_norm(d, hz);
}

NormRecord norms(const Field& u)
{
    const Grid& g = u.grid();
    NormRecord n;
    const Field ux = diff_x(u);
    const Field uz = diff_z(u);
    const Field uzz = diff_zz(u);
    const Field uxz = diff_x(uz);
    Field zux(g);
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 0; j < g.nz(); ++j)
            zux(i, j) = g.z(j) * ux(i, j);
    const double u2 = l2_sq(u), ux2 = l2_sq(ux), uz2 = l2_sq(uz), uxz2 = l2_sq(uxz);
    n.l2 = std::sqrt(u2);
    n.l2x_h1z = std::sqrt(u2 + uz2);
    n.h1x_h1z = std::sqrt(u2 + ux2 + uz2 + uxz2);
    n.z0 = l2_norm(zux) + l2_norm(uzz) + std::sqrt(uz2) + n.l2;
    const auto t0 = trace(u, Edge::x0, 0);
    const auto t1 = trace(u, Edge::x1, 0);
    n.trace_l2z_x0 = l2z_norm(t0, g.hz());
    n.trace_l2z_x1 = l2z_norm(t1, g.hz());
    n.trace_h1z_x0 = h1z_norm(t0, g.hz());
    n.trace_h1z_x1 = h1z_norm(t1, g.hz());
    return n;
}

std::vector<double> trace(const Field& u, Edge edge, int derivative_order)
{
    const Grid& g = u.grid();
    if (derivative_order != 0 && derivative_order != 1)
        throw DomainError("trace: derivative order must be 0 or 1");
    std::vector<double> out;
    if (edge == Edge::z0) {
        const int j = g.j0();
        out.resize(g.nx());
        for (int i = 0; i < g.nx(); ++i)
            out[i] = derivative_order == 0 ? u(i, j) : (u(i, j + 1) - u(i, j - 1)) / (2 * g.hz());
        return out;
    }
    const bool left = edge == Edge::x0;
    const int i0 = left ? 0 : g.nx() - 1;
    const int step = left ? 1 : -1;
    const auto w = x_weights(g, i0, false, step);
    out.resize(g.nz());
    for (int j = 0; j < g.nz(); ++j) {
        if (derivative_order == 0)
            out[j] = u(i0, j);
        else
            out[j] = w[0] * u(i0, j) + w[1] * u(i0 + step, j) + w[2] * u(i0 + 2 * step, j);
    }
    return out;
}

// ---------------------------------------------------------------- CSV

std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::string to_csv(const Field& u)
{
    const Grid& g = u.grid();
    std::string s = "x,z,value\n";
    s.reserve(std::size_t(g.size()) * 64);
    for (int i = 0; i < g.nx(); ++i) {
        const std::string xs = format_double(g.x(i));
        for (int j = 0; j < g.nz(); ++j) {
            s += xs;
            s += ',';
            s += format_double(g.z(j));
            s += ',';
            s += format_double(u(i, j));
            s += '\n';
        }
    }
    return s;
}

void write_csv(const Field& u, const std::string& path)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw ConfigError("cannot open '" + path + "' for writing");
    f << to_csv(u);
}

static double parse_number(const std::string& s, std::size_t line)
{
    double v = 0;
    const char* b = s.data();
    const char* e = b + s.size();
    while (b < e && (*b == ' ' || *b == '\t'))
        ++b;
    while (e > b && (e[-1] == ' ' || e[-1] == '\t' || e[-1] == '\r'))
        --e;
    const auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e)
        throw ConfigError("csv: malformed number on line " + std::to_string(line));
    return v;
}

Field parse_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line))
        throw ConfigError("csv: empty input");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != "x,z,value")
        throw ConfigError("csv: expected header 'x,z,value'");
    std::vector<double> xs, zs, vs;
    std::size_t ln = 1;
    while (std::getline(in, line)) {
        ++ln;
        if (line.empty() || line == "\r")
            continue;
        const auto c1 = line.find(',');
        const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
        if (c2 == std::string::npos)
            throw ConfigError("csv: expected three columns on line " + std::to_string(ln));
        xs.push_back(parse_number(line.substr(0, c1), ln));
        zs.push_back(parse_number(line.substr(c1 + 1, c2 - c1 - 1), ln));
        vs.push_back(parse_number(line.substr(c2 + 1), ln));
    }
    if (xs.empty())
        throw ConfigError("csv: no data rows");
    int nz = 0;
    while (nz < int(xs.size()) && xs[nz] == xs[0])
        ++nz;
    if (xs.size() % nz != 0)
        throw ConfigError("csv: row count is not a multiple of the z-resolution");
    const int nx = int(xs.size()) / nz;
    std::vector<double> xn(nx);
    for (int i = 0; i < nx; ++i)
        xn[i] = xs[std::size_t(i) * nz];
    const double L = xn.back() - xn.front();
    bool uniform = nx >= 33 && nx % 2 == 1;
    for (int i = 0; uniform && i < nx; ++i)
        uniform = std::abs(xn[i] - (xn.front() + i * L / (nx - 1))) <= 1e-12 * (1 + std::abs(xn[i]));
    const Grid g = uniform ? Grid(xn.front(), xn.back(), nx, nz) : Grid(xn, nz);
    Field u(g);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nz; ++j) {
            const std::size_t r = std::size_t(i) * nz + j;
            if (std::abs(xs[r] - g.x(i)) > 1e-12 * (1 + std::abs(g.x(i))) || std::abs(zs[r] - g.z(j)) > 1e-12)
                throw ConfigError("csv: nodes are not a row-major tensor grid");
            u(i, j) = vs[r];
        }
    return u;
}

Field read_csv(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw ConfigError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_csv(ss.str());
}

} // namespace fbp
