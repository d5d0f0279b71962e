#ifndef FBP_DISCRETIZE_HPP
#define FBP_DISCRETIZE_HPP

// Tensor grids on (x0, x1) x (-1, 1), sampled fields, and the finite
// difference discretization of
//   a d_x u + b d_z u + c0 u - d d_zz u  (- eps d_xx u)
// with the inflow/outflow splitting of the x-boundaries decided by sign(a).

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "fbp/errors.hpp"

namespace fbp {

class Grid {
public:
    Grid() = default;
    // Uniform grid: nx, nz odd and >= 33; z = 0 is then the middle gridline.
    Grid(double x0, double x1, int nx, int nz);
    // Arbitrary increasing x-nodes (at least 5) with a uniform z-grid.
    Grid(std::vector<double> x_nodes, int nz);

    double x0() const { return x0_; }
    double x1() const { return x1_; }
    int nx() const { return nx_; }
    int nz() const { return nz_; }
    // uniform x-spacing, or the largest one on a nonuniform grid
    double hx() const { return hx_; }
    double hz() const { return hz_; }
    int size() const { return nx_ * nz_; }
    // index of the z = 0 gridline
    int j0() const { return (nz_ - 1) / 2; }
    bool uniform_x() const { return xs_ == nullptr; }

    double x(int i) const
    {
        if (xs_)
            return (*xs_)[i];
        return i == nx_ - 1 ? x1_ : x0_ + i * hx_;
    }
    double z(int j) const { return j == j0() ? 0.0 : (j == nz_ - 1 ? 1.0 : -1.0 + j * hz_); }
    // x(i + 1) - x(i)
    double dx(int i) const { return x(i + 1) - x(i); }
    int index(int i, int j) const { return i * nz_ + j; }
    std::vector<double> x_nodes() const;
    // the cell [x(i), x(i+1)] containing x, clamped to the domain
    int cell_x(double x) const;

    // Grid with spacing doubled: ((n + 1) / 2) nodes per direction. Uniform grids only.
    Grid coarsened() const;
    bool can_coarsen() const { return uniform_x() && (nx_ + 1) / 2 >= 33 && (nz_ + 1) / 2 >= 33; }

    // The same z-grid with x-nodes added at distances h_min q^k from x0 and
    // x1, q = 1 + growth hx / (x1 - x0), up to (x1 - x0) / growth. Near the
    // ends the spacing is then about growth hx / (x1 - x0) times the distance
    // to the end. Every node of this grid is kept.
    Grid corner_refined(double h_min = 1e-6, double growth = 5.0) const;
    // Position, among this grid's x-nodes, of every x-node of `sub`. Throws
    // DomainError unless `sub` has the same z-grid and a subset of the x-nodes.
    std::vector<int> embedding(const Grid& sub) const;

    bool operator==(const Grid& o) const;

private:
    double x0_ = 0, x1_ = 1;
    int nx_ = 0, nz_ = 0;
    double hx_ = 0, hz_ = 0;
    std::shared_ptr<const std::vector<double>> xs_;
};

// Node values of a scalar function, stored row-major by x then z.
class Field {
public:
    Field() = default;
    explicit Field(const Grid& g) : grid_(g), v_(Eigen::VectorXd::Zero(g.size())) {}
    Field(const Grid& g, Eigen::VectorXd values);

    static Field sample(const Grid& g, const std::function<double(double, double)>& f);

    const Grid& grid() const { return grid_; }
    double& operator()(int i, int j) { return v_[grid_.index(i, j)]; }
    double operator()(int i, int j) const { return v_[grid_.index(i, j)]; }
    Eigen::VectorXd& values() { return v_; }
    const Eigen::VectorXd& values() const { return v_; }

    Field& operator+=(const Field& o);
    Field& operator-=(const Field& o);
    Field& operator*=(double s);

private:
    Grid grid_;
    Eigen::VectorXd v_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);

// Bilinear interpolation, clamped to the domain.
double interpolate(const Field& u, double x, double z);
// Values at the nodes of g, which must be a subset of the nodes of u.grid().
Field restrict_to(const Field& u, const Grid& g);
// Bilinear resampling onto another grid of the same domain.
Field resample(const Field& u, const Grid& g);

enum class RowTag {
    interior,
    dirichlet_bottom,
    dirichlet_top,
    inflow_sigma0,
    inflow_sigma1,
    outflow,
    degenerate_z0
};

const char* to_string(RowTag t);

enum class Direction { forward, reversed };

// Whether a node's equation is a Dirichlet identity row.
inline bool is_dirichlet(RowTag t)
{
    return t == RowTag::dirichlet_bottom || t == RowTag::dirichlet_top
        || t == RowTag::inflow_sigma0 || t == RowTag::inflow_sigma1;
}

struct SparseOperator {
    Grid grid;
    Direction direction = Direction::forward;
    double epsilon = 0;
    Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;
    std::vector<RowTag> tags;
};

// Stencil for d d_zz. The five-point stencil falls back to three points on the
// rows next to z = +-1. With it the O(hz^2) and O(hx) error terms no longer
// partially cancel on coarse grids, so first-order convergence in hx is
// visible from nz = 65 on.
enum class DiffusionStencil { three_point, five_point };

// Coefficient fields a, b, c0, d. With direction = reversed the transport
// term is -a d_x. Throws SignStructureError when some x-column of a changes
// sign more than once.
SparseOperator assemble(const Grid& grid, const Field& a, const Field& b, const Field& c0,
                        const Field& d, double epsilon = 0,
                        Direction direction = Direction::forward,
                        DiffusionStencil stencil = DiffusionStencil::five_point);

// Values for the Dirichlet rows. bottom/top are indexed by x-node, left/right
// (x = x0 and x = x1) by z-node; entries on rows that are not inflow rows are
// ignored.
struct BoundaryValues {
    std::vector<double> bottom, top, left, right;

    BoundaryValues() = default;
    explicit BoundaryValues(const Grid& g)
        : bottom(g.nx(), 0.0), top(g.nx(), 0.0), left(g.nz(), 0.0), right(g.nz(), 0.0)
    {
    }
};

// Right-hand side vector: source values on equation rows, boundary values on
// Dirichlet rows.
Eigen::VectorXd assemble_rhs(const SparseOperator& op, const Field& rhs, const BoundaryValues& bc);

struct SolverOptions {
    // bound on the relative residual of the row-scaled system
    double tolerance = 1e-10;
    // iteration cap of the BiCGSTAB fallback
    int max_iterations = 5000;
};

// Sparse LU of an assembled operator, reusable for several right-hand sides.
// Falls back to ILUT-preconditioned BiCGSTAB when the factorization fails.
// Solves throw ConvergenceError when the residual stays above the tolerance.
class FactoredOperator {
public:
    explicit FactoredOperator(SparseOperator op, SolverOptions options = {});
    ~FactoredOperator();
    FactoredOperator(FactoredOperator&&) noexcept;
    FactoredOperator& operator=(FactoredOperator&&) noexcept;

    const SparseOperator& op() const { return op_; }
    Field solve(const Field& rhs, const BoundaryValues& bc) const;
    Eigen::VectorXd solve_vector(const Eigen::VectorXd& b) const;
    // relative residual of the last solve, after scaling every row by its
    // largest entry
    double last_residual() const { return last_residual_; }

private:
    struct Impl;
    SparseOperator op_;
    SolverOptions options_;
    std::unique_ptr<Impl> impl_;
    mutable double last_residual_ = 0;
};

Field solve(const SparseOperator& op, const Field& rhs, const BoundaryValues& bc, SolverOptions options = {});

// Finite-difference derivatives: centered (three-point on nonuniform x)
// inside, one-sided second order on the boundary.
Field diff_x(const Field& u);
Field diff_z(const Field& u);
Field diff_zz(const Field& u);

// Trapezoid integral over the domain.
double integrate(const Field& u);
// Trapezoid integral over [a, b] of equispaced samples
double trapezoid(const std::vector<double>& v, double h);
// Trapezoid integral of samples v at the increasing abscissae x
double trapezoid(const std::vector<double>& v, const std::vector<double>& x);

struct NormRecord {
    double l2 = 0;
    double l2x_h1z = 0;
    double h1x_h1z = 0;
    double z0 = 0;
    double trace_l2z_x0 = 0;
    double trace_l2z_x1 = 0;
    double trace_h1z_x0 = 0;
    double trace_h1z_x1 = 0;
};

NormRecord norms(const Field& u);

double l2_norm(const Field& u);
// || d_x d_z u ||_L2 by centered differences
double mixed_derivative_norm(const Field& u);
// the same norm restricted to the nodes within Euclidean distance `radius`
// of one of the corners (x0, 0) and (x1, 0)
double mixed_derivative_norm_near_corners(const Field& u, double radius);

// Weighted norms of a function of z sampled on the full z-grid [-1, 1]:
// (int |z| psi^2)^(1/2) and ||psi||_L2z + ||psi'||_L2z.
double l2z_norm(const std::vector<double>& psi, double hz);
double h1z_norm(const std::vector<double>& psi, double hz);

enum class Edge { x0, x1, z0 };

// x0/x1: samples along z (derivative = d_x, one-sided second order).
// z0: samples along x on the gridline z = 0 (derivative = centered d_z).
std::vector<double> trace(const Field& u, Edge edge, int derivative_order);

// CSV with header "x,z,value", 17 significant digits, row-major.
void write_csv(const Field& u, const std::string& path);
std::string to_csv(const Field& u);
Field read_csv(const std::string& path);
Field parse_csv(const std::string& text);

// Shortest-roundtrip decimal with 17 significant digits.
std::string format_double(double v);

} // namespace fbp

#endif
