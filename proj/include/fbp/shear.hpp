#ifndef FBP_SHEAR_HPP
#define FBP_SHEAR_HPP

// The model operator z d_x - d_zz on (x0, x1) x (-1, 1): forward solves, the
// problem satisfied by d_x u, the dual profiles, the two orthogonality
// functionals, the matrix Mbar and the singular/regular decomposition.
//
// Everything that only depends on the grid (LU factors, dual profiles,
// sampled singular profiles, Mbar) is built once in a ShearContext. Solutions
// vary on the x-scale |z|^3 next to x0 and x1, so the context solves on a
// copy of the grid refined geometrically towards both ends and returns
// fields restricted to the nodes of the original grid.

#include <array>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "fbp/data.hpp"
#include "fbp/discretize.hpp"
#include "fbp/geometry.hpp"

namespace fbp {

// Cutoffs centred at the corners (x0, 0) and (x1, 0).
struct CutoffPair {
    std::array<Cutoff, 2> c;

    const Cutoff& operator[](int i) const { return c[i]; }
};

// Throws ConfigError unless 0 < r_inner < r_outer < min(1, x1 - x0)/2.
CutoffPair make_cutoffs(double x0, double x1, double r_inner = 0.1, double r_outer = 0.2);

enum class Route { jump, dual };
const char* to_string(Route r);

struct OrthoResult {
    std::array<double, 2> ell{};
    Route route = Route::jump;
    // |ell(h) - ell(2h)| maximised over j; NaN when no coarse grid was used
    double error_estimate = std::numeric_limits<double>::quiet_NaN();

    double operator[](int j) const { return ell[j]; }
};

// Samples of a function on the nodes of Sigma_i: z runs over [0, 1] for
// i = 0 and over [-1, 0] for i = 1, in increasing order.
struct TraceSamples {
    std::vector<double> z;
    std::vector<double> value;
};

// Delta_i(z) = (f(x_i, z) + delta_i''(z)) / z on the given z-nodes of
// Sigma_i. At z = 0 the limit is the derivative of the numerator, taken by a
// one-sided third-order difference. Throws IncompatibleDataError when the
// numerator does not vanish at z = 0.
TraceSamples delta_cap(const Source& f, const Boundary& delta, int i, double x_i,
                       const std::vector<double>& z);
TraceSamples delta_cap(const DataTriplet& d, int i, const Grid& g);

// The profile zeta of the dual lifts: 1 on |z| <= 1/3, 0 on |z| >= 1/2.
Jet1<double> lift_profile(double z);

// Dual profiles Phi^j = lift_j + Psi^j with
//   lift_0 = -z zeta(z) 1_{z>0},   lift_1 = zeta(z) 1_{z>0},
// where Psi^j is continuous and solves the reversed problem. The source of
// the Psi-problem is the discrete residual of the smooth extension of lift_j
// to z <= 0, taken on the rows with z > 0. On the z = 0 gridline `phi` holds
// the mean of the one-sided values.
struct DualProfiles {
    Grid grid;
    std::array<Field, 2> phi;
    std::array<Field, 2> psi;

    // one-sided values on z = 0, from above and from below, per x-node
    std::vector<double> upper(int j) const;
    std::vector<double> lower(int j) const;
    // [d_z^order Phi^j] across z = 0 from one-sided second-order stencils of
    // the discrete field on each half grid
    std::vector<double> jump(int j, int derivative_order) const;
};

DualProfiles dual_profiles(const FactoredOperator& reversed);
DualProfiles dual_profiles(const Grid& g);

struct MbarResult {
    Eigen::Matrix2d m;
    Eigen::Matrix2d inverse;
    double condition = 0;
    Route route = Route::dual;
};

class ShearContext {
public:
    explicit ShearContext(const Grid& g, std::optional<CutoffPair> cutoffs = std::nullopt,
                          DiffusionStencil stencil = DiffusionStencil::five_point, SolverOptions solver = {});
    ShearContext(const ShearContext&) = delete;
    ShearContext& operator=(const ShearContext&) = delete;

    const Grid& grid() const { return grid_; }
    // the refined grid all solves run on
    const Grid& solve_grid() const { return solve_grid_; }
    const CutoffPair& cutoffs() const { return cutoffs_; }
    DiffusionStencil stencil() const { return stencil_; }
    const SolverOptions& solver() const { return solver_; }
    const FactoredOperator& forward() const { return forward_; }
    const FactoredOperator& reversed() const { return reversed_; }
    const DualProfiles& duals() const { return duals_; }
    // (fbar_i, 0, 0)
    const DataTriplet& fbar_triplet(int i) const { return fbar_[i]; }
    // samples of the localized singular profile i
    const Field& busing_field(int i) const { return busing_[i]; }
    // discrete solution of (fbar_i, 0, 0) on grid(), the discrete counterpart
    // of the localized singular profile; lazily computed and cached
    const Field& singular_solution_field(int i) const;

    // Hat-function averages of d_x^n f on the solve grid, cached per term.
    Field load(const Source& f, int n) const;
    // int d_x f lift_j over the domain, cached per term.
    std::array<double, 2> lift_moments(const Source& f) const;

    // Mbar by the given route; lazily computed and cached.
    const MbarResult& mbar(Route route = Route::dual) const;
    // Context on the grid with doubled spacing, or nullptr when that grid
    // would have fewer than 33 nodes in some direction.
    const ShearContext* coarse() const;

private:
    Grid grid_;
    Grid solve_grid_;
    CutoffPair cutoffs_;
    DiffusionStencil stencil_;
    SolverOptions solver_;
    FactoredOperator forward_;
    FactoredOperator reversed_;
    DualProfiles duals_;
    std::array<DataTriplet, 2> fbar_;
    std::array<Field, 2> busing_;

    mutable std::array<std::once_flag, 2> mbar_once_;
    mutable std::array<std::optional<MbarResult>, 2> mbar_;
    mutable std::array<std::once_flag, 2> sing_once_;
    mutable std::array<Field, 2> sing_;
    mutable std::once_flag coarse_once_;
    mutable std::unique_ptr<ShearContext> coarse_;

    struct CachedTerm {
        std::shared_ptr<const SourceTerm> term;   // keeps the key alive
        std::array<std::optional<Field>, 2> load;
        std::optional<std::array<double, 2>> lift;
    };
    mutable std::mutex cache_mutex_;
    mutable std::vector<CachedTerm> cache_;
    CachedTerm& cached(const std::shared_ptr<const SourceTerm>& t) const;
};

// Shear coefficient fields a = z, b = 0, c0 = 0, d = 1.
SparseOperator shear_operator(const Grid& g, Direction direction = Direction::forward,
                              DiffusionStencil stencil = DiffusionStencil::five_point);

// Boundary values: delta_0 on Sigma_0, delta_1 on Sigma_1, zero at z = +-1.
BoundaryValues inflow_values(const Grid& g, const Boundary& delta0, const Boundary& delta1);
BoundaryValues inflow_values(const Grid& g, const TraceSamples& s0, const TraceSamples& s1);

// Solutions on ctx.grid(); the `_fine` variants return them on ctx.solve_grid().
Field solve_shear(const ShearContext& ctx, const DataTriplet& d);
Field solve_shear_fine(const ShearContext& ctx, const DataTriplet& d);
Field solve_shear(const DataTriplet& d, const Grid& g);

// z d_x w - d_zz w = d_x f,  w = Delta_i on Sigma_i,  w = 0 at z = +-1.
Field solve_dx(const ShearContext& ctx, const DataTriplet& d);
Field solve_dx_fine(const ShearContext& ctx, const DataTriplet& d);
Field solve_dx(const DataTriplet& d, const Grid& g);

// ell^j = d_z^j delta_0(0) - d_z^j delta_1(0) + int d_z^j w(x, 0) dx
OrthoResult ortho_jump(const ShearContext& ctx, const DataTriplet& d, bool estimate_error = true);

// ell^j = d_z^j delta_0(0) - d_z^j delta_1(0) + int d_x f Phi^j
//         + int_{Sigma_0} z Delta_0 Phi^j - int_{Sigma_1} z Delta_1 Phi^j
// The volume integral pairs the hat averages of d_x f with Psi^j and
// integrates d_x f against the lift with Gauss rules.
OrthoResult ortho_dual(const DataTriplet& d, const DualProfiles& duals);
OrthoResult ortho_dual(const ShearContext& ctx, const DataTriplet& d, bool estimate_error = true);

OrthoResult ortho(const ShearContext& ctx, const DataTriplet& d, Route route = Route::jump,
                  bool estimate_error = true);

// Mbar_{jk} = ell^j(fbar_k, 0, 0). Throws SingularMatrixError when the
// condition number exceeds 1e6.
MbarResult mbar(const ShearContext& ctx, Route route = Route::dual);

struct Decomposition {
    std::array<double, 2> c{};
    OrthoResult ell;
    Field u;
    // u - c_0 U_0 - c_1 U_1 with U_i the discrete solution of (fbar_i, 0, 0),
    // i.e. the solution for the data d - c_0 (fbar_0,0,0) - c_1 (fbar_1,0,0)
    Field u_reg;
    // u - c_0 busing_0 - c_1 busing_1 with the sampled profiles; near the
    // corners this keeps the discretization error of the singular part
    Field u_reg_sampled;
};

// c = Mbar^{-1} ell with Mbar from the dual route and ell from the jump
// route.
Decomposition decompose(const ShearContext& ctx, const DataTriplet& d);

// Xi^k = sum_m (Mbar^{-1})_{mk} (fbar_m, 0, 0) with Mbar from the jump route,
// so that ortho_jump(Xi^k) is the identity up to rounding.
std::array<DataTriplet, 2> biorthogonal_basis(const ShearContext& ctx);

// d - ell^0(d) Xi^0 - ell^1(d) Xi^1
DataTriplet project_orthogonal(const ShearContext& ctx, const DataTriplet& d);

struct HigherOrderLevel {
    int n = 0;
    TraceSamples delta0;   // Delta_0^n
    TraceSamples delta1;   // Delta_1^n
    OrthoResult ell;       // ell(d_x^n f, Delta_0^n, Delta_1^n)
};

// Delta_i^0 = delta_i,  Delta_i^n = (d_x^{n-1} f(x_i, .) + d_zz Delta_i^{n-1}) / z,
// sampled on `samples` uniform nodes of each Sigma_i.
std::vector<HigherOrderLevel> higher_order_data(const ShearContext& ctx, const DataTriplet& d, int n_max,
                                                int samples = 257);

} // namespace fbp

#endif
