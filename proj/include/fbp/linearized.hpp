#ifndef FBP_LINEARIZED_HPP
#define FBP_LINEARIZED_HPP

// The problem ubar d_x u - d_yy u = f around a flow ubar(x, y) close to the
// shear flow y: the critical curve ubar(x, ybar(x)) = 0, the change of
// variables ubar(x, Y(x, z)) = z, the transformed coefficients, the forward
// and d_x u solves, and the functionals ell_ubar^j through the jump
// characterization along the critical curve.
//
// All solves run in the (x, y) variables on the refined solve grid of a
// ShearContext, so that at ubar = y every operation reproduces its shear
// counterpart.

#include <functional>
#include <memory>
#include <mutex>
#include <vector>

#include "fbp/data.hpp"
#include "fbp/discretize.hpp"
#include "fbp/shear.hpp"

namespace fbp {

// Cubic Lagrange interpolation in y of column i of u, using the four nodes
// around y (shifted inwards at the walls).
double column_cubic(const Field& u, int i, double y);

// Sampled flow ubar with its derivatives and critical curve. Immutable.
class FlowProfile {
public:
    // Throws InadmissibleError unless d_y ubar >= 1/2 on all nodes,
    // |ubar(x, +-1) -+ 1| <= 1e-10 and |ybar| < 1/4.
    explicit FlowProfile(Field ubar);
    static FlowProfile shear(const Grid& g);
    static FlowProfile sample(const Grid& g, const std::function<double(double, double)>& ubar);

    const Grid& grid() const { return u_.grid(); }
    const Field& u() const { return u_; }
    const Field& uy() const { return uy_; }
    const Field& ux() const { return ux_; }
    const Field& uyy() const { return uyy_; }
    // ybar at every x-node
    const std::vector<double>& critical() const { return ybar_; }
    // ||ubar - y||_{H^1_x H^1_z}
    double smallness() const { return smallness_; }

private:
    Field u_, uy_, ux_, uyy_;
    std::vector<double> ybar_;
    double smallness_ = 0;
};

// ||ubar - ubar'||_{H^1_x H^1_z}; both flows must share the grid.
double flow_distance(const FlowProfile& a, const FlowProfile& b);

// Root of ubar(x_i, .) per column by bracketing between nodes and
// bisection/secant steps on the cubic column interpolant, to 1e-12. Throws
// InadmissibleError when a column has no sign change.
std::vector<double> critical_curve(const Field& ubar);

// Y(x, z) with ubar(x, Y(x, z)) = z on the nodes of the grid; Y = +-1 at
// z = +-1. Throws ConvergenceError when a root cannot be bracketed.
Field change_of_variables(const FlowProfile& flow);

struct Coefficients {
    Field alpha;    // (d_y ubar)^2 at (x, Y)
    Field gamma1;   // d_x ubar at (x, Y)
    Field gamma2;   // -d_yy ubar at (x, Y)
    Field gamma;    // z gamma1 + gamma2
};

// Composition with Y by linear interpolation in y of the cached derivatives.
Coefficients coefficients(const FlowProfile& flow, const Field& Y);

// The flow resampled onto the solve grid of a shear context, together with
// the factored forward operator (a = ubar) and the operator of the d_x u
// problem (a = ubar, c0 = d_x ubar), both built on first use.
class LinearizedContext {
public:
    LinearizedContext(const ShearContext& shear, const FlowProfile& flow);
    LinearizedContext(const LinearizedContext&) = delete;
    LinearizedContext& operator=(const LinearizedContext&) = delete;

    const ShearContext& shear() const { return shear_; }
    // the flow on shear().solve_grid()
    const FlowProfile& flow() const { return flow_; }
    const FactoredOperator& forward() const;
    const FactoredOperator& dx_operator() const;

private:
    const ShearContext& shear_;
    FlowProfile flow_;
    mutable std::once_flag forward_once_, dx_once_;
    mutable std::unique_ptr<FactoredOperator> forward_, dx_;
};

// ubar d_x u - d_yy u = f,  u = delta_i on the inflow part of {x_i} x (-1, 1),
// u = 0 at y = +-1. delta_0 is extended by 0 to y < 0 and delta_1 to y > 0.
// Results on shear().grid(); the `_fine` variants return the solve grid.
Field solve_linearized(const LinearizedContext& lc, const DataTriplet& d);
Field solve_linearized_fine(const LinearizedContext& lc, const DataTriplet& d);
Field solve_linearized(const FlowProfile& flow, const DataTriplet& d, const Grid& g);

// ubar d_x w + (d_x ubar) w - d_yy w = d_x f with the inflow data
// (f(x_i, y) + delta_i''(y)) / ubar(x_i, y) and w = 0 at y = +-1. Throws
// IncompatibleDataError when the numerator does not vanish where ubar does.
Field solve_dx_linearized(const LinearizedContext& lc, const DataTriplet& d);
Field solve_dx_linearized_fine(const LinearizedContext& lc, const DataTriplet& d);
Field solve_dx_linearized(const FlowProfile& flow, const DataTriplet& d, const Grid& g);

// How w and d_y w are taken on the critical curve: `curve` interpolates them
// cubically onto (x, ybar(x)); `transformed` first samples W(x, z) = w(x, Y(x, z))
// on the z-grid and differentiates W at z = 0, which agrees up to O(hz^2).
enum class CurveSampling { curve, transformed };

// ell^0 = dt_0(0) - dt_1(0) + int w(x, ybar(x)) dx
// ell^1 = dt_0'(0) - dt_1'(0) + int (w_y / ubar_y)(x, ybar(x)) dx
// with dt_i(z) = delta_i(Y(x_i, z)).
OrthoResult ortho_linearized(const LinearizedContext& lc, const DataTriplet& d,
                             CurveSampling sampling = CurveSampling::curve);
OrthoResult ortho_linearized(const FlowProfile& flow, const DataTriplet& d, const Grid& g);

} // namespace fbp

#endif
