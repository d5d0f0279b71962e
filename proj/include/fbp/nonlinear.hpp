#ifndef FBP_NONLINEAR_HPP
#define FBP_NONLINEAR_HPP

// Fixed-point scheme for (y + u) d_x u - d_yy u = f + nu^0 f^0 + nu^1 f^1:
// every step solves the problem linearized around y + u_n, with the
// corrector coefficients nu chosen so that the corrected data satisfy the
// two orthogonality conditions of that flow. The limit nu = nu(d) charts
// the set of data for which the nonlinear problem has a regular solution.

#include <array>
#include <string>
#include <vector>

#include "fbp/data.hpp"
#include "fbp/discretize.hpp"
#include "fbp/shear.hpp"

namespace fbp {

enum class Initialization { cutoff, zero };

struct NonlinearOptions {
    // stop once the discrete L2 increment of u drops to tol
    double tol = 1e-9;
    int n_max = 50;
    // Keep Mbar = identity and update nu <- nu - ell_n(d + nu Xi) instead of
    // recomputing M_n = (ell_n(Xi^k)) every step.
    bool frozen = false;
    Initialization init = Initialization::cutoff;
    // data with hnorm above eta_bar are rejected; calibrated constant
    double eta_bar = 1e4;
    // the first iterate must satisfy max |u_1| <= this; calibrated constant
    double first_iterate_bound = 0.05;
};

struct IterationRecord {
    int n = 0;
    double increment_l2 = 0;    // ||u_{n+1} - u_n||_L2
    double increment_h1 = 0;    // ||u_{n+1} - u_n||_{H^1_x H^1_z}
    std::array<double, 2> nu{};   // nu_{n+1}
    std::array<double, 2> ell{};  // ell_n(d), the functionals of the uncorrected data
    double condition = 0;         // of M_n
};

enum class IterationStatus { converged, max_iter, diverged };
const char* to_string(IterationStatus s);

struct IterationReport {
    std::vector<IterationRecord> records;
    IterationStatus status = IterationStatus::max_iter;
    // ||(y + u) D_x u - D_yy u - f - nu^0 f^0 - nu^1 f^1||_L2 over the equation rows
    double residual = 0;
    // largest ratio of consecutive L2 increments from the third step on
    double contraction = 0;
};

// JSON document with every field of the report.
std::string to_json(const IterationReport& r);

struct NonlinearResult {
    Field u;        // on ctx.grid()
    Field u_fine;   // on ctx.solve_grid()
    std::array<double, 2> nu{};
    IterationReport report;
};

// u_0 = delta_0(y) chi((x - x0)/L) + delta_1(y) chi((x1 - x)/L), L = x1 - x0,
// with chi the plateau (1 on |s| <= 1/3, 0 on |s| >= 1/2), delta_0
// extended by 0 to y < 0 and delta_1 to y > 0.
Field initialize(const DataTriplet& d, const Grid& g);

// Throws InadmissibleError when the data or an iterate leave the admissible
// neighbourhood, SingularMatrixError when some M_n is ill-conditioned. A run
// that stops on growing increments returns with status `diverged`.
NonlinearResult iterate(const ShearContext& ctx, const DataTriplet& d, const NonlinearOptions& opts = {});
NonlinearResult iterate(const DataTriplet& d, const Grid& g, const NonlinearOptions& opts = {});

// The residual reported in IterationReport, for a field on ctx.solve_grid().
double nonlinear_residual(const ShearContext& ctx, const Field& u_fine, const DataTriplet& d,
                          const std::array<double, 2>& nu);

// nu of a converged iteration; throws DivergenceError when it does not converge.
std::array<double, 2> manifold_nu(const ShearContext& ctx, const DataTriplet& d_perp,
                                  const NonlinearOptions& opts = {});

} // namespace fbp

#endif
