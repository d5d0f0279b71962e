#ifndef FBP_VERIFY_HPP
#define FBP_VERIFY_HPP

// Invariant suite run by `fbp_cli verify`, plus the probe data it shares
// with the test programs. Reports are plain text with fixed number
// formatting and no timings, so two runs of one build compare byte for byte.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fbp/config.hpp"
#include "fbp/data.hpp"
#include "fbp/discretize.hpp"

namespace fbp {

// value <= bound, value < bound, value >= bound, bound <= value <= upper
enum class Comparison { at_most, below, at_least, within };

struct CheckResult {
    std::string suite;
    std::string name;
    double value = 0;
    Comparison cmp = Comparison::at_most;
    double bound = 0;
    double upper = 0;
    bool pass = false;
    // set when the check threw instead of producing a value
    std::string error;
};

struct VerifyReport {
    int nx = 0, nz = 0;
    std::uint64_t seed = 0;
    std::vector<CheckResult> checks;

    bool all_pass() const;
    int failures() const;
    std::string text() const;
};

// Suite names in report order.
const std::vector<std::string>& suite_names();

// Runs the selected suites (all when c.verify.suites is empty) on c.verify.nx x c.verify.nz
// grids over c's domain; independent suites run concurrently. Throws
// ConfigError for unknown suite names.
VerifyReport run_verify(const RunConfig& c);

// Random compatible triplet: one or two Gaussian bumps near x = (x0+x1)/2 and
// boundary data z^3 (1 - z)(a + b z + c z^2) with a = -(4b + 5c)/3, mirrored
// to [-1, 0] for delta_1.
DataTriplet random_triplet(std::mt19937_64& rng, double x0 = 0, double x1 = 1);

// Data of the exact solution u = sin(pi z)(1 + sin(pi (x - x0)/(x1 - x0))).
DataTriplet manufactured_triplet(double x0 = 0, double x1 = 1);
double manufactured_solution(double x, double z, double x0 = 0, double x1 = 1);
// Discrete L2 error of solve_shear against the exact solution on g.
double manufactured_error(const Grid& g);

// Bump (1, xc, 0.2, 0.05, 0.15) plus boundary data of the random_triplet
// family with b = 0.75, c = 0, times `scale`.
DataTriplet nonlinear_probe_triplet(double scale, double x0 = 0, double x1 = 1);

// max over t in [-10, 10] (step 1e-2) of
// |c_k G_{k-1} - (1+t^2)^(1/2)/3 ((1/2 + 3k) G_k - t (1+t^2) G_k')|,
// with G_k' from fifth-order-accurate central differences of G_k.
double recurrence_residual(int k);
// max over t in [-5, 5] of the central-difference residual (h = 1e-3) of
// the Kummer-side ODE for lambda = 1/2.
double ode_residual();
// max over `samples` random points with r in [0.05, 2], |t| <= 5 of the
// finite-difference residual of (z d_x - d_zz) v_0.
double homogeneous_residual(std::mt19937_64& rng, int samples = 100);

} // namespace fbp

#endif
