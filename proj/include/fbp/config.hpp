#ifndef FBP_CONFIG_HPP
#define FBP_CONFIG_HPP

// Run configuration: a single JSON document, validated as a whole before
// anything is computed. Every key is optional; see README.md for the schema.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fbp/data.hpp"
#include "fbp/discretize.hpp"
#include "fbp/linearized.hpp"
#include "fbp/nonlinear.hpp"
#include "fbp/shear.hpp"

namespace fbp {

struct ConfigIssue {
    std::string path;      // JSON pointer of the offending key, e.g. "/grid/nx"
    std::string message;
};

// ConfigError carrying every problem found during validation.
class ConfigValidationError : public ConfigError {
public:
    explicit ConfigValidationError(std::vector<ConfigIssue> issues);
    const std::vector<ConfigIssue>& issues() const { return issues_; }
    // {"errors": [{"path": ..., "message": ...}, ...]}
    std::string to_json() const;

private:
    std::vector<ConfigIssue> issues_;
};

struct BumpSpec {
    double amplitude = 1, xc = 0.5, zc = 0, sx = 0.05, sz = 0.1;
};

struct DataSpec {
    std::vector<BumpSpec> bumps;
    // multiples of the sources fbar_0, fbar_1
    std::array<double, 2> fbar{};
    // CSV field "x,z,value" added to the source
    std::string source_csv;
    // polynomial coefficients of delta_0 (on [0,1]) and delta_1 (on [-1,0])
    std::vector<double> delta0, delta1;
    // CSV "z,value" on uniform nodes, added to the boundary data
    std::string delta0_csv, delta1_csv;
    double scale = 1;
    // subtract ell(d) Xi^0 + ell(d) Xi^1 before use
    bool project_orthogonal = false;
};

enum class FlowFamily { shear, sine, csv };

// ubar = y + amplitude sin(pi (x - x0)/(x1 - x0)) (1 - y^2) (1 + shape y) for `sine`
struct FlowSpec {
    FlowFamily family = FlowFamily::shear;
    double amplitude = 0;
    double shape = 0;
    std::string csv;
};

enum class Scheme { upwind, central_viscous };

struct ProfilesSpec {
    std::vector<int> k{0};
    double t_min = -7, t_max = 7;
    double resolution = 1e-2;
};

struct VerifySpec {
    int nx = 65, nz = 65;
    std::uint64_t seed = 20261014;
    // empty selects every suite
    std::vector<std::string> suites;
};

struct RunConfig {
    double x0 = 0, x1 = 1;
    int nx = 65, nz = 65;
    Scheme scheme = Scheme::upwind;
    double epsilon = 0;
    SolverOptions solver;
    DataSpec data;
    FlowSpec flow;
    double r_inner = 0.1, r_outer = 0.2;
    NonlinearOptions nonlinear;
    ProfilesSpec profiles;
    VerifySpec verify;
    std::string output = "out";
};

// Parses and validates; throws ConfigValidationError listing every problem.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);
// The configuration with every default filled in, as a JSON document.
std::string to_json(const RunConfig& c);

Grid make_grid(const RunConfig& c);
CutoffPair make_cutoffs(const RunConfig& c);
// The triplet described by c.data, before the optional projection.
DataTriplet make_triplet(const RunConfig& c);
FlowProfile make_flow(const RunConfig& c, const Grid& g);

} // namespace fbp

#endif
