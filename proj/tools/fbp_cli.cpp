// Command-line driver. Every command reads one JSON configuration, writes
// its artifacts into the output directory and reports through the exit code:
// 0 success, 1 configuration or usage error, 2 numerical failure,
// 3 verification failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fbp/config.hpp"
#include "fbp/linearized.hpp"
#include "fbp/nonlinear.hpp"
#include "fbp/shear.hpp"
#include "fbp/specfun.hpp"
#include "fbp/verify.hpp"

using namespace fbp;
using nlohmann::ordered_json;

namespace {

enum ExitCode { ok = 0, config_error = 1, numerical_error = 2, verify_failure = 3 };

struct Options {
    std::string config;
    std::string out;
    std::vector<int> grid;
    std::optional<std::uint64_t> seed;
    std::vector<int> k;
    std::optional<double> resolution;
};

class Output {
public:
    explicit Output(std::string dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

    std::string path(const std::string& name) const { return (std::filesystem::path(dir_) / name).string(); }

    void text(const std::string& name, const std::string& content) const
    {
        std::ofstream f(path(name), std::ios::binary);
        if (!f)
            throw ConfigError("cannot write '" + path(name) + "'");
        f << content;
        std::cout << "wrote " << path(name) << "\n";
    }

    void field(const std::string& name, const Field& u) const { text(name, to_csv(u)); }
    void json(const std::string& name, const ordered_json& j) const { text(name, j.dump(2) + "\n"); }

private:
    std::string dir_;
};

RunConfig resolve(const Options& o)
{
    RunConfig c;
    if (!o.config.empty())
        c = load_config(o.config);
    if (!o.out.empty())
        c.output = o.out;
    if (!o.grid.empty()) {
        std::vector<ConfigIssue> issues;
        for (int n : o.grid)
            if (n < 33 || n % 2 == 0 || n > 4097)
                issues.push_back({"--grid", "grid sizes must be odd, at least 33 and at most 4097"});
        if (!issues.empty())
            throw ConfigValidationError(issues);
        c.nx = c.verify.nx = o.grid[0];
        c.nz = c.verify.nz = o.grid[1];
    }
    if (o.seed)
        c.verify.seed = *o.seed;
    if (!o.k.empty()) {
        for (int k : o.k)
            if (k < AngularProfile<double>::k_min || k > AngularProfile<double>::k_max)
                throw ConfigValidationError(std::vector<ConfigIssue>{{"--k", "unsupported profile index; must lie in [-2, 3]"}});
        c.profiles.k = o.k;
    }
    if (o.resolution) {
        if (!(*o.resolution > 0))
            throw ConfigValidationError(std::vector<ConfigIssue>{{"--resolution", "must be positive"}});
        c.profiles.resolution = *o.resolution;
    }
    return c;
}

ordered_json norms_json(const NormRecord& n)
{
    return {{"l2", n.l2},
            {"l2x_h1z", n.l2x_h1z},
            {"h1x_h1z", n.h1x_h1z},
            {"z0", n.z0},
            {"trace_l2z_x0", n.trace_l2z_x0},
            {"trace_l2z_x1", n.trace_l2z_x1},
            {"trace_h1z_x0", n.trace_h1z_x0},
            {"trace_h1z_x1", n.trace_h1z_x1}};
}

ordered_json matrix_json(const Eigen::Matrix2d& m)
{
    return {{m(0, 0), m(0, 1)}, {m(1, 0), m(1, 1)}};
}

std::unique_ptr<ShearContext> make_context(const RunConfig& c)
{
    if (c.scheme != Scheme::upwind)
        throw ConfigValidationError(std::vector<ConfigIssue>{{"/scheme/type", "only the solve command supports central-viscous"}});
    return std::make_unique<ShearContext>(make_grid(c), make_cutoffs(c), DiffusionStencil::five_point, c.solver);
}

DataTriplet data_for(const RunConfig& c, const ShearContext& ctx)
{
    const DataTriplet d = make_triplet(c);
    return c.data.project_orthogonal ? project_orthogonal(ctx, d) : d;
}

// Polyline of G_0 over (-7, 7) in a fixed 640 x 400 viewBox.
std::string profile_svg(const AngularProfile<double>& p)
{
    const double w = 640, h = 400, m = 40;
    const double t0 = -7, t1 = 7, g0 = -0.05, g1 = 1.05;
    const auto X = [&](double t) { return m + (t - t0) / (t1 - t0) * (w - 2 * m); };
    const auto Y = [&](double g) { return h - m - (g - g0) / (g1 - g0) * (h - 2 * m); };
    std::string s;
    char buf[160];
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 640 400\" width=\"640\" height=\"400\">\n";
    s += "<rect x=\"0\" y=\"0\" width=\"640\" height=\"400\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof buf, "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"gray\"/>\n", X(t0),
                  Y(0), X(t1), Y(0));
    s += buf;
    std::snprintf(buf, sizeof buf, "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"gray\"/>\n", X(0),
                  Y(g0), X(0), Y(g1));
    s += buf;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"gray\" stroke-dasharray=\"4 4\"/>\n",
                  X(t0), Y(1), X(t1), Y(1));
    s += buf;
    s += "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
    for (int i = 0; i <= 1400; i += 5) {
        const double t = t0 + i * 1e-2;
        std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", i ? " " : "", X(t), Y(p.eval(t)));
        s += buf;
    }
    s += "\"/>\n";
    std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" font-size=\"14\">G0(t)</text>\n", X(0.3), Y(1.0) - 6);
    s += buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\">-7</text>\n", X(t0), Y(0) + 16);
    s += buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\">7</text>\n", X(t1) - 8, Y(0) + 16);
    s += buf;
    s += "</svg>\n";
    return s;
}

int cmd_profiles(const RunConfig& c)
{
    const Output out(c.output);
    const ProfilesSpec& p = c.profiles;
    const long long n = (long long)std::floor((p.t_max - p.t_min) / p.resolution + 1e-9);
    for (int k : p.k) {
        const AngularProfile<double>& g = angular_profile(k);
        std::string s = "t,G,dG\n";
        for (long long i = 0; i <= n; ++i) {
            const double t = p.t_min + double(i) * p.resolution;
            s += format_double(t) + "," + format_double(g.eval(t)) + "," + format_double(g.deriv(t)) + "\n";
        }
        out.text("profile_k" + std::to_string(k) + ".csv", s);
    }
    out.text("profile_G0.svg", profile_svg(angular_profile(0)));
    return ok;
}

int cmd_solve(const RunConfig& c)
{
    const Output out(c.output);
    Field u;
    double residual = 0;
    if (c.scheme == Scheme::central_viscous) {
        // central differences in x plus epsilon d_xx on the uniform grid
        if (c.data.project_orthogonal)
            throw ConfigValidationError(
                std::vector<ConfigIssue>{{"/data/project_orthogonal", "needs the upwind scheme"}});
        const Grid g = make_grid(c);
        const DataTriplet d = make_triplet(c);
        const Field a = Field::sample(g, [](double, double z) { return z; });
        const Field zero(g);
        const Field one = Field::sample(g, [](double, double) { return 1.0; });
        const FactoredOperator op(assemble(g, a, zero, zero, one, c.epsilon), c.solver);
        u = op.solve(load(d.f, g), inflow_values(g, d.delta0, d.delta1));
        residual = op.last_residual();
    } else {
        const auto ctx = make_context(c);
        const DataTriplet d = data_for(c, *ctx);
        if (c.flow.family == FlowFamily::shear) {
            u = solve_shear(*ctx, d);
            residual = ctx->forward().last_residual();
        } else {
            const LinearizedContext lc(*ctx, make_flow(c, ctx->solve_grid()));
            u = solve_linearized(lc, d);
            residual = lc.forward().last_residual();
        }
    }
    out.field("solution.csv", u);
    ordered_json j = norms_json(norms(u));
    j["solver_residual"] = residual;
    out.json("norms.json", j);
    return ok;
}

int cmd_dual(const RunConfig& c)
{
    const Output out(c.output);
    const auto ctx = make_context(c);
    for (int j = 0; j < 2; ++j)
        out.field("dual_phi" + std::to_string(j) + ".csv", restrict_to(ctx->duals().phi[j], ctx->grid()));
    const MbarResult& md = ctx->mbar(Route::dual);
    const MbarResult& mj = ctx->mbar(Route::jump);
    out.json("mbar.json", {{"dual", {{"m", matrix_json(md.m)}, {"condition", md.condition}}},
                           {"jump", {{"m", matrix_json(mj.m)}, {"condition", mj.condition}}}});
    return ok;
}

int cmd_decompose(const RunConfig& c)
{
    const Output out(c.output);
    const auto ctx = make_context(c);
    const Decomposition dec = decompose(*ctx, data_for(c, *ctx));
    const MbarResult& m = ctx->mbar(Route::dual);
    ordered_json j;
    j["l0"] = dec.ell[0];
    j["l1"] = dec.ell[1];
    j["c0"] = dec.c[0];
    j["c1"] = dec.c[1];
    j["ell_route"] = to_string(dec.ell.route);
    j["ell_error_estimate"] = std::isnan(dec.ell.error_estimate) ? ordered_json() : ordered_json(dec.ell.error_estimate);
    j["mbar_route"] = to_string(m.route);
    j["mbar"] = matrix_json(m.m);
    j["mbar_condition"] = m.condition;
    out.json("decomposition.json", j);
    out.field("u_reg.csv", dec.u_reg);
    return ok;
}

int cmd_nonlinear(const RunConfig& c)
{
    const Output out(c.output);
    const auto ctx = make_context(c);
    const NonlinearResult r = iterate(*ctx, data_for(c, *ctx), c.nonlinear);
    out.text("iteration_report.json", to_json(r.report));
    out.field("nonlinear_u.csv", r.u);
    if (r.report.status == IterationStatus::diverged) {
        std::cerr << "error: nonlinear iteration diverged\n";
        return numerical_error;
    }
    return ok;
}

int cmd_verify(const RunConfig& c)
{
    const Output out(c.output);
    const VerifyReport rep = run_verify(c);
    const std::string text = rep.text();
    std::cout << text;
    out.text("verify_report.txt", text);
    return rep.all_pass() ? ok : verify_failure;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Forward-backward parabolic corner-singularity toolkit"};
    app.require_subcommand(1);
    Options o;
    const auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "JSON configuration file")->check(CLI::ExistingFile);
        sub->add_option("--out", o.out, "output directory (overrides \"output\")");
        sub->add_option("--grid", o.grid, "grid size override NX NZ")->expected(2);
        sub->add_option("--seed", o.seed, "seed of the randomized verify probes");
    };
    struct Command {
        const char* name;
        const char* help;
        int (*run)(const RunConfig&);
    };
    const std::vector<Command> commands{
        {"profiles", "tabulate angular profiles G_k and plot G_0", cmd_profiles},
        {"solve", "solve the shear or linearized problem; writes solution.csv and norms.json", cmd_solve},
        {"dual", "dual profiles and the matrix Mbar", cmd_dual},
        {"decompose", "singular coefficients c and regular part u_reg", cmd_decompose},
        {"nonlinear", "fixed-point scheme for the nonlinear problem", cmd_nonlinear},
        {"verify", "run the invariant suite", cmd_verify},
    };
    std::vector<CLI::App*> subs;
    for (const Command& cmd : commands) {
        CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
        common(sub);
        if (std::string(cmd.name) == "profiles") {
            sub->add_option("--k", o.k, "profile indices in [-2, 3]");
            sub->add_option("--resolution", o.resolution, "t step");
        }
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    try {
        const RunConfig c = resolve(o);
        for (std::size_t i = 0; i < commands.size(); ++i)
            if (subs[i]->parsed())
                return commands[i].run(c);
    } catch (const ConfigValidationError& e) {
        std::cerr << e.what() << "\n" << e.to_json();
        return config_error;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return config_error;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return numerical_error;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return config_error;
    }
    return config_error;
}
