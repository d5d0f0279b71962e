// Acceptance run: one PASS/FAIL line per criterion, exit code 1 when any
// criterion fails. Contexts at 65, 129 and 257 nodes per direction are
// built once and shared between criteria.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fbp/linearized.hpp"
#include "fbp/nonlinear.hpp"
#include "fbp/shear.hpp"
#include "fbp/specfun.hpp"
#include "fbp/verify.hpp"

using namespace fbp;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

const double pi = std::acos(-1.0);

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string sci(double v) { return fmt("%.3e", v); }

// Collects sub-checks of one criterion; passes iff all of them do.
struct Criterion {
    std::vector<std::string> notes;
    bool pass = true;

    void check(bool ok, const std::string& note)
    {
        pass = pass && ok;
        notes.push_back(note + (ok ? "" : " [fail]"));
    }
};

const ShearContext& context(int n)
{
    static std::map<int, std::unique_ptr<ShearContext>> cache;
    auto& slot = cache[n];
    if (!slot)
        slot = std::make_unique<ShearContext>(Grid(0, 1, n, n));
    return *slot;
}

double max_abs(double a, double b) { return std::max(std::abs(a), std::abs(b)); }

double relative_gap(const OrthoResult& a, const OrthoResult& b)
{
    return max_abs(a[0] - b[0], a[1] - b[1]) / max_abs(b[0], b[1]);
}

void c1(Criterion& c)
{
    const auto t0 = Clock::now();
    const AngularProfile<double>& g = angular_profile(0);
    bool decreasing = true;
    double prev = g.eval(-7);
    for (int i = -699; i <= 700; ++i) {
        const double v = g.eval(i * 1e-2);
        decreasing = decreasing && v < prev;
        prev = v;
    }
    const double gm7 = g.eval(-7), g7 = g.eval(7), g0 = g.eval(0);
    const double elapsed = seconds_since(t0);
    const double formula = std::pow(9.0, 1.0 / 6) * fbp::gamma(1.0 / 3) / fbp::gamma(1.0 / 6);
    c.check(decreasing, "strictly decreasing on the 1e-2 grid of [-7, 7]");
    c.check(std::abs(gm7 - 1) <= 0.1, "|G0(-7) - 1| = " + sci(std::abs(gm7 - 1)) + " <= 0.1");
    c.check(std::abs(g7) <= 0.05, "|G0(7)| = " + sci(std::abs(g7)) + " <= 0.05");
    c.check(std::abs(g0 - 0.694213) <= 1e-4, "G0(0) = " + fmt("%.9f", g0) + ", 0.694213 +- 1e-4");
    c.check(std::abs(g0 - formula) <= 1e-12, "gamma formula 9^(1/6) G(1/3)/G(1/6) = " + fmt("%.9f", formula));
    c.check(elapsed < 1, "runtime " + fmt("%.3f", elapsed) + " s < 1 s");
}

void c2(Criterion& c)
{
    c.check(AngularProfile<double>::c(0) == 0.25, "c0 = " + fmt("%.6g", AngularProfile<double>::c(0)));
    c.check(AngularProfile<double>::c(1) == -35.0 / 4, "c1 = " + fmt("%.6g", AngularProfile<double>::c(1)));
    for (int k : {0, 1}) {
        const double r = recurrence_residual(k);
        c.check(r <= 1e-7, "k = " + std::to_string(k) + ": residual " + sci(r) + " <= 1e-7");
    }
}

void c3(Criterion& c)
{
    const double r = ode_residual();
    c.check(r <= 1e-4, "residual " + sci(r) + " <= 1e-4");
}

void c4(Criterion& c)
{
    std::mt19937_64 rng(20261014);
    const double r = homogeneous_residual(rng, 100);
    c.check(r <= 1e-5, "residual " + sci(r) + " <= 1e-5 at 100 points");
}

void c5(Criterion& c)
{
    const double e65 = manufactured_error(Grid(0, 1, 65, 65));
    const double e129 = manufactured_error(Grid(0, 1, 129, 129));
    const double e257 = manufactured_error(Grid(0, 1, 257, 257));
    c.check(e65 / e129 >= 1.7, "65 -> 129: " + sci(e65) + " / " + sci(e129) + " = " + fmt("%.3f", e65 / e129));
    c.check(e129 / e257 >= 1.7, "129 -> 257: " + sci(e129) + " / " + sci(e257) + " = " + fmt("%.3f", e129 / e257));
}

void c6(Criterion& c)
{
    std::mt19937_64 rng(20261014);
    std::vector<DataTriplet> d;
    for (int k = 0; k < 20; ++k)
        d.push_back(random_triplet(rng));
    double g129 = 0, g257 = 0;
    for (const DataTriplet& t : d) {
        g129 = std::max(g129, relative_gap(ortho_jump(context(129), t, false), ortho_dual(context(129), t, false)));
        g257 = std::max(g257, relative_gap(ortho_jump(context(257), t, false), ortho_dual(context(257), t, false)));
    }
    c.check(g129 <= 0.05, "worst relative gap at 129: " + sci(g129) + " <= 0.05");
    c.check(g257 <= 0.7 * g129, "worst relative gap at 257: " + sci(g257) + " <= 0.7 x gap(129)");
}

void c7(Criterion& c)
{
    for (int n : {65, 129, 257}) {
        const ShearContext& ctx = context(n);
        const auto xi = biorthogonal_basis(ctx);
        double worst = 0;
        for (int k = 0; k < 2; ++k) {
            const OrthoResult l = ortho_jump(ctx, xi[k], false);
            for (int j = 0; j < 2; ++j)
                worst = std::max(worst, std::abs(l[j] - (j == k ? 1.0 : 0.0)));
        }
        c.check(worst <= 1e-8, std::to_string(n) + "^2: " + sci(worst) + " <= 1e-8");
    }
}

void c8(Criterion& c)
{
    // mixed derivative norms over the nodes within 0.1 of the corners
    const double radius = 0.1;
    std::array<Decomposition, 3> dec;
    const int sizes[3] = {65, 129, 257};
    for (int k = 0; k < 3; ++k)
        dec[k] = decompose(context(sizes[k]), context(sizes[k]).fbar_triplet(0));
    const auto& d129 = dec[1].c;
    const auto& d257 = dec[2].c;
    c.check(std::abs(d129[0] - 1) <= 0.1, "|c0 - 1| at 129: " + sci(std::abs(d129[0] - 1)) + " <= 0.1");
    c.check(std::abs(d129[1]) <= 0.05, "|c1| at 129: " + sci(std::abs(d129[1])) + " <= 0.05");
    c.check(std::abs(d257[0] - 1) < std::abs(d129[0] - 1), "|c0 - 1| at 257: " + sci(std::abs(d257[0] - 1)));
    c.check(std::abs(d257[1]) < std::abs(d129[1]), "|c1| at 257: " + sci(std::abs(d257[1])));
    // the gated refinement is 129 -> 257; at 65 the error of c0 is small by
    // cancellation, so the 65 -> 129 ratios are reported only
    for (int k = 0; k < 2; ++k) {
        const std::string step = std::to_string(sizes[k]) + " -> " + std::to_string(sizes[k + 1]);
        const double reg = mixed_derivative_norm_near_corners(dec[k + 1].u_reg, radius)
                           / mixed_derivative_norm_near_corners(dec[k].u_reg, radius);
        const double raw = mixed_derivative_norm_near_corners(dec[k + 1].u, radius)
                           / mixed_derivative_norm_near_corners(dec[k].u, radius);
        if (k == 0) {
            c.notes.push_back(step + ": u_reg ratio " + fmt("%.3f", reg) + ", raw ratio " + fmt("%.3f", raw)
                              + " (not gated; |c0 - 1| at 65: " + sci(std::abs(dec[0].c[0] - 1)) + ")");
            continue;
        }
        c.check(reg <= 1.2, step + ": u_reg ratio " + fmt("%.3f", reg) + " <= 1.2");
        c.check(raw >= 1.4, step + ": raw ratio " + fmt("%.3f", raw) + " >= 1.4");
    }
}

void c9(Criterion& c)
{
    const Grid g(0, 1, 129, 129);
    std::mt19937_64 rng(20261014);
    std::vector<DataTriplet> data;
    for (int k = 0; k < 3; ++k)
        data.push_back(random_triplet(rng));
    const ShearContext a(g, make_cutoffs(0, 1, 0.1, 0.2));
    const ShearContext b(g, make_cutoffs(0, 1, 0.1, 0.15));
    for (std::size_t k = 0; k < data.size(); ++k) {
        const auto ca = decompose(a, data[k]).c, cb = decompose(b, data[k]).c;
        const double drift = max_abs(ca[0] - cb[0], ca[1] - cb[1]) / max_abs(ca[0], ca[1]);
        c.check(drift <= 0.05, "random triplet " + std::to_string(k) + ": drift " + sci(drift)
                                   + " <= 0.05 (c = " + fmt("%.4f", ca[0]) + ", " + fmt("%.4f", ca[1]) + ")");
    }
}

void c10(Criterion& c)
{
    std::mt19937_64 rng(20261014);
    const DataTriplet d = random_triplet(rng);
    const auto lipschitz = [&](const ShearContext& ctx, double a) {
        const FlowProfile flow = FlowProfile::sample(ctx.solve_grid(), [a](double x, double y) {
            return y + a * std::sin(pi * x) * (1 - y * y) * (1 + 0.5 * y);
        });
        const OrthoResult l = ortho_linearized(LinearizedContext(ctx, flow), d);
        const OrthoResult b = ortho_jump(ctx, d, false);
        return max_abs(l[0] - b[0], l[1] - b[1]) / flow.smallness();
    };
    for (int n : {65, 129}) {
        const ShearContext& ctx = context(n);
        const LinearizedContext lc(ctx, FlowProfile::shear(ctx.solve_grid()));
        const OrthoResult l = ortho_linearized(lc, d), b = ortho_jump(ctx, d, false);
        const double gap = max_abs(l[0] - b[0], l[1] - b[1]);
        c.check(gap <= 1e-9, std::to_string(n) + "^2 reduction at ubar = y: " + sci(gap) + " <= 1e-9");
    }
    for (double a : {0.02, 0.05}) {
        const double r65 = lipschitz(context(65), a), r129 = lipschitz(context(129), a);
        const double change = std::abs(r129 / r65 - 1);
        c.check(std::isfinite(r65) && std::isfinite(r129) && change <= 0.25,
                "amplitude " + fmt("%.2f", a) + ": ratio " + sci(r65) + " (65^2), " + sci(r129)
                    + " (129^2), change " + fmt("%.3f", change) + " <= 0.25");
    }
}

void c11(Criterion& c)
{
    const auto t0 = Clock::now();
    const double scale = 1e-2;
    const ShearContext& ctx = context(129);
    const Grid& g = ctx.grid();
    const DataTriplet d = nonlinear_probe_triplet(scale);
    NonlinearOptions o;
    o.tol = 1e-9;
    o.n_max = 15;
    const NonlinearResult r = iterate(ctx, d, o);
    const double bound = 10 * (g.hx() + g.hz() * g.hz()) * scale;
    const double last = r.report.records.empty() ? INFINITY : r.report.records.back().increment_l2;
    c.check(r.report.status == IterationStatus::converged,
            std::string("status ") + to_string(r.report.status) + " after "
                + std::to_string(r.report.records.size()) + " <= 15 iterations");
    c.check(last <= 1e-9, "final increment " + sci(last) + " <= 1e-9");
    c.check(r.report.residual <= bound, "residual " + sci(r.report.residual) + " <= " + sci(bound));

    const DataTriplet p = project_orthogonal(ctx, d);
    const auto full = manifold_nu(ctx, p, o), half = manifold_nu(ctx, 0.5 * p, o);
    for (int k = 0; k < 2; ++k) {
        if (std::abs(full[k]) <= 1e-10) {
            c.notes.push_back("nu component " + std::to_string(k) + " below 1e-10, skipped");
            continue;
        }
        const double q = half[k] / full[k];
        c.check(q >= 0.125 && q <= 0.5,
                "nu(P/2)/nu(P) component " + std::to_string(k) + " = " + fmt("%.4f", q) + " in [1/8, 1/2]");
    }
    const NonlinearResult z = iterate(ctx, DataTriplet{}, o);
    const double zmax = z.u.values().cwiseAbs().maxCoeff();
    c.check(zmax == 0 && z.nu[0] == 0 && z.nu[1] == 0, "zero data: max |u| = " + sci(zmax) + ", nu = (0, 0)");
    const double elapsed = seconds_since(t0);
    c.check(elapsed <= 120, "runtime " + fmt("%.1f", elapsed) + " s <= 120 s");
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

void c12(Criterion& c)
{
    const fs::path dir = fs::temp_directory_path() / "fbp_acceptance_verify";
    fs::remove_all(dir);
    std::array<std::string, 2> report;
    for (int k = 0; k < 2; ++k) {
        const fs::path out = dir / ("run" + std::to_string(k));
        const std::string cmd = std::string("\"") + FBP_CLI_PATH + "\" verify --out \"" + out.string() + "\" > \""
                                + (dir.string() + "_stdout" + std::to_string(k)) + "\" 2>&1";
        const int status = std::system(cmd.c_str());
        const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        c.check(code == 0, "run " + std::to_string(k + 1) + " exit code " + std::to_string(code));
        report[k] = slurp(out / "verify_report.txt");
        std::remove((dir.string() + "_stdout" + std::to_string(k)).c_str());
    }
    c.check(!report[0].empty() && report[0] == report[1],
            "reports byte-identical (" + std::to_string(report[0].size()) + " bytes)");
    fs::remove_all(dir);
}

} // namespace

int main()
{
    struct Entry {
        const char* id;
        const char* title;
        std::function<void(Criterion&)> run;
    };
    const std::vector<Entry> entries{
        {"C1", "angular profile G0", c1},
        {"C2", "profile recurrence", c2},
        {"C3", "Kummer-side ODE", c3},
        {"C4", "homogeneous singular solution", c4},
        {"C5", "manufactured-solution convergence", c5},
        {"C6", "jump and dual routes agree", c6},
        {"C7", "biorthogonal correctors", c7},
        {"C8", "decomposition of (fbar_0, 0, 0)", c8},
        {"C9", "cutoff independence", c9},
        {"C10", "linearized reduction and Lipschitz stability", c10},
        {"C11", "nonlinear fixed point", c11},
        {"C12", "deterministic verify", c12},
    };
    int failed = 0;
    for (const Entry& e : entries) {
        Criterion c;
        const auto t0 = Clock::now();
        try {
            e.run(c);
        } catch (const std::exception& ex) {
            c.check(false, std::string("exception: ") + ex.what());
        }
        std::printf("%-4s %s  %s (%.1f s)\n", e.id, c.pass ? "PASS" : "FAIL", e.title, seconds_since(t0));
        for (const std::string& n : c.notes)
            std::printf("       %s\n", n.c_str());
        std::fflush(stdout);
        failed += !c.pass;
    }
    std::printf("%d of %zu criteria passed\n", int(entries.size()) - failed, entries.size());
    return failed ? 1 : 0;
}
