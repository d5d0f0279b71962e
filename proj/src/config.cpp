#include "fbp/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

namespace fbp {

using nlohmann::json;
using nlohmann::ordered_json;

ConfigValidationError::ConfigValidationError(std::vector<ConfigIssue> issues)
    : ConfigError([&] {
          std::string s = "invalid configuration:";
          for (const ConfigIssue& i : issues)
              s += "\n  " + i.path + ": " + i.message;
          return s;
      }()),
      issues_(std::move(issues))
{
}

std::string ConfigValidationError::to_json() const
{
    ordered_json j;
    j["errors"] = ordered_json::array();
    for (const ConfigIssue& i : issues_)
        j["errors"].push_back({{"path", i.path}, {"message", i.message}});
    return j.dump(2) + "\n";
}

namespace {

// Reads typed values out of a JSON object and records every problem.
class Reader {
public:
    explicit Reader(std::vector<ConfigIssue>& issues) : issues_(issues) {}

    void fail(const std::string& path, const std::string& msg) { issues_.push_back({path, msg}); }

    // the object at j[key], or nullptr when absent; records non-objects
    const json* object(const json& j, const std::string& key, const std::string& path,
                       std::initializer_list<const char*> allowed)
    {
        if (!j.contains(key))
            return nullptr;
        const json& o = j.at(key);
        const std::string p = path + "/" + key;
        if (!o.is_object()) {
            fail(p, "expected an object");
            return nullptr;
        }
        check_keys(o, p, allowed);
        return &o;
    }

    void check_keys(const json& o, const std::string& path, std::initializer_list<const char*> allowed)
    {
        const std::set<std::string> ok(allowed.begin(), allowed.end());
        for (auto it = o.begin(); it != o.end(); ++it)
            if (!ok.count(it.key()))
                fail(path + "/" + it.key(), "unknown key");
    }

    void number(const json* o, const char* key, const std::string& path, double& out,
                const std::function<bool(double)>& valid = {}, const char* rule = "")
    {
        if (!o || !o->contains(key))
            return;
        const json& v = o->at(key);
        const std::string p = path + "/" + key;
        if (!v.is_number()) {
            fail(p, "expected a number");
            return;
        }
        const double x = v.get<double>();
        if (!std::isfinite(x) || (valid && !valid(x))) {
            fail(p, std::string("must be ") + rule);
            return;
        }
        out = x;
    }

    void integer(const json* o, const char* key, const std::string& path, int& out,
                 const std::function<bool(long long)>& valid = {}, const char* rule = "")
    {
        if (!o || !o->contains(key))
            return;
        const json& v = o->at(key);
        const std::string p = path + "/" + key;
        if (!v.is_number_integer()) {
            fail(p, "expected an integer");
            return;
        }
        const long long x = v.get<long long>();
        if (valid && !valid(x)) {
            fail(p, std::string("must be ") + rule);
            return;
        }
        out = int(x);
    }

    void boolean(const json* o, const char* key, const std::string& path, bool& out)
    {
        if (!o || !o->contains(key))
            return;
        const json& v = o->at(key);
        if (!v.is_boolean()) {
            fail(path + "/" + key, "expected true or false");
            return;
        }
        out = v.get<bool>();
    }

    void string(const json* o, const char* key, const std::string& path, std::string& out)
    {
        if (!o || !o->contains(key))
            return;
        const json& v = o->at(key);
        if (!v.is_string()) {
            fail(path + "/" + key, "expected a string");
            return;
        }
        out = v.get<std::string>();
    }

    void numbers(const json* o, const char* key, const std::string& path, std::vector<double>& out)
    {
        if (!o || !o->contains(key))
            return;
        const json& v = o->at(key);
        const std::string p = path + "/" + key;
        if (!v.is_array()) {
            fail(p, "expected an array of numbers");
            return;
        }
        std::vector<double> r;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number() || !std::isfinite(v[i].get<double>())) {
                fail(p + "/" + std::to_string(i), "expected a finite number");
                return;
            }
            r.push_back(v[i].get<double>());
        }
        out = std::move(r);
    }

private:
    std::vector<ConfigIssue>& issues_;
};

bool odd_grid(long long n) { return n >= 33 && n % 2 == 1 && n <= 4097; }

} // namespace

RunConfig parse_config(const std::string& text)
{
    std::vector<ConfigIssue> issues;
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigValidationError(std::vector<ConfigIssue>{{"", std::string("malformed JSON: ") + e.what()}});
    }
    if (!root.is_object())
        throw ConfigValidationError(std::vector<ConfigIssue>{{"", "expected a JSON object"}});

    Reader rd(issues);
    RunConfig c;
    rd.check_keys(root, "", {"domain", "grid", "scheme", "solver", "data", "flow", "cutoff", "nonlinear",
                             "profiles", "verify", "output"});

    const json* dom = rd.object(root, "domain", "", {"x0", "x1"});
    rd.number(dom, "x0", "/domain", c.x0);
    rd.number(dom, "x1", "/domain", c.x1);
    if (!(c.x1 > c.x0))
        rd.fail("/domain", "x1 must exceed x0");

    const json* grid = rd.object(root, "grid", "", {"nx", "nz"});
    rd.integer(grid, "nx", "/grid", c.nx, odd_grid, "odd, at least 33 and at most 4097");
    rd.integer(grid, "nz", "/grid", c.nz, odd_grid, "odd, at least 33 and at most 4097");

    if (const json* sch = rd.object(root, "scheme", "", {"type", "epsilon"})) {
        std::string type = "upwind";
        rd.string(sch, "type", "/scheme", type);
        if (type == "upwind")
            c.scheme = Scheme::upwind;
        else if (type == "central-viscous")
            c.scheme = Scheme::central_viscous;
        else
            rd.fail("/scheme/type", "must be \"upwind\" or \"central-viscous\"");
        rd.number(sch, "epsilon", "/scheme", c.epsilon, [](double e) { return e >= 0; }, "non-negative");
        if (c.scheme == Scheme::central_viscous && !(c.epsilon > 0))
            rd.fail("/scheme/epsilon", "central-viscous needs epsilon > 0");
    }

    const json* sol = rd.object(root, "solver", "", {"tolerance", "max_iterations"});
    rd.number(sol, "tolerance", "/solver", c.solver.tolerance, [](double t) { return t > 0 && t < 1; },
              "in (0, 1)");
    rd.integer(sol, "max_iterations", "/solver", c.solver.max_iterations, [](long long n) { return n >= 1; },
               "at least 1");

    if (const json* data = rd.object(root, "data", "",
                                     {"bumps", "fbar", "source_csv", "delta0", "delta1", "delta0_csv",
                                      "delta1_csv", "scale", "project_orthogonal"})) {
        if (data->contains("bumps")) {
            const json& b = data->at("bumps");
            if (!b.is_array()) {
                rd.fail("/data/bumps", "expected an array of objects");
            } else {
                for (std::size_t i = 0; i < b.size(); ++i) {
                    const std::string p = "/data/bumps/" + std::to_string(i);
                    if (!b[i].is_object()) {
                        rd.fail(p, "expected an object");
                        continue;
                    }
                    rd.check_keys(b[i], p, {"amplitude", "xc", "zc", "sx", "sz"});
                    BumpSpec s;
                    rd.number(&b[i], "amplitude", p, s.amplitude);
                    rd.number(&b[i], "xc", p, s.xc);
                    rd.number(&b[i], "zc", p, s.zc);
                    rd.number(&b[i], "sx", p, s.sx, [](double v) { return v > 0; }, "positive");
                    rd.number(&b[i], "sz", p, s.sz, [](double v) { return v > 0; }, "positive");
                    c.data.bumps.push_back(s);
                }
            }
        }
        std::vector<double> fb;
        rd.numbers(data, "fbar", "/data", fb);
        if (data->contains("fbar")) {
            if (fb.size() == 2)
                c.data.fbar = {fb[0], fb[1]};
            else if (data->at("fbar").is_array())
                rd.fail("/data/fbar", "expected two coefficients");
        }
        rd.string(data, "source_csv", "/data", c.data.source_csv);
        rd.numbers(data, "delta0", "/data", c.data.delta0);
        rd.numbers(data, "delta1", "/data", c.data.delta1);
        rd.string(data, "delta0_csv", "/data", c.data.delta0_csv);
        rd.string(data, "delta1_csv", "/data", c.data.delta1_csv);
        rd.number(data, "scale", "/data", c.data.scale);
        rd.boolean(data, "project_orthogonal", "/data", c.data.project_orthogonal);
    }

    if (const json* flow = rd.object(root, "flow", "", {"family", "amplitude", "shape", "csv"})) {
        std::string fam = "shear";
        rd.string(flow, "family", "/flow", fam);
        if (fam == "shear")
            c.flow.family = FlowFamily::shear;
        else if (fam == "sine")
            c.flow.family = FlowFamily::sine;
        else if (fam == "csv")
            c.flow.family = FlowFamily::csv;
        else
            rd.fail("/flow/family", "must be \"shear\", \"sine\" or \"csv\"");
        rd.number(flow, "amplitude", "/flow", c.flow.amplitude);
        rd.number(flow, "shape", "/flow", c.flow.shape, [](double s) { return std::abs(s) < 1; }, "in (-1, 1)");
        rd.string(flow, "csv", "/flow", c.flow.csv);
        if (c.flow.family == FlowFamily::csv && c.flow.csv.empty())
            rd.fail("/flow/csv", "family \"csv\" needs a path");
    }

    const json* cut = rd.object(root, "cutoff", "", {"r_inner", "r_outer"});
    rd.number(cut, "r_inner", "/cutoff", c.r_inner, [](double r) { return r > 0; }, "positive");
    rd.number(cut, "r_outer", "/cutoff", c.r_outer, [](double r) { return r > 0; }, "positive");
    if (!(c.r_inner < c.r_outer))
        rd.fail("/cutoff", "r_inner must be below r_outer");
    if (!(c.r_outer < 0.5 * std::min(1.0, c.x1 - c.x0)))
        rd.fail("/cutoff/r_outer", "must be below min(1, x1 - x0)/2");

    if (const json* nl = rd.object(root, "nonlinear", "",
                                   {"tol", "n_max", "frozen", "init", "eta_bar", "first_iterate_bound"})) {
        rd.number(nl, "tol", "/nonlinear", c.nonlinear.tol, [](double t) { return t > 0; }, "positive");
        rd.integer(nl, "n_max", "/nonlinear", c.nonlinear.n_max, [](long long n) { return n >= 1 && n <= 10000; },
                   "between 1 and 10000");
        rd.boolean(nl, "frozen", "/nonlinear", c.nonlinear.frozen);
        std::string init = "cutoff";
        rd.string(nl, "init", "/nonlinear", init);
        if (init == "cutoff")
            c.nonlinear.init = Initialization::cutoff;
        else if (init == "zero")
            c.nonlinear.init = Initialization::zero;
        else
            rd.fail("/nonlinear/init", "must be \"cutoff\" or \"zero\"");
        rd.number(nl, "eta_bar", "/nonlinear", c.nonlinear.eta_bar, [](double v) { return v > 0; }, "positive");
        rd.number(nl, "first_iterate_bound", "/nonlinear", c.nonlinear.first_iterate_bound,
                  [](double v) { return v > 0; }, "positive");
    }

    if (const json* pr = rd.object(root, "profiles", "", {"k", "t_min", "t_max", "resolution"})) {
        if (pr->contains("k")) {
            const json& k = pr->at("k");
            if (!k.is_array() || k.empty()) {
                rd.fail("/profiles/k", "expected a non-empty array of integers");
            } else {
                c.profiles.k.clear();
                for (std::size_t i = 0; i < k.size(); ++i) {
                    const std::string p = "/profiles/k/" + std::to_string(i);
                    if (!k[i].is_number_integer())
                        rd.fail(p, "expected an integer");
                    else if (k[i].get<int>() < AngularProfile<double>::k_min
                             || k[i].get<int>() > AngularProfile<double>::k_max)
                        rd.fail(p, "unsupported profile index; must lie in [-2, 3]");
                    else
                        c.profiles.k.push_back(k[i].get<int>());
                }
            }
        }
        rd.number(pr, "t_min", "/profiles", c.profiles.t_min);
        rd.number(pr, "t_max", "/profiles", c.profiles.t_max);
        rd.number(pr, "resolution", "/profiles", c.profiles.resolution, [](double h) { return h > 0; }, "positive");
        if (!(c.profiles.t_max > c.profiles.t_min))
            rd.fail("/profiles", "t_max must exceed t_min");
        else if (c.profiles.resolution > 0 && (c.profiles.t_max - c.profiles.t_min) / c.profiles.resolution > 1e7)
            rd.fail("/profiles/resolution", "more than 1e7 samples requested");
    }

    if (const json* ver = rd.object(root, "verify", "", {"nx", "nz", "seed", "suites"})) {
        rd.integer(ver, "nx", "/verify", c.verify.nx, odd_grid, "odd, at least 33 and at most 4097");
        rd.integer(ver, "nz", "/verify", c.verify.nz, odd_grid, "odd, at least 33 and at most 4097");
        if (ver->contains("seed")) {
            const json& s = ver->at("seed");
            if (!s.is_number_unsigned())
                rd.fail("/verify/seed", "expected a non-negative integer");
            else
                c.verify.seed = s.get<std::uint64_t>();
        }
        if (ver->contains("suites")) {
            const json& s = ver->at("suites");
            if (!s.is_array()) {
                rd.fail("/verify/suites", "expected an array of suite names");
            } else {
                for (std::size_t i = 0; i < s.size(); ++i)
                    if (!s[i].is_string())
                        rd.fail("/verify/suites/" + std::to_string(i), "expected a string");
                    else
                        c.verify.suites.push_back(s[i].get<std::string>());
            }
        }
    }

    if (root.contains("output")) {
        if (!root["output"].is_string() || root["output"].get<std::string>().empty())
            rd.fail("/output", "expected a non-empty directory path");
        else
            c.output = root["output"].get<std::string>();
    }

    if (issues.empty()) {
        // data that only fail once assembled
        const DataTriplet d = make_triplet(c);
        const Compatibility comp = check_compatibility(d, c.x0, c.x1, 1e-8);
        if (!comp.compatible)
            issues.push_back({"/data", "boundary data violate the corner compatibility conditions"});
    }
    if (!issues.empty())
        throw ConfigValidationError(std::move(issues));
    return c;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw ConfigValidationError(std::vector<ConfigIssue>{{"", "cannot open '" + path + "'"}});
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

std::string to_json(const RunConfig& c)
{
    ordered_json j;
    j["domain"] = {{"x0", c.x0}, {"x1", c.x1}};
    j["grid"] = {{"nx", c.nx}, {"nz", c.nz}};
    j["scheme"] = {{"type", c.scheme == Scheme::upwind ? "upwind" : "central-viscous"}, {"epsilon", c.epsilon}};
    j["solver"] = {{"tolerance", c.solver.tolerance}, {"max_iterations", c.solver.max_iterations}};
    ordered_json bumps = ordered_json::array();
    for (const BumpSpec& b : c.data.bumps)
        bumps.push_back({{"amplitude", b.amplitude}, {"xc", b.xc}, {"zc", b.zc}, {"sx", b.sx}, {"sz", b.sz}});
    j["data"] = {{"bumps", bumps},
                 {"fbar", {c.data.fbar[0], c.data.fbar[1]}},
                 {"source_csv", c.data.source_csv},
                 {"delta0", c.data.delta0},
                 {"delta1", c.data.delta1},
                 {"delta0_csv", c.data.delta0_csv},
                 {"delta1_csv", c.data.delta1_csv},
                 {"scale", c.data.scale},
                 {"project_orthogonal", c.data.project_orthogonal}};
    const char* fam = c.flow.family == FlowFamily::shear ? "shear" : (c.flow.family == FlowFamily::sine ? "sine" : "csv");
    j["flow"] = {{"family", fam}, {"amplitude", c.flow.amplitude}, {"shape", c.flow.shape}, {"csv", c.flow.csv}};
    j["cutoff"] = {{"r_inner", c.r_inner}, {"r_outer", c.r_outer}};
    j["nonlinear"] = {{"tol", c.nonlinear.tol},
                      {"n_max", c.nonlinear.n_max},
                      {"frozen", c.nonlinear.frozen},
                      {"init", c.nonlinear.init == Initialization::cutoff ? "cutoff" : "zero"},
                      {"eta_bar", c.nonlinear.eta_bar},
                      {"first_iterate_bound", c.nonlinear.first_iterate_bound}};
    j["profiles"] = {{"k", c.profiles.k},
                     {"t_min", c.profiles.t_min},
                     {"t_max", c.profiles.t_max},
                     {"resolution", c.profiles.resolution}};
    j["verify"] = {{"nx", c.verify.nx}, {"nz", c.verify.nz}, {"seed", c.verify.seed}, {"suites", c.verify.suites}};
    j["output"] = c.output;
    return j.dump(2) + "\n";
}

Grid make_grid(const RunConfig& c) { return Grid(c.x0, c.x1, c.nx, c.nz); }

CutoffPair make_cutoffs(const RunConfig& c) { return make_cutoffs(c.x0, c.x1, c.r_inner, c.r_outer); }

// "z,value" rows on uniform nodes of [lo, hi]
static Boundary read_boundary_csv(const std::string& path, double lo, double hi)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw ConfigError("cannot open '" + path + "'");
    std::string line;
    std::getline(f, line);
    if (line.rfind("z,value", 0) != 0)
        throw ConfigError(path + ": header must be \"z,value\"");
    std::vector<double> z, v;
    while (std::getline(f, line)) {
        if (line.empty())
            continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ConfigError(path + ": expected two columns");
        try {
            z.push_back(std::stod(line.substr(0, comma)));
            v.push_back(std::stod(line.substr(comma + 1)));
        } catch (const std::exception&) {
            throw ConfigError(path + ": malformed number in '" + line + "'");
        }
    }
    if (z.size() < 6 || std::abs(z.front() - lo) > 1e-12 || std::abs(z.back() - hi) > 1e-12)
        throw ConfigError(path + ": need at least 6 rows spanning [" + format_double(lo) + ", " + format_double(hi)
                          + "]");
    return Boundary(std::make_shared<SampledBoundary>(lo, hi, v));
}

DataTriplet make_triplet(const RunConfig& c)
{
    DataTriplet d;
    for (const BumpSpec& b : c.data.bumps)
        d.f += Source(std::make_shared<GaussianBump>(b.amplitude, b.xc, b.zc, b.sx, b.sz));
    if (c.data.fbar[0] != 0 || c.data.fbar[1] != 0) {
        const CutoffPair cut = make_cutoffs(c);
        for (int i = 0; i < 2; ++i)
            if (c.data.fbar[i] != 0)
                d.f += Source(std::make_shared<FbarSource>(i, cut[i]), c.data.fbar[i]);
    }
    if (!c.data.source_csv.empty())
        d.f += Source(std::make_shared<FieldSource>(read_csv(c.data.source_csv)));
    if (!c.data.delta0.empty())
        d.delta0 += polynomial_boundary(c.data.delta0);
    if (!c.data.delta1.empty())
        d.delta1 += polynomial_boundary(c.data.delta1);
    if (!c.data.delta0_csv.empty())
        d.delta0 += read_boundary_csv(c.data.delta0_csv, 0.0, 1.0);
    if (!c.data.delta1_csv.empty())
        d.delta1 += read_boundary_csv(c.data.delta1_csv, -1.0, 0.0);
    if (c.data.scale != 1)
        d *= c.data.scale;
    return d;
}

FlowProfile make_flow(const RunConfig& c, const Grid& g)
{
    switch (c.flow.family) {
    case FlowFamily::shear:
        return FlowProfile::shear(g);
    case FlowFamily::sine: {
        const double a = c.flow.amplitude, s = c.flow.shape, L = c.x1 - c.x0, x0 = c.x0;
        const double pi = std::acos(-1.0);
        return FlowProfile::sample(g, [&](double x, double y) {
            return y + a * std::sin(pi * (x - x0) / L) * (1 - y * y) * (1 + s * y);
        });
    }
    case FlowFamily::csv:
        return FlowProfile(resample(read_csv(c.flow.csv), g));
    }
    throw ConfigError("flow: unknown family");
}

} // namespace fbp
