#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "plapmp/cli.hpp"
#include "plapmp/io.hpp"

namespace plapmp::cli {

ConfigError::ConfigError(int line, std::string field, const std::string& message)
    : std::runtime_error((line > 0 ? "config line " + std::to_string(line) + ": " : std::string("config: ")) +
                         (field.empty() ? std::string() : "field '" + field + "': ") + message),
      line_(line),
      field_(std::move(field)) {}

namespace {

// Keys in echo order. Empty default: resolved from the problem.
const std::vector<std::pair<std::string, std::string>>& schema() {
    static const std::vector<std::pair<std::string, std::string>> s{
        {"problem.name", "classical_cubic"},
        {"problem.epsilon", "0"},
        {"problem.dim", ""},
        {"problem.p", ""},
        {"problem.q", ""},
        {"problem.theta", ""},
        {"problem.a", ""},
        {"problem.b", "1"},
        {"problem.f", "power"},
        {"problem.V", "constant"},
        {"problem.V_value", "1"},
        {"grid.dim", ""},
        {"grid.radius", ""},
        {"grid.h", ""},
        {"grid.points_per_axis", ""},
        {"mp.path_points", "11"},
        {"mp.max_iters", "2000"},
        {"mp.descent_step", "1"},
        {"mp.residual_tol", "1e-08"},
        {"mp.probe_directions", "15"},
        {"mp.regularization", "1e-08"},
        {"outer.tol", "1e-08"},
        {"outer.max_outer", "30"},
        {"outer.u0", "zero"},
        {"outer.lambda_factor", "0.5"},
        {"outer.divergence_window", "5"},
        {"outer.lipschitz_samples", "10000"},
        {"outer.cp_samples", "20000"},
        {"check.rho1", "2"},
        {"check.rho2", "2"},
        {"check.lipschitz_samples", "10000"},
        {"check.cp_samples", "20000"},
        {"check.samples_per_decade", "20"},
        {"check.lattice_shifts", "200"},
        {"seed", "42"},
        {"output_dir", "out"},
    };
    return s;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && std::isfinite(out);
}

bool parse_int(const std::string& s, long long& out) {
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

// problem.* keys each builtin accepts besides problem.name.
std::vector<std::string> problem_keys(const std::string& name) {
    if (name == "classical_cubic") return {};
    if (name == "graded_cubic") return {"problem.epsilon"};
    if (name == "plap_model") return {"problem.epsilon", "problem.p", "problem.q"};
    return {"problem.epsilon", "problem.dim", "problem.p", "problem.q", "problem.theta",
            "problem.a", "problem.b", "problem.f", "problem.V", "problem.V_value"};
}

bool uses_key(const std::string& name, const std::string& key) {
    const auto k = problem_keys(name);
    return std::find(k.begin(), k.end(), key) != k.end();
}

}  // namespace

// Key blamed for a model validation message such as "q must exceed p" or
// "plap_model: epsilon must lie in [0, 0.2]".
std::string RunConfig::field_of(const std::string& message) const {
    std::string text = message;
    const auto colon = text.find(": ");
    if (colon != std::string::npos) text = text.substr(colon + 2);
    const std::string word = text.substr(0, text.find(' '));
    // theta and a default to values derived from q
    if (word == "a") {
        if (is_set("problem.a")) return "problem.a";
        return is_set("problem.b") ? "problem.b" : "problem.q";
    }
    if (word == "theta" && !is_set("problem.theta")) return "problem.q";
    if (word == "potential") return "problem.V_value";
    for (const char* k : {"p", "q", "theta", "epsilon", "dim"}) {
        if (word == k) return std::string("problem.") + k;
    }
    return "problem.name";
}

const std::vector<std::string>& RunConfig::keys() {
    static const std::vector<std::string> k = [] {
        std::vector<std::string> out;
        for (const auto& [key, def] : schema()) out.push_back(key);
        return out;
    }();
    return k;
}

RunConfig::RunConfig() = default;

RunConfig RunConfig::parse(std::istream& in) {
    RunConfig cfg;
    std::string raw;
    int line = 0;
    std::map<std::string, int> seen;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw ConfigError(line, "", "expected 'key = value'");
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (key.empty()) throw ConfigError(line, "", "empty key");
        if (seen.count(key)) {
            throw ConfigError(line, key, "duplicate key (first set on line " + std::to_string(seen[key]) + ")");
        }
        seen[key] = line;
        cfg.set(key, value, line);
    }
    return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(0, "", "cannot open '" + path.string() + "'");
    return parse(in);
}

void RunConfig::set(const std::string& key, const std::string& value, int line) {
    const auto& k = keys();
    if (std::find(k.begin(), k.end(), key) == k.end()) throw ConfigError(line, key, "unknown key");
    if (value.empty()) throw ConfigError(line, key, "empty value");
    values_[key] = value;
    lines_[key] = line;
}

void RunConfig::unset(const std::string& key) {
    values_.erase(key);
    lines_.erase(key);
}

bool RunConfig::is_set(const std::string& key) const { return values_.count(key) != 0; }

std::string RunConfig::get(const std::string& key) const {
    if (auto it = values_.find(key); it != values_.end()) return it->second;
    for (const auto& [k, def] : schema()) {
        if (k == key) return def;
    }
    throw ConfigError(0, key, "unknown key");
}

double RunConfig::get_double(const std::string& key) const {
    const std::string v = get(key);
    double out = 0.0;
    if (!parse_double(v, out)) throw ConfigError(0, key, "expected a finite number, got '" + v + "'");
    return out;
}

long long RunConfig::get_int(const std::string& key) const {
    const std::string v = get(key);
    long long out = 0;
    if (!parse_int(v, out)) throw ConfigError(0, key, "expected an integer, got '" + v + "'");
    return out;
}

ProblemSpec RunConfig::problem() const {
    const std::string name = get("problem.name");
    if (name != "custom") {
        const auto names = builtin_names();
        if (std::find(names.begin(), names.end(), name) == names.end()) {
            throw ConfigError(0, "problem.name", "unknown problem '" + name + "'");
        }
    }
    for (const auto& [key, def] : schema()) {
        if (key.rfind("problem.", 0) == 0 && key != "problem.name" && is_set(key) && !uses_key(name, key)) {
            throw ConfigError(0, key, "not used by problem '" + name + "'");
        }
    }
    auto num_or = [&](const std::string& key, double fallback) {
        return is_set(key) ? get_double(key) : fallback;
    };
    try {
        if (name != "custom") {
            BuiltinOptions o;
            o.epsilon = get_double("problem.epsilon");
            o.p = num_or("problem.p", o.p);
            o.q = num_or("problem.q", o.q);
            return builtin_problem(name, o);
        }
        ProblemSpec spec;
        spec.name = "custom";
        const long long dim = is_set("problem.dim") ? get_int("problem.dim") : 1;
        if (dim != 1 && dim != 2) throw ConfigError(0, "problem.dim", "must be 1 or 2");
        spec.dim = static_cast<int>(dim);
        spec.p = num_or("problem.p", 2.0);
        spec.q = num_or("problem.q", 4.0);
        spec.theta = num_or("problem.theta", spec.q);
        spec.a = num_or("problem.a", 0.5 / spec.q);
        spec.b = get_double("problem.b");
        spec.epsilon = get_double("problem.epsilon");
        const std::string f = get("problem.f");
        if (f == "power") {
            spec.f = graded_power(spec.q, spec.epsilon);
        } else if (f == "linear") {
            spec.f = linear_positive();
        } else if (f == "abs_power") {
            spec.f = abs_power(spec.q);
        } else if (f == "zero") {
            spec.f = zero_nonlinearity();
        } else {
            throw ConfigError(0, "problem.f", "unknown nonlinearity '" + f + "' (power, linear, abs_power, zero)");
        }
        const std::string V = get("problem.V");
        if (V == "constant") {
            spec.V = constant_potential(get_double("problem.V_value"));
        } else if (V == "cosine") {
            spec.V = cosine_potential(spec.dim);
        } else if (V == "quadratic") {
            spec.V = quadratic_potential();
        } else {
            throw ConfigError(0, "problem.V", "unknown potential '" + V + "' (constant, cosine, quadratic)");
        }
        plapmp::validate(spec);
        return spec;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(0, field_of(e.what()), e.what());
    }
}

Grid RunConfig::grid() const {
    const ProblemSpec spec = problem();
    if (is_set("grid.dim") && get_int("grid.dim") != spec.dim) {
        throw ConfigError(0, "grid.dim", "does not match the problem dimension " + std::to_string(spec.dim));
    }
    const double radius = is_set("grid.radius") ? get_double("grid.radius") : (spec.dim == 1 ? 20.0 : 8.0);
    if (!(radius > 0.0)) throw ConfigError(0, "grid.radius", "must be positive");
    long long m = 0;
    if (is_set("grid.points_per_axis")) {
        if (is_set("grid.h")) throw ConfigError(0, "grid.h", "give either grid.h or grid.points_per_axis");
        m = get_int("grid.points_per_axis");
    } else {
        const double h = is_set("grid.h") ? get_double("grid.h") : (spec.dim == 1 ? 0.01 : 0.2);
        if (!(h > 0.0)) throw ConfigError(0, "grid.h", "must be positive");
        const double cells = 2.0 * radius / h;
        if (!(cells < 1e7) || std::abs(cells - std::round(cells)) > 1e-6 * cells) {
            throw ConfigError(0, "grid.h", "2 * radius / h must be an integer");
        }
        m = static_cast<long long>(std::llround(cells)) + 1;
    }
    const long long max_m = spec.dim == 1 ? 1000001 : 2001;
    if (m < 3 || m > max_m) {
        throw ConfigError(0, "grid.points_per_axis", "must lie in [3, " + std::to_string(max_m) + "]");
    }
    return build_grid(spec.dim, radius, static_cast<int>(m));
}

OuterConfig RunConfig::outer() const {
    OuterConfig oc;
    auto positive = [&](const std::string& key) {
        const double v = get_double(key);
        if (!(v > 0.0)) throw ConfigError(0, key, "must be positive");
        return v;
    };
    auto at_least = [&](const std::string& key, long long lo) {
        const long long v = get_int(key);
        if (v < lo || v > 100000000) {
            throw ConfigError(0, key, "must lie in [" + std::to_string(lo) + ", 100000000]");
        }
        return static_cast<int>(v);
    };
    oc.mp.path_points = at_least("mp.path_points", 3);
    oc.mp.max_iters = at_least("mp.max_iters", 1);
    oc.mp.descent_step = positive("mp.descent_step");
    oc.mp.residual_tol = positive("mp.residual_tol");
    oc.mp.probe_directions = at_least("mp.probe_directions", 0);
    oc.mp.regularization = get_double("mp.regularization");
    if (!(oc.mp.regularization >= 0.0)) throw ConfigError(0, "mp.regularization", "must be non-negative");
    oc.mp.seed = seed();
    oc.tol_outer = positive("outer.tol");
    oc.max_outer = at_least("outer.max_outer", 1);
    oc.lambda_factor = positive("outer.lambda_factor");
    if (oc.lambda_factor > 1.0) throw ConfigError(0, "outer.lambda_factor", "must lie in (0, 1]");
    oc.divergence_window = at_least("outer.divergence_window", 2);
    oc.lipschitz_samples = at_least("outer.lipschitz_samples", 10000);
    oc.cp_samples = at_least("outer.cp_samples", 1000);
    oc.seed = seed();
    InitialGuess g{};
    try {
        g = parse_initial_guess(get("outer.u0"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(0, "outer.u0", e.what());
    }
    if (g != InitialGuess::zero) oc.u0 = initial_guess(grid(), g, seed());
    return oc;
}

SamplingPlan RunConfig::sampling() const {
    SamplingPlan plan;
    const long long spd = get_int("check.samples_per_decade");
    if (spd < 2 || spd > 10000) throw ConfigError(0, "check.samples_per_decade", "must lie in [2, 10000]");
    const long long shifts = get_int("check.lattice_shifts");
    if (shifts < 1 || shifts > 100000) throw ConfigError(0, "check.lattice_shifts", "must lie in [1, 100000]");
    plan.samples_per_decade = static_cast<int>(spd);
    plan.lattice_shifts = static_cast<int>(shifts);
    plan.seed = seed();
    return plan;
}

std::uint64_t RunConfig::seed() const {
    const long long s = get_int("seed");
    if (s < 0) throw ConfigError(0, "seed", "must be non-negative");
    return static_cast<std::uint64_t>(s);
}

std::filesystem::path RunConfig::output_dir() const { return get("output_dir"); }

void RunConfig::validate() const {
    try {
        check_all();
    } catch (const ConfigError& e) {
        const auto it = lines_.find(e.field());
        if (e.line() != 0 || it == lines_.end() || it->second == 0) throw;
        const std::string what = e.what();
        const std::string prefix = "config: field '" + e.field() + "': ";
        throw ConfigError(it->second, e.field(), what.substr(std::min(prefix.size(), what.size())));
    }
}

void RunConfig::check_all() const {
    (void)grid();
    (void)outer();
    (void)sampling();
    for (const char* key : {"check.rho1", "check.rho2"}) {
        if (!(get_double(key) > 0.0)) throw ConfigError(0, key, "must be positive");
    }
    for (const char* key : {"check.lipschitz_samples", "check.cp_samples"}) {
        const long long v = get_int(key);
        const long long lo = std::string(key) == "check.cp_samples" ? 1000 : 10000;
        if (v < lo || v > 100000000) throw ConfigError(0, key, "must be at least " + std::to_string(lo));
    }
}

void RunConfig::write_effective(std::ostream& os) const {
    const ProblemSpec spec = problem();
    const Grid g = grid();
    const std::string name = get("problem.name");
    for (const auto& [key, def] : schema()) {
        std::string value;
        if (key.rfind("problem.", 0) == 0 && key != "problem.name") {
            if (!uses_key(name, key)) continue;
            if (key == "problem.dim") value = std::to_string(spec.dim);
            else if (key == "problem.p") value = num(spec.p);
            else if (key == "problem.q") value = num(spec.q);
            else if (key == "problem.theta") value = num(spec.theta);
            else if (key == "problem.a") value = num(spec.a);
            else value = get(key);
        } else if (key == "grid.dim") {
            value = std::to_string(g.dim());
        } else if (key == "grid.radius") {
            value = num(g.radius());
        } else if (key == "grid.h") {
            continue;
        } else if (key == "grid.points_per_axis") {
            value = std::to_string(g.points_per_axis());
        } else {
            value = get(key);
        }
        long long as_int = 0;
        double as_double = 0.0;
        if (!parse_int(value, as_int) && parse_double(value, as_double)) value = num(as_double);
        os << key << " = " << value << '\n';
    }
}

std::pair<std::string, std::vector<double>> parse_sweep(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError(0, "sweep", "expected 'parameter=v1,v2,...'");
    const std::string param = trim(text.substr(0, eq));
    if (param != "epsilon" && param != "p" && param != "radius" && param != "h") {
        throw ConfigError(0, "sweep", "unknown sweep parameter '" + param + "' (epsilon, p, radius, h)");
    }
    std::vector<double> values;
    std::stringstream ss(text.substr(eq + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        double v = 0.0;
        if (!parse_double(item, v)) throw ConfigError(0, "sweep", "bad value '" + item + "'");
        values.push_back(v);
    }
    if (values.empty()) throw ConfigError(0, "sweep", "empty value list");
    if (values.size() > 32) throw ConfigError(0, "sweep", "at most 32 values");
    return {param, values};
}

}  // namespace plapmp::cli
