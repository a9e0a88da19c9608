// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "oracles/shooting.hpp"
#include "plapmp/cli.hpp"
#include "plapmp/frozen.hpp"
#include "plapmp/hypotheses.hpp"
#include "plapmp/outer.hpp"
#include "test_fields.hpp"

using namespace plapmp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string g6(double v) { return fmt("%.6g", v); }

double seconds_since(std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

fs::path workdir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "plapmp_acceptance" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

cli::RunConfig config(const std::string& text, const fs::path& out) {
    std::istringstream in(text);
    cli::RunConfig c = cli::RunConfig::parse(in);
    c.set("output_dir", out.string());
    return c;
}

std::map<std::string, std::string> read_kv(const fs::path& p) {
    std::map<std::string, std::string> kv;
    std::ifstream in(p);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find(" = ");
        if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return kv;
}

std::vector<std::vector<double>> read_table(const fs::path& p, char sep, bool header) {
    std::vector<std::vector<double>> rows;
    std::ifstream in(p);
    std::string line;
    if (header) std::getline(in, line);
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        if (sep == ' ') {
            while (ls >> cell) row.push_back(std::stod(cell));
        } else {
            while (std::getline(ls, cell, sep)) {
                try {
                    row.push_back(std::stod(cell));
                } catch (const std::exception&) {
                    row.push_back(std::numeric_limits<double>::quiet_NaN());
                }
            }
        }
        rows.push_back(row);
    }
    return rows;
}

// Outer runs shared by the solver-property criteria.
struct PoolRun {
    std::string label;
    ProblemSpec spec;
    OuterResult result;
    bool converged() const { return result.report.converged; }
};

const std::vector<PoolRun>& pool() {
    static const std::vector<PoolRun> runs = [] {
        std::vector<PoolRun> out;
        const Grid line = build_grid(1, 20.0, 4001);
        for (double eps : {0.0, 0.05, 0.1, 0.2}) {
            BuiltinOptions o;
            o.epsilon = eps;
            const auto spec = builtin_problem("graded_cubic", o);
            out.push_back({"graded eps=" + g6(eps), spec, outer_iterate(spec, line, OuterConfig{})});
        }
        const auto classical = builtin_problem("classical_cubic");
        out.push_back({"classical", classical, outer_iterate(classical, line, OuterConfig{})});
        BuiltinOptions o;
        o.epsilon = 0.05;
        o.p = 3.0;
        o.q = 4.0;
        const auto plap = builtin_problem("plap_model", o);
        out.push_back({"plap_model p=3 2D", plap, outer_iterate(plap, build_grid(2, 8.0, 65), OuterConfig{})});
        return out;
    }();
    return runs;
}

Outcome criterion1() {
    const auto t = std::chrono::steady_clock::now();
    const auto dir = workdir("c1");
    const int code = cli::cmd_solve(config("", dir));
    const double secs = seconds_since(t);
    Outcome o;
    if (code != cli::exit_code::ok) return {false, "cmd_solve exit " + std::to_string(code)};
    const double umax = std::stod(read_kv(dir / "summary.txt").at("max_value"));
    const auto rep = read_table(dir / "outer_report.csv", ',', true);
    const double c = rep.back()[4];
    double umin = 0.0;
    for (const auto& r : read_table(dir / "solution.dat", ' ', false)) umin = std::min(umin, r[1]);
    const double min_interior = rep.back()[5];
    o.pass = std::abs(umax - std::sqrt(2.0)) <= 1e-3 && std::abs(c - 4.0 / 3.0) <= 1e-3 && min_interior > 0.0 &&
             umin >= 0.0 && secs <= 60.0;
    o.detail = "max " + fmt("%.8f", umax) + " (|err| " + g6(std::abs(umax - std::sqrt(2.0))) + "), c_w " +
               fmt("%.8f", c) + " (|err| " + g6(std::abs(c - 4.0 / 3.0)) + "), min_interior " + g6(min_interior) +
               ", " + fmt("%.2f", secs) + " s";
    return o;
}

Outcome criterion2() {
    const auto t = std::chrono::steady_clock::now();
    const auto dir = workdir("c2");
    const int code = cli::cmd_solve(config("problem.name = graded_cubic\nproblem.epsilon = 0.1\n", dir));
    const double secs = seconds_since(t);
    if (code != cli::exit_code::ok) return {false, "cmd_solve exit " + std::to_string(code)};
    const auto sol = read_table(dir / "solution.dat", ' ', false);
    std::size_t imax = 0;
    for (std::size_t k = 0; k < sol.size(); ++k)
        if (sol[k][1] > sol[imax][1]) imax = k;
    const double xbar = sol[imax][0];
    std::vector<double> xs;
    for (const auto& r : sol)
        if (std::abs(r[0] - xbar) <= 15.0) xs.push_back(r[0] - xbar);
    const auto ref = oracle::homoclinic_profile(0.1, xs);
    double err = 0.0;
    std::size_t j = 0;
    for (const auto& r : sol) {
        // outside |x - xbar| <= 15 the homoclinic is below 1e-6
        const double expect = std::abs(r[0] - xbar) <= 15.0 ? ref[j++] : 0.0;
        err = std::max(err, std::abs(r[1] - expect));
    }
    const int iters = std::stoi(read_kv(dir / "summary.txt").at("iterations"));
    Outcome o;
    o.pass = err <= 1e-3 && secs <= 300.0;
    o.detail = "converged in " + std::to_string(iters) + " outer steps, sup |u - shooting| " + g6(err) +
               ", peak " + fmt("%.8f", sol[imax][1]) + " vs " + fmt("%.8f", oracle::homoclinic_peak(0.1)) + ", " +
               fmt("%.2f", secs) + " s";
    return o;
}

Outcome criterion3() {
    Outcome o;
    std::ostringstream d;
    for (const auto& run : pool()) {
        if (run.spec.name != "graded_cubic") continue;
        const auto& rep = run.result.report;
        const double tail = max_tail_ratio(rep);
        d << run.label << ": ";
        if (!rep.converged) {
            d << "not converged; ";
            continue;
        }
        const double dm = rep.d_predicted;
        const bool ok = tail <= dm + 0.1;
        o.pass = o.pass && ok;
        d << "tail " << g6(tail) << " <= d " << g6(dm) << " + 0.1 " << (ok ? "ok" : "VIOLATED") << "; ";
        if (run.spec.epsilon == 0.0) {
            const bool fixed = rep.records.size() == 2 && rep.records[1].delta <= OuterConfig{}.tol_outer &&
                               dm == 0.0;
            o.pass = o.pass && fixed;
            d << "(fixed point after one step: " << (fixed ? "yes" : "NO") << ", delta_2 "
              << g6(rep.records.back().delta) << "); ";
        }
    }
    o.pass = o.pass && pool()[0].converged();
    o.detail = d.str();
    return o;
}

Outcome criterion4() {
    Outcome o;
    int solves = 0;
    double worst_gap = -std::numeric_limits<double>::infinity();
    double min_floor_margin = std::numeric_limits<double>::infinity();
    for (const auto& run : pool()) {
        if (!run.converged()) continue;
        const double p = run.spec.p, theta = run.spec.theta;
        const auto& rep = run.result.report;
        o.pass = o.pass && rep.lambda_config > 0.0;
        for (const auto& r : rep.records) {
            ++solves;
            const double gap = (1.0 / p - 1.0 / theta) * std::pow(r.norm, p) - r.c_w;
            worst_gap = std::max(worst_gap, gap);
            min_floor_margin = std::min(min_floor_margin, r.norm / rep.lambda_config);
            o.pass = o.pass && gap <= 1e-6 && r.norm >= rep.lambda_config;
        }
    }
    o.detail = std::to_string(solves) + " inner solves; max of (1/p-1/theta)||u||^p - c_w = " + g6(worst_gap) +
               " (<= 1e-6); min ||u|| / lambda_config = " + g6(min_floor_margin) + " (>= 1)";
    return o;
}

Outcome criterion5() {
    Outcome o;
    int solves = 0;
    double worst = 0.0;
    for (const auto& run : pool()) {
        for (const auto& r : run.result.report.records) {
            ++solves;
            const double rel = r.identity_error / std::pow(r.norm, run.spec.p);
            worst = std::max(worst, rel);
            o.pass = o.pass && rel <= 1e-4;
        }
    }
    o.detail = std::to_string(solves) + " accepted inner solves; max |I'(u)u| / ||u||^p = " + g6(worst) +
               " (<= 1e-4)";
    return o;
}

Outcome criterion6() {
    struct Case {
        std::string label;
        ProblemSpec spec;
    };
    std::vector<Case> cases;
    cases.push_back({"classical_cubic", builtin_problem("classical_cubic")});
    BuiltinOptions g;
    g.epsilon = 0.1;
    cases.push_back({"graded_cubic", builtin_problem("graded_cubic", g)});
    for (auto [p, q] : {std::pair{1.5, 3.0}, std::pair{3.0, 4.0}}) {
        BuiltinOptions o;
        o.epsilon = 0.1;
        o.p = p;
        o.q = q;
        cases.push_back({"plap_model p=" + g6(p), builtin_problem("plap_model", o)});
    }
    Outcome out;
    std::ostringstream d;
    for (const auto& c : cases) {
        const double p = c.spec.p;
        const Grid grid = c.spec.dim == 1 ? build_grid(1, 10.0, 1001) : build_grid(2, 4.0, 41);
        const double tol = p == 2.0 ? 1e-6 : 1e-4;
        const double eps = p < 2.0 ? 1e-6 : 1e-5;
        double worst = 0.0;
        for (std::uint64_t s = 0; s < 20; ++s) {
            const auto fp = FrozenProblem::from_iterate(c.spec, testing::random_bumps(grid, 2, 1000 + s));
            const auto u = testing::random_bumps(grid, 3, 2000 + s);
            const auto v = testing::random_bumps(grid, 3, 3000 + s);
            const double rv = std::abs(quadrature_dot(fp.residual(u), v));
            worst = std::max(worst, directional_derivative_check(fp, u, v, eps) / (1.0 + rv));
        }
        const auto fp = FrozenProblem::from_iterate(c.spec, testing::random_bumps(grid, 2, 4000));
        const auto u = testing::random_bumps(grid, 3, 4001);
        const auto v = testing::random_bumps(grid, 3, 4002);
        const double ratio =
            directional_derivative_check(fp, u, v, 1e-2) / directional_derivative_check(fp, u, v, 5e-3);
        const bool ok = worst <= tol && ratio >= 3.5 && ratio <= 4.5;
        out.pass = out.pass && ok;
        d << c.label << ": worst " << g6(worst) << " <= " << g6(tol) << ", halving ratio " << fmt("%.3f", ratio)
          << (ok ? "" : " FAILED") << "; ";
    }
    out.detail = d.str();
    return out;
}

// min over a uniform grid on [-2,2]^2 of the monotonicity quotient in 1D
double cp_grid_oracle(double p, int n) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double x = -2.0 + 4.0 * i / (n - 1);
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const double y = -2.0 + 4.0 * j / (n - 1);
            const double fx = std::pow(std::abs(x), p - 2.0) * x;
            const double fy = std::pow(std::abs(y), p - 2.0) * y;
            best = std::min(best, (fx - fy) * (x - y) / std::pow(std::abs(x - y), p));
        }
    }
    return best;
}

Outcome criterion7() {
    Outcome o;
    const double c2a = cp_constant(2.0, 1, 100000).value;
    const double c2b = cp_constant(2.0, 2, 100000).value;
    const double c3 = cp_constant(3.0, 1, 100000).value;
    const double oracle = cp_grid_oracle(3.0, 2001);
    o.pass = std::abs(c2a - 1.0) <= 1e-12 && std::abs(c2b - 1.0) <= 1e-12 && std::abs(c3 - oracle) <= 1e-3 &&
             std::abs(c3 - 0.5) <= 1e-3;
    std::ostringstream d;
    d << "Cp(2) = " << fmt("%.17g", c2a) << " / " << fmt("%.17g", c2b) << " (1D/2D); Cp(3, 1D) = " << g6(c3)
      << " vs grid oracle " << g6(oracle) << "; ";
    for (int dim : {1, 2}) {
        double prev = std::numeric_limits<double>::infinity();
        d << "dim " << dim << ":";
        for (double p : {2.0, 2.5, 3.0, 4.0}) {
            const double c = cp_constant(p, dim, 100000).value;
            o.pass = o.pass && c <= prev;
            prev = c;
            d << ' ' << g6(c);
        }
        d << "; ";
    }
    o.detail = d.str();
    return o;
}

Outcome criterion8() {
    Outcome o;
    std::ostringstream d;
    const SamplingPlan plan;
    const auto classical = builtin_problem("classical_cubic");
    const auto cr = check_f_conditions(classical, plan);
    for (const char* id : {"f1", "f2", "f3", "f4", "f5"}) o.pass = o.pass && cr.at(id).verdict == Verdict::pass;
    d << "classical f1-f5 " << (o.pass ? "pass" : "NOT all pass") << "; ";

    auto with_f = [&](NonlinearityHandle f) {
        ProblemSpec s = classical;
        s.name = "custom";
        s.f = std::move(f);
        return s;
    };
    const double g0[1] = {0.0};
    {
        const auto s = with_f(linear_positive());
        const auto e = check_f_conditions(s, plan).at("f2");
        const auto again = check_f_conditions(s, plan).at("f2");
        const double ratio = s.f(e.witness_t, g0) / std::pow(e.witness_t, s.p - 1.0);
        const bool ok = e.verdict == Verdict::fail && again.witness_t == e.witness_t && ratio >= 0.5;
        o.pass = o.pass && ok;
        d << "f2 planted: " << to_string(e.verdict) << " at t=" << g6(e.witness_t) << " (f/t^{p-1} = " << g6(ratio)
          << ", reproducible " << (again.witness_t == e.witness_t ? "yes" : "no") << "); ";
    }
    {
        const auto s = with_f(abs_power(4.0));
        const auto e = check_f_conditions(s, plan).at("f1");
        const auto again = check_f_conditions(s, plan).at("f1");
        const double gw[1] = {e.witness_x[0]};
        const double fv = s.f(e.witness_t, gw);
        const bool ok = e.verdict == Verdict::fail && e.witness_t < 0.0 && fv != 0.0 &&
                        again.witness_t == e.witness_t;
        o.pass = o.pass && ok;
        d << "f1 planted: " << to_string(e.verdict) << " at t=" << g6(e.witness_t) << " (f = " << g6(fv) << "); ";
    }
    {
        const auto V = quadratic_potential();
        const auto e = check_V_conditions(V, 1, plan).at("V2");
        const auto again = check_V_conditions(V, 1, plan).at("V2");
        const auto open = e.note.find('(');
        const auto comma = e.note.find(',');
        double recheck = 0.0;
        if (open != std::string::npos && comma != std::string::npos) {
            const double sx = std::stod(e.note.substr(open + 1, comma - open - 1));
            recheck = std::abs(V({e.witness_x[0] + sx, e.witness_x[1]}) - V({e.witness_x[0], e.witness_x[1]}));
        }
        const bool ok = e.verdict == Verdict::fail && recheck > 0.0 &&
                        std::abs(recheck - e.measured) <= 1e-12 * std::max(1.0, e.measured) &&
                        again.witness_x == e.witness_x;
        o.pass = o.pass && ok;
        d << "V2 planted: " << to_string(e.verdict) << " at x=" << g6(e.witness_x[0]) << " (|V(x+T)-V(x)| = "
          << g6(recheck) << ")";
    }
    o.detail = d.str();
    return o;
}

Outcome criterion9() {
    Outcome o;
    std::ostringstream d;
    for (const auto& run : pool()) {
        if (!run.converged()) continue;
        const auto& last = run.result.report.records.back();
        const double rel = last.negative_part_norm / last.norm;
        const double mn = run.result.u.min_interior();
        const bool ok = rel <= 1e-6 && mn > 0.0;
        o.pass = o.pass && ok;
        d << run.label << ": neg/||u|| " << g6(rel) << ", min_interior " << g6(mn) << (ok ? "" : " FAILED") << "; ";
    }
    o.detail = d.str();
    return o;
}

Outcome criterion10() {
    const auto dir = workdir("c10");
    const int code = cli::cmd_study(config("", dir), "radius", {10.0, 20.0});
    if (code != cli::exit_code::ok) return {false, "cmd_study exit " + std::to_string(code)};
    const auto rows = read_table(dir / "study.csv", ',', true);
    const double m10 = rows[0][8], m20 = rows[1][8];
    const double mf10 = read_table(dir / "point_00" / "outer_report.csv", ',', true).back()[6];
    const double mf20 = read_table(dir / "point_01" / "outer_report.csv", ',', true).back()[6];
    Outcome o;
    o.pass = std::abs(m10 - m20) <= 1e-4 && mf10 >= 0.999 && mf20 >= 0.999;
    o.detail = "max R=10 " + fmt("%.10f", m10) + ", R=20 " + fmt("%.10f", m20) + " (|diff| " +
               g6(std::abs(m10 - m20)) + "); mass fraction " + fmt("%.6f", mf10) + " / " + fmt("%.6f", mf20);
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"closed-form ground state", criterion1},
        {"shooting oracle for the graded problem", criterion2},
        {"contraction law on the epsilon sweep", criterion3},
        {"norm bound and lambda floor", criterion4},
        {"critical-point identity", criterion5},
        {"variational consistency", criterion6},
        {"monotonicity constant Cp", criterion7},
        {"hypothesis checker soundness", criterion8},
        {"positivity of final iterates", criterion9},
        {"truncation robustness", criterion10},
    };
    bool all = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        all = all && o.pass;
        std::cout << "criterion " << i + 1 << " (" << criteria[i].first << "): " << (o.pass ? "PASS" : "FAIL")
                  << " | " << o.detail << " [" << fmt("%.2f", seconds_since(t)) << " s]" << std::endl;
    }
    return all ? 0 : 1;
}
