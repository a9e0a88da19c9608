#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "plapmp/cli.hpp"
#include "plapmp/hypotheses.hpp"
#include "plapmp/io.hpp"

namespace plapmp::cli {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
    return os;
}

void write_metadata(const fs::path& dir, const std::string& command) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    auto os = open_out(dir / "metadata.txt");
    os << "command = " << command << '\n';
    os << "timestamp_utc = " << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ") << '\n';
}

void write_effective(const RunConfig& cfg, const fs::path& dir) {
    auto os = open_out(dir / "config.effective.txt");
    cfg.write_effective(os);
}

void say(const CommandOptions& opts, const std::string& line) {
    if (opts.verbose && opts.log != nullptr) *opts.log << line << '\n';
}

struct SolveOutcome {
    int exit = exit_code::ok;
    bool converged = false;
    int iterations = 0;
    double max_tail_ratio = 0.0;
    double d_predicted = 0.0;
    double final_norm = 0.0;
    double max_value = 0.0;
};

void write_iterations_log(std::ostream& os, const OuterReport& report) {
    for (const auto& r : report.records) {
        for (const auto& m : r.mp_log) {
            os << "mp outer=" << r.n << " iter=" << m.iter << " c_w=" << num(m.c_w)
               << " residual=" << num(m.residual) << " step=" << num(m.step) << '\n';
        }
        os << "outer n=" << r.n << " norm=" << num(r.norm) << " delta=" << num(r.delta)
           << " ratio=" << num(r.ratio) << " c_w=" << num(r.c_w) << " mp_iters=" << r.mp_iters
           << " mp_residual=" << num(r.mp_residual) << " identity_error=" << num(r.identity_error)
           << " eta_check=" << num(r.eta_check) << " norm_bound_ok=" << (r.norm_bound_ok ? 1 : 0)
           << " lambda_ok=" << (r.lambda_ok ? 1 : 0) << '\n';
    }
}

SolveOutcome solve_into(const RunConfig& cfg, const fs::path& dir, const CommandOptions& opts) {
    const ProblemSpec spec = cfg.problem();
    const Grid grid = cfg.grid();
    const OuterConfig oc = cfg.outer();
    fs::create_directories(dir);
    write_effective(cfg, dir);
    write_metadata(dir, "solve");
    say(opts, "solve: " + spec.name + " on " + std::to_string(grid.points_per_axis()) + " points per axis");

    SolveOutcome out;
    OuterResult result{GridFunction(grid), {}};
    try {
        result = outer_iterate(spec, grid, oc);
    } catch (const InnerSolveFailure& e) {
        say(opts, e.what());
        {
            auto os = open_out(dir / "solution.dat.partial");
            write_solution(os, e.last_iterate());
        }
        {
            auto os = open_out(dir / "outer_report.csv.partial");
            write_report_csv(os, e.partial_report());
        }
        {
            auto os = open_out(dir / "iterations.log.partial");
            write_iterations_log(os, e.partial_report());
        }
        {
            auto os = open_out(dir / "summary.txt.partial");
            os << "status = inner_failure\n";
            os << "failed_outer_step = " << e.iteration() << '\n';
            os << "reason = " << e.what() << '\n';
        }
        out.exit = exit_code::inner_failure;
        out.iterations = static_cast<int>(e.partial_report().records.size());
        return out;
    }

    const OuterReport& report = result.report;
    std::optional<AuditVerdict> audit;
    if (report.records.size() >= 3 && report.constants) audit = contraction_audit(report, *report.constants);
    {
        auto os = open_out(dir / "solution.dat");
        write_solution(os, result.u);
    }
    {
        auto os = open_out(dir / "outer_report.csv");
        write_report_csv(os, report);
    }
    {
        auto os = open_out(dir / "summary.txt");
        write_summary(os, report, result.u, audit);
    }
    {
        auto os = open_out(dir / "iterations.log");
        write_iterations_log(os, report);
    }
    for (int axis = 0; axis < grid.dim(); ++axis) {
        auto os = open_out(dir / (axis == 0 ? "profile_x.dat" : "profile_y.dat"));
        write_profile(os, result.u, axis);
    }
    for (const auto& r : report.records) {
        say(opts, "outer n=" + std::to_string(r.n) + " delta=" + num(r.delta) + " c_w=" + num(r.c_w));
    }

    out.converged = report.converged;
    out.iterations = static_cast<int>(report.records.size());
    out.max_tail_ratio = max_tail_ratio(report);
    out.d_predicted = report.d_predicted;
    out.final_norm = report.records.back().norm;
    out.max_value = result.u.max_value();
    if (report.converged) out.exit = exit_code::ok;
    else if (report.diverged) out.exit = exit_code::diverged;
    else out.exit = exit_code::not_converged;
    return out;
}

}  // namespace

void write_solution(std::ostream& os, const GridFunction& u) {
    const Grid& g = u.grid();
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Point x = g.point(k);
        os << num(x[0]);
        if (g.dim() == 2) os << ' ' << num(x[1]);
        os << ' ' << num(u[k]) << '\n';
    }
}

void write_profile(std::ostream& os, const GridFunction& u, int axis) {
    const Grid& g = u.grid();
    if (axis < 0 || axis >= g.dim()) throw std::invalid_argument("profile axis out of range");
    const int m = g.points_per_axis();
    const int mid = m / 2;
    for (int i = 0; i < m; ++i) {
        const std::size_t k = g.dim() == 1 ? g.index(i) : (axis == 0 ? g.index(i, mid) : g.index(mid, i));
        os << num(g.coord(i)) << ' ' << num(u[k]) << '\n';
    }
}

int cmd_check(const RunConfig& cfg, const CommandOptions& opts) {
    cfg.validate();
    const ProblemSpec spec = cfg.problem();
    const SamplingPlan plan = cfg.sampling();
    const fs::path dir = cfg.output_dir();
    fs::create_directories(dir);
    write_effective(cfg, dir);
    write_metadata(dir, "check");

    const HypothesisReport fr = check_f_conditions(spec, plan);
    const HypothesisReport vr = check_V_conditions(spec.V, spec.dim, plan);
    const ConstantsEstimate est =
        estimate_constants(spec, cfg.get_double("check.rho1"), cfg.get_double("check.rho2"),
                           static_cast<int>(cfg.get_int("check.lipschitz_samples")),
                           static_cast<int>(cfg.get_int("check.cp_samples")), cfg.seed());
    {
        auto os = open_out(dir / "hypotheses_f.txt");
        write_report(os, fr);
    }
    {
        auto os = open_out(dir / "hypotheses_V.txt");
        write_report(os, vr);
    }
    {
        auto os = open_out(dir / "constants.txt");
        write_constants(os, est);
    }
    for (const auto* rep : {&fr, &vr}) {
        for (const auto& e : rep->entries) say(opts, e.id + ": " + to_string(e.verdict));
    }
    say(opts, "d = " + num(est.d));

    if (fr.any(Verdict::fail) || vr.any(Verdict::fail)) return exit_code::violation;
    if (fr.any(Verdict::indeterminate) || vr.any(Verdict::indeterminate) || !est.cp_guaranteed) {
        return exit_code::indeterminate;
    }
    return exit_code::ok;
}

int cmd_solve(const RunConfig& cfg, const CommandOptions& opts) {
    cfg.validate();
    return solve_into(cfg, cfg.output_dir(), opts).exit;
}

int cmd_study(const RunConfig& cfg, const std::string& parameter, const std::vector<double>& values,
              const CommandOptions& opts) {
    if (values.empty()) throw ConfigError(0, "sweep", "empty value list");
    if (values.size() > 32) throw ConfigError(0, "sweep", "at most 32 values");
    std::vector<RunConfig> points;
    for (double v : values) {
        RunConfig c = cfg;
        if (parameter == "epsilon") {
            c.set("problem.epsilon", num(v));
        } else if (parameter == "p") {
            c.set("problem.p", num(v));
        } else if (parameter == "radius") {
            c.set("grid.radius", num(v));
        } else if (parameter == "h") {
            c.unset("grid.points_per_axis");
            c.set("grid.h", num(v));
        } else {
            throw ConfigError(0, "sweep", "unknown sweep parameter '" + parameter + "'");
        }
        c.validate();
        points.push_back(std::move(c));
    }
    const fs::path dir = cfg.output_dir();
    fs::create_directories(dir);
    write_effective(cfg, dir);
    write_metadata(dir, "study");

    std::ostringstream table;
    table << "parameter,value,exit_code,converged,iterations,max_tail_ratio,d_predicted,final_norm,max_value\n";
    int worst = exit_code::ok;
    for (std::size_t i = 0; i < points.size(); ++i) {
        std::ostringstream name;
        name << "point_" << std::setw(2) << std::setfill('0') << i;
        say(opts, "study " + parameter + " = " + num(values[i]));
        const SolveOutcome o = solve_into(points[i], dir / name.str(), opts);
        table << parameter << ',' << num(values[i]) << ',' << o.exit << ',' << (o.converged ? "true" : "false")
              << ',' << o.iterations << ',' << num(o.max_tail_ratio) << ',' << num(o.d_predicted) << ','
              << num(o.final_norm) << ',' << num(o.max_value) << '\n';
        worst = std::max(worst, o.exit);
    }
    auto os = open_out(dir / "study.csv");
    os << table.str();
    return worst;
}

}  // namespace plapmp::cli
