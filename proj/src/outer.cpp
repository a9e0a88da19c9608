#include "plapmp/outer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <ostream>
#include <random>

#include "plapmp/frozen.hpp"
#include "plapmp/io.hpp"

namespace plapmp {

InitialGuess parse_initial_guess(const std::string& name) {
    if (name == "zero") return InitialGuess::zero;
    if (name == "sech_bump") return InitialGuess::sech_bump;
    if (name == "random_bump") return InitialGuess::random_bump;
    throw std::invalid_argument("unknown initial guess '" + name + "'");
}

std::string to_string(InitialGuess g) {
    switch (g) {
        case InitialGuess::zero: return "zero";
        case InitialGuess::sech_bump: return "sech_bump";
        case InitialGuess::random_bump: return "random_bump";
    }
    return "?";
}

GridFunction initial_guess(const Grid& grid, InitialGuess kind, std::uint64_t seed) {
    const int dim = grid.dim();
    GridFunction u(grid);
    switch (kind) {
        case InitialGuess::zero:
            return u;
        case InitialGuess::sech_bump:
            u = GridFunction::sample(grid, [dim](const Point& x) {
                double s = std::sqrt(2.0) / std::cosh(x[0]);
                if (dim == 2) s /= std::cosh(x[1]);
                return s;
            });
            break;
        case InitialGuess::random_bump: {
            std::mt19937_64 rng(seed);
            const double R = grid.radius();
            std::uniform_real_distribution<double> centre(-0.2 * R, 0.2 * R);
            std::uniform_real_distribution<double> amp(0.5, 2.0);
            std::uniform_real_distribution<double> width(0.5, 2.0);
            for (int b = 0; b < 3; ++b) {
                const double cx = centre(rng);
                const double cy = dim == 2 ? centre(rng) : 0.0;
                const double a = amp(rng);
                const double s = std::min(width(rng), 0.2 * R);
                u += GridFunction::sample(grid, [&](const Point& x) {
                    double r2 = (x[0] - cx) * (x[0] - cx);
                    if (dim == 2) r2 += (x[1] - cy) * (x[1] - cy);
                    return a * std::exp(-0.5 * r2 / (s * s));
                });
            }
            break;
        }
    }
    u.zero_boundary();
    return u;
}

void validate(const OuterConfig& cfg) {
    if (!(cfg.tol_outer > 0.0)) throw std::invalid_argument("tol_outer must be positive");
    if (cfg.max_outer < 1) throw std::invalid_argument("max_outer must be >= 1");
    if (cfg.divergence_window < 2) throw std::invalid_argument("divergence_window must be >= 2");
    if (!(cfg.lambda_factor > 0.0 && cfg.lambda_factor <= 1.0)) {
        throw std::invalid_argument("lambda_factor must lie in (0, 1]");
    }
    if (cfg.mp.path_points < 3) throw std::invalid_argument("mp.path_points must be >= 3");
    if (cfg.mp.max_iters < 1) throw std::invalid_argument("mp.max_iters must be >= 1");
    if (!(cfg.mp.descent_step > 0.0)) throw std::invalid_argument("mp.descent_step must be positive");
    if (!(cfg.mp.residual_tol > 0.0)) throw std::invalid_argument("mp.residual_tol must be positive");
}

namespace {

double sup_gradient(const GridFunction& u) { return gradient_field(u).max_magnitude(); }

}  // namespace

OuterResult outer_iterate(const ProblemSpec& input, const Grid& grid, const OuterConfig& cfg) {
    ProblemSpec spec = input;
    validate(spec);
    validate(cfg);
    if (grid.dim() != spec.dim) throw std::invalid_argument("grid dimension does not match problem");
    const double p = spec.p;
    const double reg = cfg.mp.regularization;

    GridFunction u_prev = cfg.u0 ? *cfg.u0 : GridFunction(grid);
    if (!(u_prev.grid() == grid)) throw std::invalid_argument("u0 grid mismatch");
    u_prev.zero_boundary();

    std::unique_ptr<SobolevPreconditioner> pre;
    if (p == 2.0) pre = std::make_unique<SobolevPreconditioner>(grid, spec.V.floor);

    OuterReport report;
    auto fail = [&](int n, const std::string& why, const GridFunction& last) {
        return InnerSolveFailure(n, "inner solve failed at outer step " + std::to_string(n) + ": " + why,
                                 report, last);
    };

    // Reference solve with w = 0 fixes lambda_config; with u0 = 0 it is step 1.
    std::optional<MPResult> reference;
    try {
        const FrozenProblem fp0(spec, zero_field(grid), reg);
        reference = mountain_pass_solve(fp0, cfg.mp, nullptr, pre.get());
    } catch (const std::exception& e) {
        throw fail(0, e.what(), u_prev);
    }
    if (!reference->converged) throw fail(0, "reference solve did not converge", u_prev);
    report.lambda_config = cfg.lambda_factor * reference->norm;

    double sup_u = 0.0;
    double sup_grad = 0.0;
    int non_decreasing = 0;
    GridFunction u = u_prev;
    for (int n = 1; n <= cfg.max_outer; ++n) {
        MPResult res{.u_w = GridFunction(grid)};
        if (n == 1 && u_prev.is_zero()) {
            res = std::move(*reference);
        } else {
            try {
                const FrozenProblem fp = FrozenProblem::from_iterate(spec, u_prev, reg);
                res = mountain_pass_solve(fp, cfg.mp, &u_prev, pre.get());
            } catch (const std::exception& e) {
                throw fail(n, e.what(), u_prev);
            }
        }
        if (!res.converged) {
            throw fail(n, "residual " + num(res.residual_norm) + " above tolerance after " +
                              std::to_string(res.iters) + " iterations",
                       res.u_w);
        }
        u = res.u_w;

        OuterRecord rec;
        rec.n = n;
        rec.norm = res.norm;
        rec.delta = w_norm(u - u_prev, spec.V, p);
        rec.ratio = report.records.empty() ? std::numeric_limits<double>::quiet_NaN()
                                           : rec.delta / report.records.back().delta;
        rec.c_w = res.c_w;
        rec.min_interior = res.min_interior;
        rec.negative_part_norm = res.negative_part_norm;
        rec.mass_fraction = res.mass_fraction;
        rec.mp_residual = res.residual_norm;
        rec.mp_iters = res.iters;
        rec.identity_error = res.identity_error;
        rec.alpha_probe = res.alpha_probe;
        const double c = std::max(res.c_w, 0.0);
        rec.eta_check = std::pow(c * spec.theta * p / (spec.theta - p), 1.0 / p) + 1e-6;
        rec.norm_bound_ok = (1.0 / p - 1.0 / spec.theta) * std::pow(res.norm, p) <= res.c_w + 1e-6;
        rec.lambda_ok = res.norm >= report.lambda_config;
        rec.sup_u = u.max_abs();
        rec.sup_grad = sup_gradient(u);
        sup_u = std::max(sup_u, rec.sup_u);
        sup_grad = std::max(sup_grad, rec.sup_grad);
        rec.mp_log = std::move(res.log);

        if (!report.records.empty() && rec.delta >= report.records.back().delta) {
            ++non_decreasing;
        } else {
            non_decreasing = 0;
        }
        report.records.push_back(rec);
        u_prev = u;
        if (rec.delta <= cfg.tol_outer) break;
        if (non_decreasing >= cfg.divergence_window) {
            report.diverged = true;
            break;
        }
    }

    const FrozenProblem self = FrozenProblem::from_iterate(spec, u, reg);
    report.final_residual = quadrature_norm(self.residual(u));
    report.converged = !report.diverged && report.records.back().delta <= cfg.tol_outer &&
                       report.final_residual <= 10.0 * cfg.mp.residual_tol;

    const ConstantsEstimate est = estimate_constants(spec, 1.5 * sup_u, 1.5 * sup_grad,
                                                     cfg.lipschitz_samples, cfg.cp_samples, cfg.seed);
    report.constants = est;
    report.d_predicted = est.d;
    return {std::move(u), std::move(report)};
}

double max_tail_ratio(const OuterReport& report) {
    const std::size_t n = report.records.size();
    double best = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = n / 2; i < n; ++i) {
        const double r = report.records[i].ratio;
        if (std::isnan(r)) continue;
        if (std::isnan(best) || r > best) best = r;
    }
    return best;
}

AuditVerdict contraction_audit(const OuterReport& report, const ConstantsEstimate& est) {
    if (report.records.size() < 3) {
        throw std::invalid_argument("contraction audit needs at least 3 outer records");
    }
    AuditVerdict v;
    v.max_tail_ratio = max_tail_ratio(report);
    v.d_predicted = est.d;
    v.guarantee_holds = est.guarantee_holds;
    v.informational = !est.guarantee_holds;
    v.consistent = v.max_tail_ratio <= est.d + 0.1;
    return v;
}

void write_report_csv(std::ostream& os, const OuterReport& report) {
    os << "n,norm,delta,ratio,c_w,min_interior,mass_fraction\n";
    for (const auto& r : report.records) {
        os << r.n << ',' << num(r.norm) << ',' << num(r.delta) << ',' << num(r.ratio) << ','
           << num(r.c_w) << ',' << num(r.min_interior) << ',' << num(r.mass_fraction) << '\n';
    }
}

void write_summary(std::ostream& os, const OuterReport& report, const GridFunction& u,
                   const std::optional<AuditVerdict>& audit) {
    os << "converged = " << (report.converged ? "true" : "false") << '\n';
    os << "diverged = " << (report.diverged ? "true" : "false") << '\n';
    os << "iterations = " << report.records.size() << '\n';
    os << "final_residual = " << num(report.final_residual) << '\n';
    os << "final_norm = " << num(report.records.empty() ? 0.0 : report.records.back().norm) << '\n';
    os << "max_value = " << num(u.max_value()) << '\n';
    os << "min_interior = " << num(u.min_interior()) << '\n';
    os << "lambda_config = " << num(report.lambda_config) << '\n';
    if (!report.records.empty()) {
        const auto& last = report.records.back();
        os << "eta_check = " << num(last.eta_check) << '\n';
        bool norm_ok = true;
        bool lambda = true;
        for (const auto& r : report.records) {
            norm_ok = norm_ok && r.norm_bound_ok;
            lambda = lambda && r.lambda_ok;
        }
        os << "norm_bound_ok = " << (norm_ok ? "true" : "false") << '\n';
        os << "lambda_floor_ok = " << (lambda ? "true" : "false") << '\n';
        os << "negative_part_norm = " << num(last.negative_part_norm) << '\n';
    }
    os << "max_tail_ratio = " << num(max_tail_ratio(report)) << '\n';
    os << "d_predicted = " << num(report.d_predicted) << '\n';
    if (report.constants) {
        const auto& c = *report.constants;
        os << "L1 = " << num(c.L1) << '\n';
        os << "L2 = " << num(c.L2) << '\n';
        os << "Cp = " << num(c.Cp) << '\n';
        os << "rho1 = " << num(c.rho1) << '\n';
        os << "rho2 = " << num(c.rho2) << '\n';
        os << "guarantee_holds = " << (c.guarantee_holds ? "true" : "false") << '\n';
    }
    if (audit) {
        os << "audit = "
           << (audit->informational ? "informational" : (audit->consistent ? "consistent" : "inconsistent"))
           << '\n';
    } else {
        os << "audit = insufficient_records\n";
    }
}

}  // namespace plapmp
