#include "plapmp/hypotheses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>

#include "plapmp/io.hpp"

namespace plapmp {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::indeterminate: return "indeterminate";
    }
    return "?";
}

const HypothesisEntry& HypothesisReport::at(const std::string& id) const {
    for (const auto& e : entries) {
        if (e.id == id) return e;
    }
    throw std::out_of_range("no hypothesis entry '" + id + "'");
}

bool HypothesisReport::any(Verdict v) const {
    return std::any_of(entries.begin(), entries.end(), [v](const auto& e) { return e.verdict == v; });
}

namespace {

using Vec2 = std::array<double, 2>;

double norm2(const Vec2& v, int dim) {
    return dim == 1 ? std::abs(v[0]) : std::hypot(v[0], v[1]);
}

/// Log-spaced samples, grouped by decade: result[k] covers [lo*10^k, lo*10^{k+1}).
/// The upper endpoint is appended to the last decade.
std::vector<std::vector<double>> decades(double lo, double hi, int per_decade) {
    const int n = static_cast<int>(std::lround(std::log10(hi / lo)));
    std::vector<std::vector<double>> out(n);
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < per_decade; ++j) {
            out[k].push_back(lo * std::pow(10.0, k + static_cast<double>(j) / per_decade));
        }
    }
    out.back().push_back(hi);
    return out;
}

std::vector<Vec2> xi_samples(int dim, const SamplingPlan& plan) {
    std::mt19937_64 rng(plan.seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    std::vector<Vec2> dirs;
    if (dim == 1) {
        dirs = {{1.0, 0.0}, {-1.0, 0.0}};
    } else {
        dirs = {{1.0, 0.0}, {0.0, 1.0}};
        for (int i = 0; i < plan.xi_directions; ++i) {
            const double a = angle(rng);
            dirs.push_back({std::cos(a), std::sin(a)});
        }
    }
    std::vector<Vec2> out;
    for (double m : plan.xi_magnitudes) {
        if (m == 0.0) {
            out.push_back({0.0, 0.0});
            continue;
        }
        for (const auto& d : dirs) out.push_back({m * d[0], m * d[1]});
    }
    return out;
}

Verdict decay_verdict(double last, double previous) {
    if (last == 0.0) return Verdict::pass;
    if (previous > 0.0 && last < 0.1 * previous) return Verdict::pass;
    if (last > 1e-8 && last >= 0.5 * previous) return Verdict::fail;
    return Verdict::indeterminate;
}

struct RatioScan {
    double ratio = 0.0;
    double t = 0.0;
    Vec2 xi{0.0, 0.0};
};

RatioScan scan_ratio(const ProblemSpec& spec, const std::vector<double>& ts,
                     const std::vector<Vec2>& xis, double exponent, std::size_t& samples) {
    RatioScan best;
    for (double t : ts) {
        for (const auto& xi : xis) {
            const Vec2 g = flux_vector(xi, spec.p, spec.dim);
            const double r = std::abs(spec.f(t, std::span<const double>(g.data(), spec.dim))) /
                             std::pow(t, exponent);
            ++samples;
            if (r > best.ratio || best.t == 0.0) best = {r, t, xi};
        }
    }
    return best;
}

HypothesisEntry decay_entry(const std::string& id, const ProblemSpec& spec,
                            const std::vector<std::vector<double>>& bins, bool at_small_end,
                            const std::vector<Vec2>& xis, double exponent) {
    HypothesisEntry e;
    e.id = id;
    const std::size_t n = bins.size();
    const auto& last_bin = at_small_end ? bins.front() : bins.back();
    const auto& prev_bin = at_small_end ? bins[1] : bins[n - 2];
    std::size_t samples = 0;
    const RatioScan last = scan_ratio(spec, last_bin, xis, exponent, samples);
    const RatioScan prev = scan_ratio(spec, prev_bin, xis, exponent, samples);
    e.verdict = decay_verdict(last.ratio, prev.ratio);
    e.witness_t = last.t;
    e.witness_x = last.xi;
    e.measured = last.ratio;
    e.samples = samples;
    e.note = "previous_decade_ratio=" + num(prev.ratio) + " exponent=" + num(exponent);
    return e;
}

}  // namespace

std::array<double, 2> flux_vector(const std::array<double, 2>& xi, double p, int dim) {
    const double r = norm2(xi, dim);
    if (r == 0.0) return {0.0, 0.0};
    const double s = std::pow(r, p - 2.0);
    return {s * xi[0], dim == 2 ? s * xi[1] : 0.0};
}

double f3_test_exponent(const ProblemSpec& spec) {
    const double pstar = critical_exponent(spec.p, spec.dim);
    if (std::isinf(pstar)) return 2.0 * spec.q;
    return 0.5 * (spec.q + pstar);
}

HypothesisReport check_f_conditions(const ProblemSpec& spec, const SamplingPlan& plan) {
    HypothesisReport report;
    const auto xis = xi_samples(spec.dim, plan);
    const auto near = decades(plan.t_min, 1.0, plan.samples_per_decade);
    const auto far = decades(1.0, plan.t_max, plan.samples_per_decade);
    std::vector<double> all_t;
    for (const auto* group : {&near, &far}) {
        for (const auto& bin : *group) all_t.insert(all_t.end(), bin.begin(), bin.end());
    }
    auto g_of = [&](const Vec2& xi) { return flux_vector(xi, spec.p, spec.dim); };

    {
        HypothesisEntry e;
        e.id = "f1";
        e.witness_t = -all_t.front();
        for (double t : all_t) {
            for (const auto& xi : xis) {
                const Vec2 g = g_of(xi);
                const double v = std::abs(spec.f(-t, std::span<const double>(g.data(), spec.dim)));
                ++e.samples;
                if (v > e.measured) {
                    e.measured = v;
                    e.witness_t = -t;
                    e.witness_x = xi;
                }
            }
        }
        e.verdict = e.measured == 0.0 ? Verdict::pass : Verdict::fail;
        e.note = "max |f(t,.)| over t < 0";
        report.entries.push_back(e);
    }

    report.entries.push_back(decay_entry("f2", spec, near, true, xis, spec.p - 1.0));
    report.entries.push_back(decay_entry("f3", spec, far, false, xis, f3_test_exponent(spec) - 1.0));

    {
        // theta F <= t f, with theta F > 0; measured = worst relative excess.
        HypothesisEntry e4;
        e4.id = "f4";
        e4.measured = -std::numeric_limits<double>::infinity();
        HypothesisEntry e5;
        e5.id = "f5";
        e5.measured = std::numeric_limits<double>::infinity();
        bool positivity_failed = false;
        for (double t : all_t) {
            for (const auto& xi : xis) {
                const Vec2 g = g_of(xi);
                const std::span<const double> gs(g.data(), spec.dim);
                const double F = F_eval(spec.f, t, gs);
                const double tf = t * spec.f(t, gs);
                const double thF = spec.theta * F;
                const double excess = (thF - tf) / std::max(std::abs(tf), 1e-300);
                ++e4.samples;
                if (!(thF > 0.0) && !positivity_failed) {
                    positivity_failed = true;
                    e4.measured = excess;
                    e4.witness_t = t;
                    e4.witness_x = xi;
                } else if (!positivity_failed && excess > e4.measured) {
                    e4.measured = excess;
                    e4.witness_t = t;
                    e4.witness_x = xi;
                }
                const double lower = spec.a * std::pow(t, spec.theta) - spec.b;
                const double slack = (F - lower) / (1.0 + std::abs(lower));
                ++e5.samples;
                if (slack < e5.measured) {
                    e5.measured = slack;
                    e5.witness_t = t;
                    e5.witness_x = xi;
                }
            }
        }
        e4.verdict = (!positivity_failed && e4.measured <= 1e-12) ? Verdict::pass : Verdict::fail;
        e4.note = positivity_failed ? "theta*F <= 0 at witness" : "max (theta F - t f)/|t f|";
        e5.verdict = e5.measured >= -1e-12 ? Verdict::pass : Verdict::fail;
        e5.note = "min (F - a t^theta + b)/(1 + |a t^theta - b|)";
        report.entries.push_back(e4);
        report.entries.push_back(e5);
    }
    return report;
}

HypothesisReport check_V_conditions(const PotentialHandle& V, int dim, const SamplingPlan& plan) {
    std::mt19937_64 rng(plan.seed + 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> shift(-plan.max_shift, plan.max_shift);

    std::vector<Vec2> xs;
    const int m = plan.cell_points_per_axis;
    for (int j = 0; j < (dim == 2 ? m : 1); ++j) {
        for (int i = 0; i < m; ++i) {
            xs.push_back({V.period[0] * i / m, dim == 2 ? V.period[1] * j / m : 0.0});
        }
    }
    for (int k = 0; k < plan.cell_random_points; ++k) {
        xs.push_back({V.period[0] * unit(rng), dim == 2 ? V.period[1] * unit(rng) : 0.0});
    }

    HypothesisReport report;
    HypothesisEntry e1;
    e1.id = "V1";
    e1.measured = std::numeric_limits<double>::infinity();
    for (const auto& x : xs) {
        const double v = V(x);
        ++e1.samples;
        if (v < e1.measured) {
            e1.measured = v;
            e1.witness_x = x;
        }
    }
    const bool floor_ok = V.floor > 0.0 && e1.measured >= V.floor * (1.0 - 1e-12);
    e1.verdict = floor_ok && e1.measured > 0.0 ? Verdict::pass : Verdict::fail;
    e1.note = "declared_floor=" + num(V.floor);
    report.entries.push_back(e1);

    std::vector<Vec2> shifts;
    while (static_cast<int>(shifts.size()) < plan.lattice_shifts) {
        Vec2 y{static_cast<double>(shift(rng)), dim == 2 ? static_cast<double>(shift(rng)) : 0.0};
        if (y[0] == 0.0 && y[1] == 0.0) continue;
        shifts.push_back({y[0] * V.period[0], y[1] * V.period[1]});
    }
    // Unit shifts along each axis always take part.
    shifts.push_back({V.period[0], 0.0});
    if (dim == 2) shifts.push_back({0.0, V.period[1]});

    HypothesisEntry e2;
    e2.id = "V2";
    Vec2 worst_shift{0.0, 0.0};
    // Every shift meets a strided subset of the cell points, all points meet the unit shifts.
    const std::size_t stride = std::max<std::size_t>(1, xs.size() / 500);
    for (std::size_t s = 0; s < shifts.size(); ++s) {
        const bool unit_shift = s + static_cast<std::size_t>(dim) >= shifts.size();
        for (std::size_t k = 0; k < xs.size(); k += unit_shift ? 1 : stride) {
            const auto& x = xs[k];
            const double r = std::abs(V({x[0] + shifts[s][0], x[1] + shifts[s][1]}) - V(x));
            ++e2.samples;
            if (r > e2.measured) {
                e2.measured = r;
                e2.witness_x = x;
                worst_shift = shifts[s];
            }
        }
    }
    e2.verdict = e2.measured <= 1e-10 * std::max(1.0, std::abs(e1.measured)) ? Verdict::pass
                                                                            : Verdict::fail;
    e2.note = "shift=(" + num(worst_shift[0]) + "," + num(worst_shift[1]) + ")";
    report.entries.push_back(e2);
    return report;
}

LipschitzPlan lipschitz_plan(int dim, double rho1, double rho2, int samples, std::uint64_t seed) {
    if (!(rho1 > 0.0) || !(rho2 > 0.0)) throw std::invalid_argument("rho1 and rho2 must be positive");
    if (samples < 10000) throw std::invalid_argument("Lipschitz sampling needs at least 1e4 samples");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> log_sep(-4.0, 0.0);

    auto ball = [&](double radius) -> Vec2 {
        if (dim == 1) return {radius * (2.0 * unit(rng) - 1.0), 0.0};
        const double r = radius * std::sqrt(unit(rng));
        const double a = 2.0 * std::numbers::pi * unit(rng);
        return {r * std::cos(a), r * std::sin(a)};
    };
    auto direction = [&]() -> Vec2 {
        if (dim == 1) return {unit(rng) < 0.5 ? -1.0 : 1.0, 0.0};
        const double a = 2.0 * std::numbers::pi * unit(rng);
        return {std::cos(a), std::sin(a)};
    };
    auto clip_ball = [&](Vec2 v) {
        const double r = norm2(v, dim);
        if (r > rho2) {
            v[0] *= rho2 / r;
            v[1] *= rho2 / r;
        }
        return v;
    };

    LipschitzPlan plan;
    const int half = samples / 2;
    for (int k = 0; k < half; ++k) {
        LipschitzPair pr;
        pr.xi1 = (k % 7 == 0) ? Vec2{0.0, 0.0} : ball(rho2);
        pr.xi2 = pr.xi1;
        if (k % 4 == 0) {
            pr.t1 = rho1 * unit(rng);
            pr.t2 = rho1 * unit(rng);
        } else {
            pr.t1 = (k % 10 == 1) ? rho1 : rho1 * unit(rng);
            const double sep = rho1 * std::pow(10.0, log_sep(rng));
            pr.t2 = pr.t1 - sep >= 0.0 ? pr.t1 - sep : std::min(rho1, pr.t1 + sep);
        }
        if (pr.t1 != pr.t2) plan.t_pairs.push_back(pr);
    }
    for (int k = 0; k < samples - half; ++k) {
        LipschitzPair pr;
        pr.t1 = (k % 10 == 1) ? rho1 : rho1 * unit(rng);
        pr.t2 = pr.t1;
        if (k % 4 == 0) {
            pr.xi1 = ball(rho2);
            pr.xi2 = ball(rho2);
        } else {
            pr.xi1 = (k % 3 == 0) ? Vec2{0.0, 0.0} : ball(rho2);
            const double sep = rho2 * std::pow(10.0, log_sep(rng));
            const Vec2 d = direction();
            pr.xi2 = clip_ball({pr.xi1[0] + sep * d[0], pr.xi1[1] + sep * d[1]});
        }
        if (pr.xi1 != pr.xi2) plan.xi_pairs.push_back(pr);
    }
    return plan;
}

LipschitzEstimate estimate_lipschitz(const ProblemSpec& spec, const LipschitzPlan& plan) {
    if (plan.t_pairs.empty() || plan.xi_pairs.empty()) {
        throw std::invalid_argument("degenerate Lipschitz sampling plan");
    }
    LipschitzEstimate est;
    const double e = spec.p - 1.0;
    for (const auto& pr : plan.t_pairs) {
        const Vec2 g = flux_vector(pr.xi1, spec.p, spec.dim);
        const std::span<const double> gs(g.data(), spec.dim);
        const double r = std::abs(spec.f(pr.t1, gs) - spec.f(pr.t2, gs)) /
                         std::pow(std::abs(pr.t1 - pr.t2), e);
        if (r > est.L1) {
            est.L1 = r;
            est.L1_witness = pr;
        }
    }
    for (const auto& pr : plan.xi_pairs) {
        const Vec2 g1 = flux_vector(pr.xi1, spec.p, spec.dim);
        const Vec2 g2 = flux_vector(pr.xi2, spec.p, spec.dim);
        const double dxi = norm2({pr.xi1[0] - pr.xi2[0], pr.xi1[1] - pr.xi2[1]}, spec.dim);
        const double r = std::abs(spec.f(pr.t1, std::span<const double>(g1.data(), spec.dim)) -
                                  spec.f(pr.t1, std::span<const double>(g2.data(), spec.dim))) /
                         std::pow(dxi, e);
        if (r > est.L2) {
            est.L2 = r;
            est.L2_witness = pr;
        }
    }
    return est;
}

LipschitzEstimate estimate_lipschitz(const ProblemSpec& spec, double rho1, double rho2, int samples,
                                     std::uint64_t seed) {
    return estimate_lipschitz(spec, lipschitz_plan(spec.dim, rho1, rho2, samples, seed));
}

double monotonicity_ratio(const std::array<double, 2>& x, const std::array<double, 2>& y, double p,
                          int dim) {
    const Vec2 fx = flux_vector(x, p, dim);
    const Vec2 fy = flux_vector(y, p, dim);
    const Vec2 d{x[0] - y[0], dim == 2 ? x[1] - y[1] : 0.0};
    const double num_ = (fx[0] - fy[0]) * d[0] + (fx[1] - fy[1]) * d[1];
    return num_ / std::pow(norm2(d, dim), p);
}

CpEstimate cp_constant(double p, int dim, int samples, std::uint64_t seed) {
    if (!(p > 1.0)) throw std::invalid_argument("cp_constant requires p > 1");
    if (dim != 1 && dim != 2) throw std::invalid_argument("cp_constant: dim must be 1 or 2");
    if (samples < 1000) throw std::invalid_argument("cp_constant: too few samples");

    // The ratio is invariant under (x, y) -> (s R x, s R y) for s > 0 and R
    // orthogonal, so x is pinned to the first unit vector and only y varies.
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> log_r(-3.0, 3.0);
    std::uniform_real_distribution<double> log_sep(-6.0, 0.0);
    const Vec2 x{1.0, 0.0};

    CpEstimate est;
    est.value = std::numeric_limits<double>::infinity();
    est.guaranteed = p >= 2.0;
    auto consider = [&](const Vec2& y) {
        if (y[0] == x[0] && y[1] == x[1]) return;
        const double r = monotonicity_ratio(x, y, p, dim);
        if (r < est.value) {
            est.value = r;
            est.witness_x = x;
            est.witness_y = y;
        }
    };

    consider({-1.0, 0.0});
    consider({0.0, 0.0});
    for (int k = 0; k < samples; ++k) {
        Vec2 y;
        switch (k % 4) {
            case 0: {  // near diagonal
                const double sep = std::pow(10.0, log_sep(rng));
                if (dim == 1) {
                    y = {unit(rng) < 0.5 ? 1.0 - sep : 1.0 + sep, 0.0};
                } else {
                    const double a = 2.0 * std::numbers::pi * unit(rng);
                    y = {1.0 + sep * std::cos(a), sep * std::sin(a)};
                }
                break;
            }
            case 1: {  // near antipodal
                const double sep = std::pow(10.0, log_sep(rng));
                if (dim == 1) {
                    y = {unit(rng) < 0.5 ? -1.0 - sep : -1.0 + sep, 0.0};
                } else {
                    const double a = 2.0 * std::numbers::pi * unit(rng);
                    y = {-1.0 + sep * std::cos(a), sep * std::sin(a)};
                }
                break;
            }
            case 2: {  // multiscale
                const double r = std::pow(10.0, log_r(rng));
                if (dim == 1) {
                    y = {unit(rng) < 0.5 ? -r : r, 0.0};
                } else {
                    const double a = 2.0 * std::numbers::pi * unit(rng);
                    y = {r * std::cos(a), r * std::sin(a)};
                }
                break;
            }
            default: {
                y = {20.0 * unit(rng) - 10.0, dim == 2 ? 20.0 * unit(rng) - 10.0 : 0.0};
                break;
            }
        }
        consider(y);
    }
    return est;
}

ContractionFactor contraction_factor(double L1, double L2, double Cp, double p) {
    ContractionFactor out;
    if (L2 == 0.0) {
        out.d = 0.0;
        out.guarantee_holds = Cp > L1;
        return out;
    }
    if (!(Cp > L1)) {
        out.d = std::numeric_limits<double>::infinity();
        out.guarantee_holds = false;
        return out;
    }
    out.d = std::pow(L2 / (Cp - L1), 1.0 / (p - 1.0));
    out.guarantee_holds = out.d < 1.0;
    return out;
}

ConstantsEstimate estimate_constants(const ProblemSpec& spec, double rho1, double rho2,
                                     int lipschitz_samples, int cp_samples, std::uint64_t seed) {
    ConstantsEstimate est;
    est.rho1 = rho1;
    est.rho2 = rho2;
    const auto lip = estimate_lipschitz(spec, rho1, rho2, lipschitz_samples, seed);
    est.L1 = lip.L1;
    est.L2 = lip.L2;
    const auto cp = cp_constant(spec.p, spec.dim, cp_samples, seed + 1);
    est.Cp = cp.value;
    est.cp_guaranteed = cp.guaranteed;
    const auto cf = contraction_factor(est.L1, est.L2, est.Cp, spec.p);
    est.d = cf.d;
    est.guarantee_holds = cf.guarantee_holds && est.cp_guaranteed;
    return est;
}

void write_report(std::ostream& os, const HypothesisReport& report) {
    for (const auto& e : report.entries) {
        os << "condition=" << e.id << " verdict=" << to_string(e.verdict)
           << " measured=" << num(e.measured) << " witness_t=" << num(e.witness_t)
           << " witness_x=(" << num(e.witness_x[0]) << "," << num(e.witness_x[1]) << ")"
           << " samples=" << e.samples;
        if (!e.note.empty()) os << " note=\"" << e.note << "\"";
        os << "\n";
    }
}

void write_constants(std::ostream& os, const ConstantsEstimate& est) {
    os << "L1 = " << num(est.L1) << "\n"
       << "L2 = " << num(est.L2) << "\n"
       << "Cp = " << num(est.Cp) << "\n"
       << "Cp_guaranteed = " << (est.cp_guaranteed ? "true" : "not_guaranteed") << "\n"
       << "rho1 = " << num(est.rho1) << "\n"
       << "rho2 = " << num(est.rho2) << "\n"
       << "d = " << num(est.d) << "\n"
       << "guarantee_holds = " << (est.guarantee_holds ? "true" : "false") << "\n";
}

}  // namespace plapmp
