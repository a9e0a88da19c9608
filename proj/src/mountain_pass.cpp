#include "plapmp/mountain_pass.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <array>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <random>

#include "plapmp/detail/edge_gradients.hpp"

namespace plapmp {

struct SobolevPreconditioner::Impl {
    std::vector<std::ptrdiff_t> unknown;  // node -> unknown index or -1
    std::vector<std::size_t> node;        // unknown -> node
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
};

template <class EdgeCoef>
void SobolevPreconditioner::assemble(EdgeCoef&& edge_coef, std::span<const double> mass) {
    const Grid& grid = grid_;
    auto& im = *impl_;
    im.unknown.assign(grid.size(), -1);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (!grid.on_boundary(k)) {
            im.unknown[k] = static_cast<std::ptrdiff_t>(im.node.size());
            im.node.push_back(k);
        }
    }
    std::vector<Eigen::Triplet<double>> trip;
    auto edge = [&](std::size_t a, std::size_t b, double c) {
        const auto ia = im.unknown[a];
        const auto ib = im.unknown[b];
        if (ia >= 0) trip.emplace_back(ia, ia, c);
        if (ib >= 0) trip.emplace_back(ib, ib, c);
        if (ia >= 0 && ib >= 0) {
            trip.emplace_back(ia, ib, -c);
            trip.emplace_back(ib, ia, -c);
        }
    };
    const int m = grid.points_per_axis();
    if (grid.dim() == 1) {
        const double inv_h = 1.0 / grid.spacing();
        for (int i = 0; i + 1 < m; ++i) {
            edge(grid.index(i), grid.index(i + 1), inv_h * edge_coef(i, 0)[0]);
        }
    } else {
        // Each cell edge enters two corner gradients of weight h^2/4.
        for (int j = 0; j + 1 < m; ++j) {
            for (int i = 0; i + 1 < m; ++i) {
                const std::array<double, 4> c = edge_coef(i, j);
                edge(grid.index(i, j), grid.index(i + 1, j), 0.25 * (c[0] + c[1]));
                edge(grid.index(i, j + 1), grid.index(i + 1, j + 1), 0.25 * (c[2] + c[3]));
                edge(grid.index(i, j), grid.index(i, j + 1), 0.25 * (c[0] + c[2]));
                edge(grid.index(i + 1, j), grid.index(i + 1, j + 1), 0.25 * (c[1] + c[3]));
            }
        }
    }
    for (std::size_t n = 0; n < im.node.size(); ++n) {
        trip.emplace_back(n, n, mass[im.node[n]] * grid.weight(im.node[n]));
    }
    const auto n = static_cast<Eigen::Index>(im.node.size());
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    im.solver.compute(A);
    if (im.solver.info() != Eigen::Success) {
        throw std::runtime_error("Sobolev preconditioner factorisation failed");
    }
}

SobolevPreconditioner::SobolevPreconditioner(const Grid& grid, double shift)
    : grid_(grid), impl_(std::make_unique<Impl>()) {
    if (!(shift > 0.0)) throw std::invalid_argument("preconditioner shift must be positive");
    const std::vector<double> mass(grid.size(), shift);
    assemble([](int, int) { return std::array<double, 4>{1.0, 1.0, 1.0, 1.0}; }, mass);
}

SobolevPreconditioner::SobolevPreconditioner(const FrozenProblem& fp, const GridFunction& u,
                                             double clip)
    : grid_(fp.grid()), impl_(std::make_unique<Impl>()) {
    if (!(u.grid() == grid_)) throw std::invalid_argument("preconditioner grid mismatch");
    if (!(clip > 0.0)) throw std::invalid_argument("clip must be positive");
    const double p = fp.spec().p;
    const Grid& grid = grid_;
    const double inv_h = 1.0 / grid.spacing();
    double gmax = 0.0;
    detail::for_each_gradient(grid, u.values(), [&](double, double s2) { gmax = std::max(gmax, s2); });
    const double sig2 = std::max(clip * clip * gmax, 1e-300);
    const double tau2 = std::max(clip * clip * u.max_abs() * u.max_abs(), 1e-300);
    auto c = [&](double s2) { return (p - 1.0) * std::pow(s2 + sig2, 0.5 * (p - 2.0)); };
    std::vector<double> mass(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        mass[k] = (p - 1.0) * fp.nodal_V()[k] * std::pow(u[k] * u[k] + tau2, 0.5 * (p - 2.0));
    }
    const auto vals = u.values();
    assemble(
        [&](int i, int j) -> std::array<double, 4> {
            if (grid.dim() == 1) {
                const double d = (vals[i + 1] - vals[i]) * inv_h;
                return {c(d * d), 0.0, 0.0, 0.0};
            }
            const double a = vals[grid.index(i, j)];
            const double b = vals[grid.index(i + 1, j)];
            const double cc = vals[grid.index(i, j + 1)];
            const double d = vals[grid.index(i + 1, j + 1)];
            const double dxb = (b - a) * inv_h;
            const double dxt = (d - cc) * inv_h;
            const double dyl = (cc - a) * inv_h;
            const double dyr = (d - b) * inv_h;
            return {c(dxb * dxb + dyl * dyl), c(dxb * dxb + dyr * dyr), c(dxt * dxt + dyl * dyl),
                    c(dxt * dxt + dyr * dyr)};
        },
        mass);
}

SobolevPreconditioner::~SobolevPreconditioner() = default;
SobolevPreconditioner::SobolevPreconditioner(SobolevPreconditioner&&) noexcept = default;
SobolevPreconditioner& SobolevPreconditioner::operator=(SobolevPreconditioner&&) noexcept = default;

GridFunction SobolevPreconditioner::apply(const GridFunction& r) const {
    if (!(r.grid() == grid_)) throw std::invalid_argument("preconditioner grid mismatch");
    const auto& im = *impl_;
    Eigen::VectorXd b(static_cast<Eigen::Index>(im.node.size()));
    for (std::size_t n = 0; n < im.node.size(); ++n) b[n] = grid_.weight(im.node[n]) * r[im.node[n]];
    const Eigen::VectorXd x = im.solver.solve(b);
    GridFunction g(grid_);
    for (std::size_t n = 0; n < im.node.size(); ++n) g[im.node[n]] = x[n];
    return g;
}

namespace {

GridFunction normalized(GridFunction u, const FrozenProblem& fp) {
    const double n = w_norm(u, fp.nodal_V(), fp.spec().p);
    if (!(n > 0.0)) throw std::invalid_argument("cannot normalise a zero direction");
    u *= 1.0 / n;
    return u;
}

}  // namespace

GridFunction default_ray_direction(const FrozenProblem& fp) {
    GridFunction v = GridFunction::sample(fp.grid(), [dim = fp.grid().dim()](const Point& x) {
        double s = 1.0 / std::cosh(x[0]);
        if (dim == 2) s /= std::cosh(x[1]);
        return s;
    });
    v.zero_boundary();
    return normalized(std::move(v), fp);
}

std::vector<GridFunction> random_directions(const FrozenProblem& fp, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const double R = fp.grid().radius();
    std::uniform_real_distribution<double> centre(-0.25 * R, 0.25 * R);
    std::uniform_real_distribution<double> width(0.5, 2.0);
    std::vector<GridFunction> out;
    const int dim = fp.grid().dim();
    for (int i = 0; i < count; ++i) {
        const double cx = centre(rng);
        const double cy = dim == 2 ? centre(rng) : 0.0;
        const double s = std::min(width(rng), 0.2 * R);
        GridFunction v = GridFunction::sample(fp.grid(), [&](const Point& x) {
            const double r2 = (x[0] - cx) * (x[0] - cx) + (dim == 2 ? (x[1] - cy) * (x[1] - cy) : 0.0);
            return std::exp(-0.5 * r2 / (s * s));
        });
        v.zero_boundary();
        out.push_back(normalized(std::move(v), fp));
    }
    return out;
}

double find_t0(const FrozenProblem& fp, const GridFunction& v0) {
    const auto ray = fp.ray(v0);
    constexpr double t_limit = 1e6;
    double start = 1.0;
    while (true) {
        double hi = start;
        while (ray.value(hi) > 0.0) {
            hi *= 2.0;
            if (hi > t_limit) {
                throw MPError(MPError::Kind::no_descent,
                              "ray does not descend: I_w(t v0) > 0 up to t = 1e6");
            }
        }
        double lo = hi * 0.5;
        while (ray.value(lo) <= 0.0) {
            hi = lo;
            lo *= 0.5;
            if (lo < 1e-300) throw MPError(MPError::Kind::no_descent, "ray energy never positive");
        }
        for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (ray.value(mid) <= 0.0 ? hi : lo) = mid;
        }
        if (ray.value(1.5 * hi) <= 0.0 && ray.value(2.0 * hi) <= 0.0) return hi;
        start = 2.0 * hi;
        if (start > t_limit) {
            throw MPError(MPError::Kind::no_descent, "ray does not descend monotonically up to t = 1e6");
        }
    }
}

ProbeResult geometry_probe(const FrozenProblem& fp, std::span<const GridFunction> directions,
                           double rho) {
    if (!(rho > 0.0)) throw std::invalid_argument("probe radius must be positive");
    ProbeResult out;
    out.rho = rho;
    out.alpha = std::numeric_limits<double>::infinity();
    for (const auto& v : directions) {
        const double e = fp.energy(rho * v);
        out.energies.push_back(e);
        out.alpha = std::min(out.alpha, e);
    }
    out.passed = out.alpha > 0.0;
    return out;
}

double ray_maximizer(const FrozenProblem& fp, const GridFunction& u) {
    const auto ray = fp.ray(u);
    auto d = [&](double t) { return ray.derivative(t); };
    double lo = 1.0;
    double hi = 1.0;
    if (d(1.0) > 0.0) {
        while (d(hi) > 0.0) {
            lo = hi;
            hi *= 2.0;
            if (hi > 1e12) throw MPError(MPError::Kind::no_descent, "ray energy increases without bound");
        }
    } else {
        while (d(lo) <= 0.0) {
            hi = lo;
            lo *= 0.5;
            if (lo < 1e-12) throw MPError(MPError::Kind::no_descent, "ray has no interior maximum");
        }
    }
    std::uintmax_t max_iter = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(
        d, lo, hi, boost::math::tools::eps_tolerance<double>(50), max_iter);
    return 0.5 * (a + b);
}

namespace {

struct Path {
    std::vector<GridFunction> points;
    std::size_t top = 0;  // index of the refined maximiser
};

/// 0 -> u along the ray, u -> T u, then straight to the endpoint.
Path rebuild_path(const FrozenProblem& fp, const GridFunction& u, const GridFunction& endpoint,
                  int K) {
    const auto ray = fp.ray(u);
    double T = 2.0;
    while (ray.value(T) > 0.0) {
        T *= 2.0;
        if (T > 1e6) throw MPError(MPError::Kind::no_descent, "ray through maximiser does not descend");
    }
    const int J = std::max(1, (K - 1) / 2);
    const int rest = K - 1 - J;
    const int ext = rest / 2;
    const int seg = rest - ext;
    Path path;
    for (int j = 0; j <= J; ++j) path.points.push_back((static_cast<double>(j) / J) * u);
    path.top = static_cast<std::size_t>(J);
    for (int i = 1; i <= ext; ++i) {
        path.points.push_back((1.0 + (T - 1.0) * i / ext) * u);
    }
    const GridFunction far = T * u;
    for (int i = 1; i <= seg; ++i) {
        const double lam = static_cast<double>(i) / seg;
        GridFunction z = (1.0 - lam) * far;
        z.axpy(lam, endpoint);
        path.points.push_back(std::move(z));
    }
    return path;
}

std::size_t argmax_lowest(const std::vector<double>& e) {
    std::size_t k = 0;
    for (std::size_t i = 1; i < e.size(); ++i) {
        if (e[i] > e[k]) k = i;
    }
    return k;
}

GridFunction refine(const FrozenProblem& fp, const GridFunction& u) {
    return ray_maximizer(fp, u) * u;
}

// I(v) - I(u) as the integral of <I'(u + s d), d> over s in [0, 1], d = v - u,
// by 3-point Gauss-Legendre. Its error scales with the change, not with I.
double energy_change(const FrozenProblem& fp, const GridFunction& u, const GridFunction& v) {
    const GridFunction d = v - u;
    const double a = 0.5 * std::sqrt(0.6);
    const double nodes[3] = {0.5 - a, 0.5, 0.5 + a};
    const double weights[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
    double sum = 0.0;
    for (int i = 0; i < 3; ++i) {
        GridFunction x = u;
        x.axpy(nodes[i], d);
        sum += weights[i] * quadrature_dot(fp.residual(x), d);
    }
    return sum;
}

}  // namespace

MPResult mountain_pass_solve(const FrozenProblem& fp, const MPConfig& cfg,
                             const GridFunction* warm_start,
                             const SobolevPreconditioner* preconditioner) {
    if (cfg.path_points < 3) throw MPError(MPError::Kind::bad_config, "path_points must be >= 3");
    if (!(cfg.residual_tol > 0.0) || !(cfg.descent_step > 0.0) || cfg.max_iters < 0) {
        throw MPError(MPError::Kind::bad_config, "invalid mountain-pass configuration");
    }
    const Grid& grid = fp.grid();
    const double p = fp.spec().p;

    const GridFunction v0 = cfg.ray_direction ? *cfg.ray_direction : default_ray_direction(fp);
    if (!(v0.grid() == grid)) throw MPError(MPError::Kind::bad_config, "ray direction grid mismatch");
    if (std::abs(w_norm(v0, fp.nodal_V(), p) - 1.0) > 1e-10) {
        throw MPError(MPError::Kind::bad_config, "ray direction must have unit W-norm");
    }

    MPResult res{.u_w = GridFunction(grid)};
    res.t0 = find_t0(fp, v0);
    const GridFunction endpoint = res.t0 * v0;

    {
        std::vector<GridFunction> dirs{v0};
        for (auto& d : random_directions(fp, cfg.probe_directions, cfg.seed)) dirs.push_back(std::move(d));
        double rho = 0.5 * res.t0;
        ProbeResult probe;
        for (int k = 0; k < 60; ++k, rho *= 0.5) {
            probe = geometry_probe(fp, dirs, rho);
            if (probe.passed) break;
        }
        if (!probe.passed) throw MPError(MPError::Kind::probe_failed, "no radius with I_w > 0 on the probe sphere");
        res.alpha_probe = probe.alpha;
        res.rho_probe = probe.rho;
    }

    // For p != 2 the metric follows the current maximiser.
    const bool adaptive = preconditioner == nullptr && p != 2.0;
    std::unique_ptr<SobolevPreconditioner> own;
    if (preconditioner == nullptr && !adaptive) {
        own = std::make_unique<SobolevPreconditioner>(grid, fp.spec().V.floor);
        preconditioner = own.get();
    }

    const int K = cfg.path_points;
    GridFunction u(grid);
    if (warm_start != nullptr && !warm_start->is_zero()) {
        GridFunction w = *warm_start;
        w.zero_boundary();
        u = refine(fp, w);
    } else {
        std::vector<double> e;
        std::vector<GridFunction> segment;
        for (int k = 0; k < K; ++k) {
            segment.push_back((static_cast<double>(k) / (K - 1)) * endpoint);
            e.push_back(fp.energy(segment.back()));
        }
        u = refine(fp, segment[argmax_lowest(e)]);
    }
    Path path = rebuild_path(fp, u, endpoint, K);

    double step = cfg.descent_step;
    auto parts = fp.energy_parts(u);
    GridFunction r = fp.residual(u);
    double rn = quadrature_norm(r);
    // Path-maximum level, advanced by the accepted energy changes.
    double level = 0.0;
    int iter = 0;
    for (;; ++iter) {
        std::vector<double> e(path.points.size());
        for (std::size_t k = 0; k < e.size(); ++k) e[k] = fp.energy(path.points[k]);
        const std::size_t top = argmax_lowest(e);
        if (e[top] > parts.total() && top != path.top) {
            // Some other path point sits higher: make it the maximiser.
            u = refine(fp, path.points[top]);
            path = rebuild_path(fp, u, endpoint, K);
            parts = fp.energy_parts(u);
            r = fp.residual(u);
            rn = quadrature_norm(r);
            level = e[top];
            res.log.push_back({iter, level, rn, 0.0});
            if (iter >= cfg.max_iters) break;
            continue;
        }
        if (iter == 0) level = std::max(e[top], parts.total());
        res.log.push_back({iter, level, rn, step});
        if (rn <= cfg.residual_tol) {
            res.converged = true;
            break;
        }
        if (iter >= cfg.max_iters) break;

        if (adaptive) {
            own = std::make_unique<SobolevPreconditioner>(fp, u);
            preconditioner = own.get();
        }
        const GridFunction g = preconditioner->apply(r);
        const double noise = 1e-12 * parts.scale();
        step = std::min(2.0 * step, cfg.descent_step);
        while (true) {
            GridFunction cand = u;
            cand.axpy(-step, g);
            std::optional<GridFunction> refined;
            try {
                refined = refine(fp, cand);
            } catch (const MPError&) {
                refined.reset();
            }
            if (refined) {
                const auto cparts = fp.energy_parts(*refined);
                double dE = cparts.total() - parts.total();
                if (std::abs(dE) <= noise) dE = energy_change(fp, u, *refined);
                if (dE < 0.0) {
                    u = std::move(*refined);
                    parts = cparts;
                    r = fp.residual(u);
                    rn = quadrature_norm(r);
                    level += dE;
                    break;
                }
            }
            step *= 0.5;
            if (step < 1e-14) {
                throw MPError(MPError::Kind::stagnation,
                              "mountain-pass descent stagnated (no energy decrease with step >= 1e-14)");
            }
        }
        path = rebuild_path(fp, u, endpoint, K);
    }

    res.iters = iter;
    res.u_w = u;
    res.c_w = parts.total();
    res.residual_norm = rn;
    const double norm_p = w_norm_pow(u, fp.nodal_V(), p);
    res.norm = std::pow(norm_p, 1.0 / p);
    res.identity_error = std::abs(norm_p - fp.nonlinear_pairing(u));
    res.negative_part_norm = w_norm(negative_part(u), fp.nodal_V(), p);
    res.min_interior = u.min_interior();
    res.mass_fraction = mass_fraction(u, p, 0.5);
    return res;
}

}  // namespace plapmp
