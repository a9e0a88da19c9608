#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "plapmp/frozen.hpp"
#include "plapmp/grid.hpp"

namespace plapmp {

class MPError : public std::runtime_error {
public:
    enum class Kind { no_descent, probe_failed, stagnation, bad_config };
    MPError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

struct MPConfig {
    int path_points = 11;
    int max_iters = 2000;
    /// Initial (and maximal) step of the backtracking descent.
    double descent_step = 1.0;
    double residual_tol = 1e-8;
    /// Unit-norm ray direction v0; defaults to a normalised sech profile.
    std::optional<GridFunction> ray_direction;
    int probe_directions = 15;
    std::uint64_t seed = 1;
    /// Gradient regularisation delta used for p < 2.
    double regularization = 1e-8;
};

struct MPLogRecord {
    int iter = 0;
    double c_w = 0.0;
    double residual = 0.0;
    double step = 0.0;
};

struct MPResult {
    GridFunction u_w;
    double c_w = 0.0;
    double residual_norm = 0.0;
    int iters = 0;
    bool converged = false;
    double t0 = 0.0;
    double alpha_probe = 0.0;
    double rho_probe = 0.0;
    double norm = 0.0;
    double min_interior = 0.0;
    double negative_part_norm = 0.0;
    /// |‖u‖^p - int f(u, g) u|.
    double identity_error = 0.0;
    double mass_fraction = 0.0;
    /// Path-maximum energy per iteration.
    std::vector<MPLogRecord> log{};
};

/// Sobolev gradient: solves (K + D) g = M r on interior nodes, where K is an
/// edge-weighted stiffness of the edge-difference scheme, D a lumped mass
/// term and M the lumped mass.
class SobolevPreconditioner {
public:
    /// K the p = 2 stiffness, D = shift * M.
    SobolevPreconditioner(const Grid& grid, double shift);
    /// Metric of the p-homogeneous part linearised at u, with gradients and
    /// values clipped from below at `clip` times their maxima.
    SobolevPreconditioner(const FrozenProblem& fp, const GridFunction& u, double clip = 1e-3);
    ~SobolevPreconditioner();
    SobolevPreconditioner(SobolevPreconditioner&&) noexcept;
    SobolevPreconditioner& operator=(SobolevPreconditioner&&) noexcept;

    GridFunction apply(const GridFunction& r) const;
    const Grid& grid() const { return grid_; }

private:
    struct Impl;
    template <class EdgeCoef>
    void assemble(EdgeCoef&& edge_coef, std::span<const double> mass);
    Grid grid_;
    std::unique_ptr<Impl> impl_;
};

/// Normalised (unit W-norm) product-sech profile, zero on the boundary.
GridFunction default_ray_direction(const FrozenProblem& fp);

/// Seeded positive Gaussian bumps of unit W-norm.
std::vector<GridFunction> random_directions(const FrozenProblem& fp, int count, std::uint64_t seed);

/// Smallest t with I_w(s v0) <= 0 at s in {t, 1.5t, 2t}; throws
/// MPError(no_descent) beyond t = 1e6.
double find_t0(const FrozenProblem& fp, const GridFunction& v0);

struct ProbeResult {
    double alpha = 0.0;
    double rho = 0.0;
    bool passed = false;
    std::vector<double> energies;
};

/// alpha = min over the directions of I_w(rho v).
ProbeResult geometry_probe(const FrozenProblem& fp, std::span<const GridFunction> directions,
                           double rho);

/// Maximiser t* > 0 of t -> I_w(t u). Throws MPError(no_descent) when the ray
/// never turns down (e.g. u <= 0 everywhere).
double ray_maximizer(const FrozenProblem& fp, const GridFunction& u);

/// Numerical mountain pass: a discrete path from 0 to t0 v0 whose maximiser
/// is pushed down by preconditioned descent, the maximiser being kept at the
/// top of its own ray. `warm_start` (if non-null and non-zero) seeds the path.
MPResult mountain_pass_solve(const FrozenProblem& fp, const MPConfig& cfg,
                             const GridFunction* warm_start = nullptr,
                             const SobolevPreconditioner* preconditioner = nullptr);

}  // namespace plapmp
