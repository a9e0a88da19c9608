#pragma once

#include <span>
#include <vector>

#include "plapmp/grid.hpp"
#include "plapmp/model.hpp"

namespace plapmp {

/// The gradient-frozen subproblem: f is evaluated at g = |grad w|^{p-2} grad w
/// for a fixed w, which makes the problem variational with energy
///
///   I_w(u) = 1/p int |grad u|^p + 1/p int V |u|^p - int F(u, g).
///
/// For p < 2 the gradient term uses |grad u| -> sqrt(|grad u|^2 + delta^2),
/// shifted so that I_w(0) = 0.
class FrozenProblem {
public:
    FrozenProblem(ProblemSpec spec, const VectorField& w_grad, double regularization = 1e-8);

    /// Freezes the gradient of w.
    static FrozenProblem from_iterate(const ProblemSpec& spec, const GridFunction& w,
                                      double regularization = 1e-8);

    const ProblemSpec& spec() const { return spec_; }
    const Grid& grid() const { return w_grad_.grid; }
    const VectorField& w_grad() const { return w_grad_; }
    const VectorField& g_field() const { return g_field_; }
    std::span<const double> nodal_V() const { return nodal_V_; }
    /// Effective delta: 0 unless p < 2.
    double regularization() const { return delta_; }

    struct EnergyParts {
        double gradient = 0.0;
        double potential = 0.0;
        double nonlinear = 0.0;

        double total() const { return gradient + potential - nonlinear; }
        /// Magnitude of the summed terms, for roundoff-aware comparisons.
        double scale() const;
    };

    EnergyParts energy_parts(const GridFunction& u) const;
    double energy(const GridFunction& u) const { return energy_parts(u).total(); }

    /// Nodal r with sum_k w_k r_k phi_k = I_w'(u) phi for every phi vanishing
    /// on the boundary. Boundary entries are 0. Throws std::runtime_error on a
    /// non-finite entry.
    GridFunction residual(const GridFunction& u) const;

    /// sum_k w_k f(u_k, g_k) u_k.
    double nonlinear_pairing(const GridFunction& u) const;

    double f_at(std::size_t k, double t) const;
    double F_at(std::size_t k, double t) const;

    /// phi(t) = I_w(t u) and its derivative, with the gradients of u cached.
    class Ray {
    public:
        double value(double t) const;
        double derivative(double t) const;

    private:
        friend class FrozenProblem;
        const FrozenProblem* fp_ = nullptr;
        std::vector<double> weights_;
        std::vector<double> s2_;
        std::vector<double> u_;
    };

    Ray ray(const GridFunction& u) const;

private:
    void require_grid(const GridFunction& u) const;
    double phi_grad(double s2) const;
    double coef_grad(double s2) const;

    ProblemSpec spec_;
    VectorField w_grad_;
    VectorField g_field_;
    std::vector<double> nodal_V_;
    double delta_;
    double delta_p_;
};

/// |<residual(u), v> - (I(u + s v) - I(u - s v)) / (2 s)|.
double directional_derivative_check(const FrozenProblem& fp, const GridFunction& u,
                                    const GridFunction& v, double step);

}  // namespace plapmp
