#include "plapmp/frozen.hpp"

#include <cmath>
#include <stdexcept>

#include "plapmp/detail/edge_gradients.hpp"
#include "plapmp/detail/summation.hpp"

namespace plapmp {

FrozenProblem::FrozenProblem(ProblemSpec spec, const VectorField& w_grad, double regularization)
    : spec_(std::move(spec)),
      w_grad_(w_grad),
      g_field_(zero_field(w_grad.grid)),
      nodal_V_(sample_potential(w_grad.grid, spec_.V)),
      delta_(spec_.p < 2.0 ? regularization : 0.0),
      delta_p_(spec_.p < 2.0 ? std::pow(regularization, spec_.p) : 0.0) {
    if (w_grad.dim() != spec_.dim) throw std::invalid_argument("frozen gradient dimension mismatch");
    if (!(regularization >= 0.0)) throw std::invalid_argument("regularization must be non-negative");
    const int dim = spec_.dim;
    for (std::size_t k = 0; k < grid().size(); ++k) {
        const double mag = w_grad_.magnitude(k);
        const double s = mag > 0.0 ? std::pow(mag, spec_.p - 2.0) : 0.0;
        for (int c = 0; c < dim; ++c) g_field_.components[c][k] = s * w_grad_.components[c][k];
    }
}

FrozenProblem FrozenProblem::from_iterate(const ProblemSpec& spec, const GridFunction& w,
                                          double regularization) {
    return FrozenProblem(spec, gradient_field(w), regularization);
}

double FrozenProblem::EnergyParts::scale() const {
    return std::abs(gradient) + std::abs(potential) + std::abs(nonlinear);
}

void FrozenProblem::require_grid(const GridFunction& u) const {
    if (!(u.grid() == grid())) throw std::invalid_argument("grid mismatch with frozen problem");
}

double FrozenProblem::phi_grad(double s2) const {
    const double p = spec_.p;
    if (p == 2.0) return 0.5 * s2;
    if (delta_ > 0.0) return (std::pow(s2 + delta_ * delta_, 0.5 * p) - delta_p_) / p;
    return std::pow(s2, 0.5 * p) / p;
}

double FrozenProblem::coef_grad(double s2) const {
    const double p = spec_.p;
    if (p == 2.0) return 1.0;
    return std::pow(s2 + delta_ * delta_, 0.5 * (p - 2.0));
}

double FrozenProblem::f_at(std::size_t k, double t) const {
    double g[2] = {g_field_.components[0][k], spec_.dim == 2 ? g_field_.components[1][k] : 0.0};
    return spec_.f(t, std::span<const double>(g, spec_.dim));
}

double FrozenProblem::F_at(std::size_t k, double t) const {
    double g[2] = {g_field_.components[0][k], spec_.dim == 2 ? g_field_.components[1][k] : 0.0};
    return F_eval(spec_.f, t, std::span<const double>(g, spec_.dim));
}

FrozenProblem::EnergyParts FrozenProblem::energy_parts(const GridFunction& u) const {
    require_grid(u);
    EnergyParts parts;
    parts.gradient =
        detail::gradient_integral(grid(), u.values(), [this](double s2) { return phi_grad(s2); });
    detail::NeumaierSum pot;
    detail::NeumaierSum nl;
    const double p = spec_.p;
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double x = u[k];
        if (x == 0.0) continue;
        const double w = grid().weight(k);
        pot.add(w * nodal_V_[k] * std::pow(std::abs(x), p) / p);
        nl.add(w * F_at(k, x));
    }
    parts.potential = pot.value();
    parts.nonlinear = nl.value();
    return parts;
}

GridFunction FrozenProblem::residual(const GridFunction& u) const {
    require_grid(u);
    GridFunction r(grid());
    auto out = r.values();
    detail::accumulate_gradient_derivative(grid(), u.values(),
                                           [this](double s2) { return coef_grad(s2); }, out);
    const double p = spec_.p;
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (grid().on_boundary(k)) {
            out[k] = 0.0;
            continue;
        }
        const double w = grid().weight(k);
        const double x = u[k];
        const double pot = x == 0.0 ? 0.0 : nodal_V_[k] * std::pow(std::abs(x), p - 2.0) * x;
        out[k] = out[k] / w + pot - f_at(k, x);
        if (!std::isfinite(out[k])) {
            throw std::runtime_error("non-finite residual entry (degenerate gradient for p < 2?)");
        }
    }
    return r;
}

double FrozenProblem::nonlinear_pairing(const GridFunction& u) const {
    require_grid(u);
    detail::NeumaierSum sum;
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (u[k] != 0.0) sum.add(grid().weight(k) * f_at(k, u[k]) * u[k]);
    }
    return sum.value();
}

FrozenProblem::Ray FrozenProblem::ray(const GridFunction& u) const {
    require_grid(u);
    Ray ray;
    ray.fp_ = this;
    detail::for_each_gradient(grid(), u.values(), [&](double w, double s2) {
        if (s2 > 0.0) {
            ray.weights_.push_back(w);
            ray.s2_.push_back(s2);
        }
    });
    ray.u_.assign(u.values().begin(), u.values().end());
    return ray;
}

double FrozenProblem::Ray::value(double t) const {
    const auto& fp = *fp_;
    const double p = fp.spec_.p;
    detail::NeumaierSum sum;
    for (std::size_t e = 0; e < s2_.size(); ++e) sum.add(weights_[e] * fp.phi_grad(t * t * s2_[e]));
    for (std::size_t k = 0; k < u_.size(); ++k) {
        const double x = t * u_[k];
        if (x == 0.0) continue;
        const double w = fp.grid().weight(k);
        sum.add(w * fp.nodal_V_[k] * std::pow(std::abs(x), p) / p);
        sum.add(-w * fp.F_at(k, x));
    }
    return sum.value();
}

double FrozenProblem::Ray::derivative(double t) const {
    const auto& fp = *fp_;
    const double p = fp.spec_.p;
    detail::NeumaierSum sum;
    for (std::size_t e = 0; e < s2_.size(); ++e) {
        sum.add(weights_[e] * fp.coef_grad(t * t * s2_[e]) * t * s2_[e]);
    }
    for (std::size_t k = 0; k < u_.size(); ++k) {
        const double x = t * u_[k];
        if (x == 0.0) continue;
        const double w = fp.grid().weight(k);
        sum.add(w * fp.nodal_V_[k] * std::pow(std::abs(x), p - 2.0) * x * u_[k]);
        sum.add(-w * fp.f_at(k, x) * u_[k]);
    }
    return sum.value();
}

double directional_derivative_check(const FrozenProblem& fp, const GridFunction& u,
                                    const GridFunction& v, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
    const GridFunction r = fp.residual(u);
    const double analytic = quadrature_dot(r, v);
    GridFunction up = u;
    up.axpy(step, v);
    GridFunction um = u;
    um.axpy(-step, v);
    const double fd = (fp.energy(up) - fp.energy(um)) / (2.0 * step);
    return std::abs(analytic - fd);
}

}  // namespace plapmp
