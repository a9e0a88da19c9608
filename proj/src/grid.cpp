#include "plapmp/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "plapmp/detail/edge_gradients.hpp"
#include "plapmp/detail/summation.hpp"
#include "plapmp/model.hpp"

namespace plapmp {

Grid::Grid(int dim, double radius, int points_per_axis)
    : dim_(dim), radius_(radius), m_(points_per_axis), h_(0.0), size_(0) {
    if (dim != 1 && dim != 2) {
        throw std::invalid_argument("unsupported dimension " + std::to_string(dim) +
                                    " (expected 1 or 2)");
    }
    if (!(radius > 0.0) || !std::isfinite(radius)) {
        throw std::invalid_argument("grid radius must be positive");
    }
    if (points_per_axis < 3) {
        throw std::invalid_argument("grid needs at least 3 points per axis");
    }
    h_ = 2.0 * radius / (points_per_axis - 1);
    size_ = dim == 1 ? static_cast<std::size_t>(m_)
                     : static_cast<std::size_t>(m_) * static_cast<std::size_t>(m_);
}

std::array<int, 2> Grid::multi_index(std::size_t k) const {
    if (dim_ == 1) return {static_cast<int>(k), 0};
    return {static_cast<int>(k % m_), static_cast<int>(k / m_)};
}

Point Grid::point(std::size_t k) const {
    const auto [i, j] = multi_index(k);
    return {coord(i), dim_ == 1 ? 0.0 : coord(j)};
}

bool Grid::on_boundary(std::size_t k) const {
    const auto [i, j] = multi_index(k);
    const bool bi = i == 0 || i == m_ - 1;
    if (dim_ == 1) return bi;
    return bi || j == 0 || j == m_ - 1;
}

double Grid::weight(std::size_t k) const {
    const auto [i, j] = multi_index(k);
    double w = (i == 0 || i == m_ - 1) ? 0.5 * h_ : h_;
    if (dim_ == 2) w *= (j == 0 || j == m_ - 1) ? 0.5 * h_ : h_;
    return w;
}

Grid build_grid(int dim, double radius, int points_per_axis) {
    return Grid(dim, radius, points_per_axis);
}

GridFunction::GridFunction(Grid grid) : grid_(grid), values_(grid.size(), 0.0) {}

GridFunction::GridFunction(Grid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
        throw std::invalid_argument("grid function length does not match the grid");
    }
    if (!all_finite()) throw std::invalid_argument("grid function has non-finite values");
}

GridFunction GridFunction::sample(const Grid& grid,
                                  const std::function<double(const Point&)>& fn) {
    std::vector<double> v(grid.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = fn(grid.point(k));
    return GridFunction(grid, std::move(v));
}

void GridFunction::zero_boundary() {
    for (std::size_t k = 0; k < values_.size(); ++k) {
        if (grid_.on_boundary(k)) values_[k] = 0.0;
    }
}

bool GridFunction::boundary_is_zero() const {
    for (std::size_t k = 0; k < values_.size(); ++k) {
        if (grid_.on_boundary(k) && values_[k] != 0.0) return false;
    }
    return true;
}

bool GridFunction::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

bool GridFunction::is_zero() const {
    return std::all_of(values_.begin(), values_.end(), [](double x) { return x == 0.0; });
}

double GridFunction::max_value() const { return *std::max_element(values_.begin(), values_.end()); }

double GridFunction::max_abs() const {
    double m = 0.0;
    for (double x : values_) m = std::max(m, std::abs(x));
    return m;
}

double GridFunction::min_interior() const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < values_.size(); ++k) {
        if (!grid_.on_boundary(k)) m = std::min(m, values_[k]);
    }
    return m;
}

namespace {
void require_same_grid(const Grid& a, const Grid& b) {
    if (!(a == b)) throw std::invalid_argument("grid mismatch");
}
}  // namespace

GridFunction& GridFunction::operator+=(const GridFunction& other) {
    require_same_grid(grid_, other.grid_);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
    return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& other) {
    require_same_grid(grid_, other.grid_);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= other.values_[k];
    return *this;
}

GridFunction& GridFunction::operator*=(double s) {
    for (double& x : values_) x *= s;
    return *this;
}

void GridFunction::axpy(double s, const GridFunction& other) {
    require_same_grid(grid_, other.grid_);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += s * other.values_[k];
}

GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
GridFunction operator*(double s, GridFunction a) { return a *= s; }

GridFunction negative_part(const GridFunction& u) {
    GridFunction out = u;
    for (double& x : out.values()) x = std::min(x, 0.0);
    return out;
}

double VectorField::magnitude(std::size_t k) const {
    double s = components[0][k] * components[0][k];
    if (grid.dim() == 2) s += components[1][k] * components[1][k];
    return std::sqrt(s);
}

double VectorField::max_magnitude() const {
    double m = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) m = std::max(m, magnitude(k));
    return m;
}

VectorField zero_field(const Grid& grid) {
    VectorField out{grid, {}};
    for (int c = 0; c < grid.dim(); ++c) out.components[c].assign(grid.size(), 0.0);
    return out;
}

VectorField gradient_field(const GridFunction& u) {
    const Grid& grid = u.grid();
    VectorField out = zero_field(grid);
    const int m = grid.points_per_axis();
    const double h = grid.spacing();
    auto derivative = [&](std::size_t k, int pos, std::ptrdiff_t stride) {
        const auto v = u.values();
        if (pos == 0) return (v[k + stride] - v[k]) / h;
        if (pos == m - 1) return (v[k] - v[k - stride]) / h;
        return (v[k + stride] - v[k - stride]) / (2.0 * h);
    };
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto [i, j] = grid.multi_index(k);
        out.components[0][k] = derivative(k, i, 1);
        if (grid.dim() == 2) out.components[1][k] = derivative(k, j, m);
    }
    return out;
}

std::vector<double> sample_potential(const Grid& grid, const PotentialHandle& V) {
    std::vector<double> out(grid.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = V(grid.point(k));
    return out;
}

double w_norm_pow(const GridFunction& u, std::span<const double> nodal_V, double p) {
    if (!(p > 1.0)) throw std::invalid_argument("w_norm requires p > 1");
    if (nodal_V.size() != u.size()) throw std::invalid_argument("potential sample size mismatch");
    const Grid& grid = u.grid();
    const double half_p = 0.5 * p;
    detail::NeumaierSum sum;
    sum.add(detail::gradient_integral(grid, u.values(),
                                      [half_p](double s2) { return std::pow(s2, half_p); }));
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double x = u[k];
        if (x != 0.0) sum.add(grid.weight(k) * nodal_V[k] * std::pow(std::abs(x), p));
    }
    return sum.value();
}

double w_norm(const GridFunction& u, std::span<const double> nodal_V, double p) {
    return std::pow(w_norm_pow(u, nodal_V, p), 1.0 / p);
}

double w_norm(const GridFunction& u, const PotentialHandle& V, double p) {
    if (!(p > 1.0)) throw std::invalid_argument("w_norm requires p > 1");
    const auto nodal = sample_potential(u.grid(), V);
    return w_norm(u, nodal, p);
}

double integrate(const Grid& grid, std::span<const double> values) {
    detail::NeumaierSum sum;
    for (std::size_t k = 0; k < values.size(); ++k) sum.add(grid.weight(k) * values[k]);
    return sum.value();
}

double quadrature_dot(const GridFunction& a, const GridFunction& b) {
    require_same_grid(a.grid(), b.grid());
    detail::NeumaierSum sum;
    for (std::size_t k = 0; k < a.size(); ++k) sum.add(a.grid().weight(k) * a[k] * b[k]);
    return sum.value();
}

double quadrature_norm(const GridFunction& r) { return std::sqrt(quadrature_dot(r, r)); }

double mass_fraction(const GridFunction& u, double p, double radius_fraction) {
    const Grid& grid = u.grid();
    const double r2 = std::pow(radius_fraction * grid.radius(), 2);
    detail::NeumaierSum inside;
    detail::NeumaierSum total;
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double m = grid.weight(k) * std::pow(std::abs(u[k]), p);
        total.add(m);
        const Point x = grid.point(k);
        if (x[0] * x[0] + x[1] * x[1] <= r2) inside.add(m);
    }
    const double t = total.value();
    return t > 0.0 ? inside.value() / t : 1.0;
}

}  // namespace plapmp
