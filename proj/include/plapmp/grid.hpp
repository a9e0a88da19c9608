#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace plapmp {

struct PotentialHandle;

/// Point in R^N; the second component is unused (zero) when N = 1.
using Point = std::array<double, 2>;

/// Uniform tensor grid on the box [-R, R]^N, N in {1, 2}.
///
/// Nodes are numbered with the first axis fastest: k = i + j * m.
class Grid {
public:
    Grid(int dim, double radius, int points_per_axis);

    int dim() const { return dim_; }
    double radius() const { return radius_; }
    int points_per_axis() const { return m_; }
    double spacing() const { return h_; }
    std::size_t size() const { return size_; }

    double coord(int i) const { return -radius_ + i * h_; }
    std::size_t index(int i, int j = 0) const {
        return static_cast<std::size_t>(i) + static_cast<std::size_t>(j) * m_;
    }
    std::array<int, 2> multi_index(std::size_t k) const;
    Point point(std::size_t k) const;
    bool on_boundary(std::size_t k) const;

    /// Trapezoidal quadrature weight of node k.
    double weight(std::size_t k) const;

    bool operator==(const Grid& other) const = default;

private:
    int dim_;
    double radius_;
    int m_;
    double h_;
    std::size_t size_;
};

/// Validating factory; throws std::invalid_argument on a bad shape.
Grid build_grid(int dim, double radius, int points_per_axis);

/// Nodal scalar field on a Grid.
class GridFunction {
public:
    explicit GridFunction(Grid grid);
    GridFunction(Grid grid, std::vector<double> values);

    static GridFunction sample(const Grid& grid, const std::function<double(const Point&)>& fn);

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }
    double operator[](std::size_t k) const { return values_[k]; }
    double& operator[](std::size_t k) { return values_[k]; }

    void zero_boundary();
    bool boundary_is_zero() const;
    bool all_finite() const;
    bool is_zero() const;

    double max_value() const;
    double max_abs() const;
    /// Minimum over interior nodes.
    double min_interior() const;

    GridFunction& operator+=(const GridFunction& other);
    GridFunction& operator-=(const GridFunction& other);
    GridFunction& operator*=(double s);

    /// this += s * other
    void axpy(double s, const GridFunction& other);

private:
    Grid grid_;
    std::vector<double> values_;
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator*(double s, GridFunction a);

/// Pointwise min(u, 0).
GridFunction negative_part(const GridFunction& u);

/// Nodal gradient: central differences in the interior, one-sided at the boundary.
struct VectorField {
    Grid grid;
    std::array<std::vector<double>, 2> components;

    int dim() const { return grid.dim(); }
    double magnitude(std::size_t k) const;
    double max_magnitude() const;
};

VectorField zero_field(const Grid& grid);
VectorField gradient_field(const GridFunction& u);

/// Discrete W-norm (integral of |grad u|^p + V |u|^p)^(1/p).
///
/// The gradient term uses the edge-difference quadrature shared with the
/// energy functional (see detail/edge_gradients.hpp); the potential term is
/// trapezoidal. Throws std::invalid_argument for p <= 1.
double w_norm(const GridFunction& u, const PotentialHandle& V, double p);

/// Same norm with V already sampled at the nodes.
double w_norm(const GridFunction& u, std::span<const double> nodal_V, double p);

/// p-th power of the norm, avoiding the root.
double w_norm_pow(const GridFunction& u, std::span<const double> nodal_V, double p);

std::vector<double> sample_potential(const Grid& grid, const PotentialHandle& V);

/// Trapezoidal integral of nodal values.
double integrate(const Grid& grid, std::span<const double> values);

/// sqrt(sum_k w_k r_k^2).
double quadrature_norm(const GridFunction& r);

/// sum_k w_k a_k b_k.
double quadrature_dot(const GridFunction& a, const GridFunction& b);

/// Fraction of integral |u|^p carried inside the ball |x| <= radius_fraction * R.
double mass_fraction(const GridFunction& u, double p, double radius_fraction = 0.5);

}  // namespace plapmp
