#pragma once

// Edge-difference gradients shared by the W-norm, the energy and the weak
// residual.
//
// 1D: one gradient per face (u[k+1]-u[k])/h with weight h.
// 2D: every cell carries four corner gradients built from its edge
// differences (corner a = (dx_bottom, dy_left), b = (dx_bottom, dy_right),
// c = (dx_top, dy_left), d = (dx_top, dy_right)), each with weight h^2/4.
// For p = 2 this reproduces the 5-point Laplacian; it has no checkerboard
// null space and its derivative is assembled exactly, so the residual is
// the true gradient of the discrete energy.

#include <cmath>
#include <span>

#include "plapmp/grid.hpp"
#include "plapmp/detail/summation.hpp"

namespace plapmp::detail {

/// Calls visit(weight, s2) for every quadrature gradient, s2 = |G|^2.
template <class Visit>
void for_each_gradient(const Grid& grid, std::span<const double> u, Visit&& visit) {
    const int m = grid.points_per_axis();
    const double h = grid.spacing();
    const double inv_h = 1.0 / h;
    if (grid.dim() == 1) {
        for (int i = 0; i + 1 < m; ++i) {
            const double d = (u[i + 1] - u[i]) * inv_h;
            visit(h, d * d);
        }
        return;
    }
    const double w = 0.25 * h * h;
    for (int j = 0; j + 1 < m; ++j) {
        for (int i = 0; i + 1 < m; ++i) {
            const double a = u[grid.index(i, j)];
            const double b = u[grid.index(i + 1, j)];
            const double c = u[grid.index(i, j + 1)];
            const double d = u[grid.index(i + 1, j + 1)];
            const double dxb = (b - a) * inv_h;
            const double dxt = (d - c) * inv_h;
            const double dyl = (c - a) * inv_h;
            const double dyr = (d - b) * inv_h;
            visit(w, dxb * dxb + dyl * dyl);
            visit(w, dxb * dxb + dyr * dyr);
            visit(w, dxt * dxt + dyl * dyl);
            visit(w, dxt * dxt + dyr * dyr);
        }
    }
}

/// Sum of weight * phi(s2) over all quadrature gradients.
template <class Phi>
double gradient_integral(const Grid& grid, std::span<const double> u, Phi&& phi) {
    NeumaierSum sum;
    for_each_gradient(grid, u, [&](double w, double s2) { sum.add(w * phi(s2)); });
    return sum.value();
}

/// Accumulates d/du of sum_w w * Phi(|G|) into out, where coef(s2) returns
/// Phi'(s)/s. out must be zero-initialised by the caller.
template <class Coef>
void accumulate_gradient_derivative(const Grid& grid, std::span<const double> u, Coef&& coef,
                                    std::span<double> out) {
    const int m = grid.points_per_axis();
    const double h = grid.spacing();
    const double inv_h = 1.0 / h;
    if (grid.dim() == 1) {
        for (int i = 0; i + 1 < m; ++i) {
            const double d = (u[i + 1] - u[i]) * inv_h;
            // weight h times dD/du = +-1/h
            const double flux = coef(d * d) * d;
            out[i + 1] += flux;
            out[i] -= flux;
        }
        return;
    }
    const double w = 0.25 * h * h;
    for (int j = 0; j + 1 < m; ++j) {
        for (int i = 0; i + 1 < m; ++i) {
            const std::size_t ia = grid.index(i, j);
            const std::size_t ib = grid.index(i + 1, j);
            const std::size_t ic = grid.index(i, j + 1);
            const std::size_t id = grid.index(i + 1, j + 1);
            const double dxb = (u[ib] - u[ia]) * inv_h;
            const double dxt = (u[id] - u[ic]) * inv_h;
            const double dyl = (u[ic] - u[ia]) * inv_h;
            const double dyr = (u[id] - u[ib]) * inv_h;
            const double ca = coef(dxb * dxb + dyl * dyl);
            const double cb = coef(dxb * dxb + dyr * dyr);
            const double cc = coef(dxt * dxt + dyl * dyl);
            const double cd = coef(dxt * dxt + dyr * dyr);
            // dE/d(edge difference), then chain rule through +-1/h.
            const double s = w * inv_h;
            const double g_dxb = s * (ca + cb) * dxb;
            const double g_dxt = s * (cc + cd) * dxt;
            const double g_dyl = s * (ca + cc) * dyl;
            const double g_dyr = s * (cb + cd) * dyr;
            out[ib] += g_dxb;
            out[ia] -= g_dxb;
            out[id] += g_dxt;
            out[ic] -= g_dxt;
            out[ic] += g_dyl;
            out[ia] -= g_dyl;
            out[id] += g_dyr;
            out[ib] -= g_dyr;
        }
    }
}

}  // namespace plapmp::detail
