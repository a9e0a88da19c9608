#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "plapmp/grid.hpp"
#include "plapmp/model.hpp"

using namespace plapmp;

namespace {

double sech(double x) { return 1.0 / std::cosh(x); }

GridFunction gaussian(const Grid& g) {
    auto u = GridFunction::sample(g, [&](const Point& x) {
        return std::exp(-(x[0] * x[0] + x[1] * x[1]));
    });
    u.zero_boundary();
    return u;
}

}  // namespace

TEST_CASE("build_grid spacing and node count") {
    const Grid g1 = build_grid(1, 20.0, 4001);
    CHECK(g1.spacing() == doctest::Approx(0.01).epsilon(1e-14));
    CHECK(g1.size() == 4001);
    CHECK(g1.coord(0) == -20.0);
    CHECK(g1.coord(4000) == doctest::Approx(20.0).epsilon(1e-15));

    const Grid g2 = build_grid(2, 10.0, 201);
    CHECK(g2.spacing() == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(g2.size() == 201u * 201u);
    for (std::size_t k = 0; k < g2.size(); k += 997) {
        const Point x = g2.point(k);
        CHECK(std::abs(x[0]) <= 10.0 + 1e-12);
        CHECK(std::abs(x[1]) <= 10.0 + 1e-12);
    }
}

TEST_CASE("build_grid rejects bad shapes") {
    CHECK_THROWS_WITH_AS(build_grid(3, 10.0, 11), doctest::Contains("unsupported dimension"),
                         std::invalid_argument);
    CHECK_THROWS_AS(build_grid(1, 0.0, 11), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(1, -1.0, 11), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(2, 1.0, 2), std::invalid_argument);
}

TEST_CASE("GridFunction invariants") {
    const Grid g = build_grid(2, 1.0, 5);
    CHECK_THROWS_AS(GridFunction(g, std::vector<double>(24, 0.0)), std::invalid_argument);
    std::vector<double> bad(25, 0.0);
    bad[12] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(GridFunction(g, bad), std::invalid_argument);

    auto u = GridFunction::sample(g, [](const Point&) { return 1.0; });
    CHECK_FALSE(u.boundary_is_zero());
    u.zero_boundary();
    CHECK(u.boundary_is_zero());
    int interior = 0;
    for (std::size_t k = 0; k < g.size(); ++k) interior += g.on_boundary(k) ? 0 : 1;
    CHECK(interior == 9);
}

TEST_CASE("gradient_field examples") {
    const Grid g = build_grid(1, 5.0, 101);
    const auto zero = gradient_field(GridFunction(g));
    CHECK(zero.max_magnitude() == 0.0);

    const auto affine = gradient_field(GridFunction::sample(g, [](const Point& x) { return x[0]; }));
    for (int i = 1; i < 100; ++i) CHECK(affine.components[0][i] == doctest::Approx(1.0).epsilon(1e-12));

    const Grid fine = build_grid(1, 5.0, 1001);  // h = 0.01
    const auto s = gradient_field(GridFunction::sample(fine, [](const Point& x) { return std::sin(x[0]); }));
    double err = 0.0;
    for (int i = 1; i < 1000; ++i) err = std::max(err, std::abs(s.components[0][i] - std::cos(fine.coord(i))));
    CHECK(err <= 2e-5);
}

TEST_CASE("gradient_field is linear") {
    const Grid g = build_grid(2, 2.0, 21);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n;
    std::vector<double> a(g.size()), b(g.size());
    for (auto& x : a) x = n(rng);
    for (auto& x : b) x = n(rng);
    const GridFunction u(g, a), v(g, b);
    const double s = 1.7, t = -0.3;
    const auto lhs = gradient_field(s * u + t * v);
    const auto gu = gradient_field(u);
    const auto gv = gradient_field(v);
    for (int c = 0; c < 2; ++c) {
        for (std::size_t k = 0; k < g.size(); ++k) {
            const double rhs = s * gu.components[c][k] + t * gv.components[c][k];
            CHECK(std::abs(lhs.components[c][k] - rhs) <= 1e-12 * (1.0 + std::abs(rhs)));
        }
    }
}

TEST_CASE("w_norm examples") {
    const Grid g = build_grid(1, 20.0, 4001);
    const auto V = constant_potential(1.0);
    CHECK(w_norm(GridFunction(g), V, 2.0) == 0.0);

    auto u = GridFunction::sample(g, [](const Point& x) { return std::sqrt(2.0) * sech(x[0]); });
    u.zero_boundary();
    const double n2 = std::pow(w_norm(u, V, 2.0), 2);
    CHECK(std::abs(n2 - 16.0 / 3.0) <= 1e-3 * 16.0 / 3.0);

    CHECK_THROWS_AS(w_norm(u, V, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(w_norm(u, V, 0.5), std::invalid_argument);
}

TEST_CASE("w_norm is absolutely homogeneous") {
    const Grid g = build_grid(2, 4.0, 41);
    const auto V = cosine_potential(2);
    const auto u = gaussian(g);
    for (double p : {1.5, 2.0, 3.0}) {
        const double base = w_norm(u, V, p);
        REQUIRE(base > 0.0);
        for (double t : {3.7, -2.0, 0.01, -1e3}) {
            CHECK(std::abs(w_norm(t * u, V, p) - std::abs(t) * base) <= 1e-12 * std::abs(t) * base);
        }
    }
}

TEST_CASE("w_norm quadrature converges at second order") {
    const auto V = constant_potential(1.0);
    // 1D: integral of 4x^2 e^{-2x^2} + e^{-2x^2} = 2 sqrt(pi/2).
    {
        const double exact = 2.0 * std::sqrt(M_PI / 2.0);
        const double e1 = std::abs(std::pow(w_norm(gaussian(build_grid(1, 8.0, 81)), V, 2.0), 2) - exact);
        const double e2 = std::abs(std::pow(w_norm(gaussian(build_grid(1, 8.0, 161)), V, 2.0), 2) - exact);
        CHECK(std::log2(e1 / e2) >= 1.8);
    }
    // 2D: integral of 4r^2 e^{-2r^2} + e^{-2r^2} = 3 pi / 2.
    {
        const double exact = 1.5 * M_PI;
        const double e1 = std::abs(std::pow(w_norm(gaussian(build_grid(2, 6.0, 61)), V, 2.0), 2) - exact);
        const double e2 = std::abs(std::pow(w_norm(gaussian(build_grid(2, 6.0, 121)), V, 2.0), 2) - exact);
        CHECK(std::log2(e1 / e2) >= 1.8);
    }
}

TEST_CASE("quadrature helpers") {
    const Grid g = build_grid(1, 1.0, 11);
    const auto one = GridFunction::sample(g, [](const Point&) { return 1.0; });
    CHECK(integrate(g, one.values()) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(quadrature_dot(one, one) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(quadrature_norm(one) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

    auto u = GridFunction::sample(g, [](const Point& x) { return x[0]; });
    const auto neg = negative_part(u);
    for (std::size_t k = 0; k < g.size(); ++k) CHECK(neg[k] == std::min(u[k], 0.0));
    CHECK_THROWS_AS(quadrature_dot(one, GridFunction(build_grid(1, 1.0, 13))), std::invalid_argument);
}

TEST_CASE("mass_fraction of a concentrated profile") {
    const Grid g = build_grid(1, 20.0, 4001);
    auto u = GridFunction::sample(g, [](const Point& x) { return sech(x[0]); });
    u.zero_boundary();
    const double mf = mass_fraction(u, 2.0);
    // integral of sech^2 over |x| <= 10 relative to |x| <= 20: tanh(10) / tanh(20)
    CHECK(mf == doctest::Approx(std::tanh(10.0) / std::tanh(20.0)).epsilon(1e-6));
}
