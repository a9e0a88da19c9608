#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "plapmp/hypotheses.hpp"

using namespace plapmp;

namespace {

ProblemSpec with_f(NonlinearityHandle f) {
    auto s = builtin_problem("classical_cubic");
    s.name = "planted";
    s.f = std::move(f);
    return s;
}

double f_at_xi(const ProblemSpec& s, double t, const std::array<double, 2>& xi) {
    const auto g = flux_vector(xi, s.p, s.dim);
    return s.f(t, std::span<const double>(g.data(), s.dim));
}

}  // namespace

TEST_CASE("classical_cubic passes f1-f5") {
    const auto r = check_f_conditions(builtin_problem("classical_cubic"), SamplingPlan{});
    for (const char* id : {"f1", "f2", "f3", "f4", "f5"}) {
        INFO(id);
        CHECK(r.at(id).verdict == Verdict::pass);
        CHECK(r.at(id).samples > 0);
    }
    CHECK_FALSE(r.any(Verdict::fail));
    CHECK_FALSE(r.any(Verdict::indeterminate));
}

TEST_CASE("planted f2 violation: linear f") {
    const auto s = with_f(linear_positive());
    const auto r = check_f_conditions(s, SamplingPlan{});
    const auto& e = r.at("f2");
    REQUIRE(e.verdict == Verdict::fail);
    // The witness really violates the limit: f / t^{p-1} stays at 1.
    const double g[1] = {0.0};
    CHECK(e.witness_t > 0.0);
    CHECK(s.f(e.witness_t, g) / std::pow(e.witness_t, s.p - 1.0) == doctest::Approx(1.0));
    // Same plan, same verdict and witness.
    const auto again = check_f_conditions(s, SamplingPlan{});
    CHECK(again.at("f2").witness_t == e.witness_t);
    CHECK(again.at("f2").measured == e.measured);
}

TEST_CASE("planted f1 violation: |t|^{q-1}") {
    const auto s = with_f(abs_power(4.0));
    const auto r = check_f_conditions(s, SamplingPlan{});
    const auto& e = r.at("f1");
    REQUIRE(e.verdict == Verdict::fail);
    CHECK(e.witness_t < 0.0);
    const double g[1] = {e.witness_x[0]};
    CHECK(s.f(e.witness_t, g) != 0.0);
    CHECK(check_f_conditions(s, SamplingPlan{}).at("f1").witness_t == e.witness_t);
}

TEST_CASE("f1 holds at t = -5 for the cubic") {
    const auto s = builtin_problem("classical_cubic");
    const double g[1] = {0.0};
    CHECK(s.f(-5.0, g) == 0.0);
}

TEST_CASE("V conditions") {
    const SamplingPlan plan;
    const auto c = check_V_conditions(constant_potential(1.0), 1, plan);
    CHECK(c.at("V1").verdict == Verdict::pass);
    CHECK(c.at("V1").measured == 1.0);
    CHECK(c.at("V2").verdict == Verdict::pass);
    CHECK(c.at("V2").measured == 0.0);

    const auto m = check_V_conditions(cosine_potential(2), 2, plan);
    CHECK(m.at("V1").verdict == Verdict::pass);
    CHECK(std::abs(m.at("V1").measured - 1.0) <= 1e-6);
    CHECK(m.at("V2").measured <= 1e-12);
    CHECK(m.at("V1").samples >= 10000);

    const auto V = quadratic_potential();
    const auto q = check_V_conditions(V, 1, plan);
    const auto& e = q.at("V2");
    REQUIRE(e.verdict == Verdict::fail);
    CHECK(e.measured > 0.0);
    // Re-evaluate the witness with the reported shift.
    const auto open = e.note.find('(');
    const auto comma = e.note.find(',');
    const double sx = std::stod(e.note.substr(open + 1, comma - open - 1));
    const Point x = {e.witness_x[0], e.witness_x[1]};
    CHECK(std::abs(V({x[0] + sx, x[1]}) - V(x)) == doctest::Approx(e.measured));
    CHECK(check_V_conditions(V, 1, plan).at("V2").witness_x == e.witness_x);
}

TEST_CASE("estimate_lipschitz examples") {
    const auto c = builtin_problem("classical_cubic");
    const auto est = estimate_lipschitz(c, 2.0, 2.0, 10000);
    CHECK(est.L2 == 0.0);
    CHECK(est.L1 >= 11.9);
    CHECK(est.L1 <= 12.0);

    BuiltinOptions o;
    o.epsilon = 0.1;
    const auto g = builtin_problem("graded_cubic", o);
    const auto eg = estimate_lipschitz(g, 2.0, 2.0, 10000);
    CHECK(eg.L2 > 0.0);
    CHECK(eg.L2 <= 0.8);

    CHECK_THROWS_AS(estimate_lipschitz(c, 0.0, 2.0, 10000), std::invalid_argument);
    CHECK_THROWS_AS(estimate_lipschitz(c, 2.0, -1.0, 10000), std::invalid_argument);
    CHECK_THROWS_AS(estimate_lipschitz(c, 2.0, 2.0, 100), std::invalid_argument);
}

TEST_CASE("Lipschitz constants dominate their own sample") {
    BuiltinOptions o;
    o.epsilon = 0.2;
    for (const auto& name : builtin_names()) {
        const auto s = builtin_problem(name, o);
        const auto plan = lipschitz_plan(s.dim, 2.0, 1.5, 10000, 9);
        const auto est = estimate_lipschitz(s, plan);
        for (const auto& pr : plan.t_pairs) {
            if (pr.t1 == pr.t2) continue;
            const double lhs = std::abs(f_at_xi(s, pr.t1, pr.xi1) - f_at_xi(s, pr.t2, pr.xi1));
            CHECK(lhs <= est.L1 * std::pow(std::abs(pr.t1 - pr.t2), s.p - 1.0) * (1.0 + 1e-12));
        }
        for (const auto& pr : plan.xi_pairs) {
            const double dx = std::hypot(pr.xi1[0] - pr.xi2[0], pr.xi1[1] - pr.xi2[1]);
            if (dx == 0.0) continue;
            const double lhs = std::abs(f_at_xi(s, pr.t1, pr.xi1) - f_at_xi(s, pr.t1, pr.xi2));
            CHECK(lhs <= est.L2 * std::pow(dx, s.p - 1.0) * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("cp_constant examples") {
    const auto c2 = cp_constant(2.0, 2, 100000);
    CHECK(std::abs(c2.value - 1.0) <= 1e-12);
    CHECK(c2.guaranteed);

    const auto c3 = cp_constant(3.0, 1, 100000);
    CHECK(std::abs(c3.value - 0.5) <= 1e-3);
    CHECK(monotonicity_ratio({1.0, 0.0}, {-1.0, 0.0}, 3.0, 1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(monotonicity_ratio({1.0, 0.0}, {-1.0, 0.0}, 4.0, 1) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(cp_constant(4.0, 1, 100000).value == doctest::Approx(0.25).epsilon(1e-3));

    const auto c15 = cp_constant(1.5, 2, 100000);
    CHECK_FALSE(c15.guaranteed);
    CHECK(c15.value > 0.0);

    CHECK_THROWS_AS(cp_constant(1.0, 1, 100000), std::invalid_argument);
    CHECK_THROWS_AS(cp_constant(0.5, 1, 100000), std::invalid_argument);
}

TEST_CASE("cp_constant is non-increasing in p") {
    for (int dim : {1, 2}) {
        double prev = std::numeric_limits<double>::infinity();
        for (double p : {2.0, 2.5, 3.0, 4.0}) {
            const double c = cp_constant(p, dim, 100000).value;
            CHECK(c <= prev);
            prev = c;
        }
    }
}

TEST_CASE("contraction_factor examples") {
    const auto a = contraction_factor(0.1, 0.2, 1.0, 2.0);
    CHECK(a.d == doctest::Approx(0.2 / 0.9).epsilon(1e-14));
    CHECK(a.guarantee_holds);

    const auto b = contraction_factor(0.1, 0.0, 1.0, 2.0);
    CHECK(b.d == 0.0);

    const auto c = contraction_factor(1.5, 0.2, 1.0, 2.0);
    CHECK(std::isinf(c.d));
    CHECK_FALSE(c.guarantee_holds);

    const auto e = contraction_factor(0.1, 0.2, 1.0, 3.0);
    CHECK(e.d == doctest::Approx(std::sqrt(0.2 / 0.9)).epsilon(1e-14));

    CHECK_FALSE(contraction_factor(0.1, 0.95, 1.0, 2.0).guarantee_holds);
}

TEST_CASE("contraction_factor monotonicity") {
    double prev = -1.0;
    for (double L2 : {0.05, 0.1, 0.3}) {
        const double d = contraction_factor(0.2, L2, 1.0, 2.5).d;
        CHECK(d > prev);
        prev = d;
    }
    prev = std::numeric_limits<double>::infinity();
    for (double Cp : {0.5, 1.0, 2.0}) {
        const double d = contraction_factor(0.2, 0.1, Cp, 2.5).d;
        CHECK(d < prev);
        prev = d;
    }
}

TEST_CASE("reports serialise one line per entry") {
    const auto r = check_f_conditions(builtin_problem("classical_cubic"), SamplingPlan{});
    std::ostringstream os;
    write_report(os, r);
    std::istringstream is(os.str());
    std::string line;
    std::size_t n = 0;
    while (std::getline(is, line)) {
        CHECK(line.rfind("condition=", 0) == 0);
        CHECK(line.find("verdict=") != std::string::npos);
        CHECK(line.find("witness_t=") != std::string::npos);
        ++n;
    }
    CHECK(n == r.entries.size());
}
