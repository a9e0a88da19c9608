#include "plapmp/model.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace plapmp {

namespace {

double norm_of(std::span<const double> g) {
    double s = 0.0;
    for (double x : g) s += x * x;
    return std::sqrt(s);
}

}  // namespace

double critical_exponent(double p, int dim) {
    if (p < dim) return dim * p / (dim - p);
    return std::numeric_limits<double>::infinity();
}

void validate(ProblemSpec& spec) {
    if (spec.dim != 1 && spec.dim != 2) throw std::invalid_argument("dim must be 1 or 2");
    if (!(spec.p > 1.0)) throw std::invalid_argument("p must exceed 1");
    if (!(spec.theta > spec.p)) throw std::invalid_argument("theta must exceed p");
    if (!(spec.a > 0.0) || !(spec.b > 0.0)) throw std::invalid_argument("a and b must be positive");
    if (!(spec.q > spec.p)) throw std::invalid_argument("q must exceed p");
    spec.formal_regime = !(spec.p < spec.dim);
    if (!spec.formal_regime && !(spec.q < critical_exponent(spec.p, spec.dim))) {
        throw std::invalid_argument("q must be below the critical exponent Np/(N-p)");
    }
    if (!spec.f.eval) throw std::invalid_argument("nonlinearity has no evaluator");
    if (!spec.V.eval) throw std::invalid_argument("potential has no evaluator");
    if (!(spec.V.floor > 0.0)) throw std::invalid_argument("potential floor must be positive");
}

double F_eval(const NonlinearityHandle& f, double t, std::span<const double> g) {
    if (!std::isfinite(t)) throw std::invalid_argument("F_eval: non-finite t");
    if (t <= 0.0) return 0.0;
    if (f.antiderivative) return f.antiderivative(t, g);
    double error = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [&](double s) { return f.eval(s, g); }, 0.0, t, 20, 1e-13, &error);
    if (!std::isfinite(value) || error > 1e-10 + 1e-12 * std::abs(value)) {
        throw std::runtime_error("F_eval: quadrature did not converge (t = " + std::to_string(t) +
                                 ", error estimate " + std::to_string(error) + ")");
    }
    return value;
}

NonlinearityHandle graded_power(double q, double epsilon) {
    NonlinearityHandle f;
    f.name = "graded_power";
    f.eval = [q, epsilon](double t, std::span<const double> g) {
        if (t <= 0.0) return 0.0;
        return std::pow(t, q - 1.0) * (1.0 + epsilon / (1.0 + norm_of(g)));
    };
    f.antiderivative = [q, epsilon](double t, std::span<const double> g) {
        if (t <= 0.0) return 0.0;
        return std::pow(t, q) / q * (1.0 + epsilon / (1.0 + norm_of(g)));
    };
    return f;
}

NonlinearityHandle linear_positive() {
    NonlinearityHandle f;
    f.name = "linear";
    f.eval = [](double t, std::span<const double>) { return t > 0.0 ? t : 0.0; };
    f.antiderivative = [](double t, std::span<const double>) { return t > 0.0 ? 0.5 * t * t : 0.0; };
    return f;
}

NonlinearityHandle abs_power(double q) {
    NonlinearityHandle f;
    f.name = "abs_power";
    f.eval = [q](double t, std::span<const double>) { return std::pow(std::abs(t), q - 1.0); };
    // Antiderivative only on t > 0; F_eval returns 0 for t <= 0 regardless.
    f.antiderivative = [q](double t, std::span<const double>) {
        return t > 0.0 ? std::pow(t, q) / q : 0.0;
    };
    return f;
}

NonlinearityHandle zero_nonlinearity() {
    NonlinearityHandle f;
    f.name = "zero";
    f.eval = [](double, std::span<const double>) { return 0.0; };
    f.antiderivative = [](double, std::span<const double>) { return 0.0; };
    return f;
}

PotentialHandle constant_potential(double value) {
    if (!(value > 0.0)) throw std::invalid_argument("constant potential must be positive");
    PotentialHandle V;
    V.name = "constant";
    V.eval = [value](const Point&) { return value; };
    V.floor = value;
    return V;
}

PotentialHandle cosine_potential(int dim) {
    PotentialHandle V;
    V.name = "cosine";
    constexpr double two_pi = 2.0 * std::numbers::pi;
    if (dim == 1) {
        V.eval = [](const Point& x) { return 1.5 + 0.5 * std::cos(two_pi * x[0]); };
    } else {
        V.eval = [](const Point& x) {
            return 1.5 + 0.5 * std::cos(two_pi * x[0]) * std::cos(two_pi * x[1]);
        };
    }
    V.floor = 1.0;
    return V;
}

PotentialHandle quadratic_potential() {
    PotentialHandle V;
    V.name = "quadratic";
    V.eval = [](const Point& x) { return x[0] * x[0]; };
    // Declared floor is what a user would claim; the audit finds the truth.
    V.floor = 1.0;
    return V;
}

std::vector<std::string> builtin_names() { return {"classical_cubic", "graded_cubic", "plap_model"}; }

ProblemSpec builtin_problem(const std::string& name, const BuiltinOptions& options) {
    ProblemSpec spec;
    spec.name = name;
    if (name == "classical_cubic") {
        spec.dim = 1;
        spec.p = 2.0;
        spec.q = 4.0;
        spec.theta = 4.0;
        spec.a = 0.125;
        spec.b = 1.0;
        spec.f = graded_power(4.0, 0.0);
        spec.f.name = "cubic";
        spec.V = constant_potential(1.0);
    } else if (name == "graded_cubic") {
        if (!(options.epsilon >= 0.0 && options.epsilon <= 0.2)) {
            throw std::invalid_argument("graded_cubic: epsilon must lie in [0, 0.2]");
        }
        spec.dim = 1;
        spec.p = 2.0;
        spec.q = 4.0;
        spec.theta = 4.0;
        spec.a = 0.125;
        spec.b = 1.0;
        spec.epsilon = options.epsilon;
        spec.f = graded_power(4.0, options.epsilon);
        spec.V = constant_potential(1.0);
    } else if (name == "plap_model") {
        if (!(options.epsilon >= 0.0 && options.epsilon <= 0.2)) {
            throw std::invalid_argument("plap_model: epsilon must lie in [0, 0.2]");
        }
        spec.dim = 2;
        spec.p = options.p;
        spec.q = options.q;
        // theta F = t f holds with equality for a pure power.
        spec.theta = options.q;
        spec.a = 0.5 / options.q;
        spec.b = 1.0;
        spec.epsilon = options.epsilon;
        spec.f = graded_power(options.q, options.epsilon);
        spec.V = cosine_potential(2);
    } else {
        throw std::invalid_argument("unknown builtin problem '" + name + "'");
    }
    validate(spec);
    return spec;
}

}  // namespace plapmp
