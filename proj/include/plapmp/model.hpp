#pragma once

#include <array>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "plapmp/grid.hpp"

namespace plapmp {

/// f(t, g) where g stands for the vector |xi|^{p-2} xi (length N).
using NonlinearityFn = std::function<double(double t, std::span<const double> g)>;

struct NonlinearityHandle {
    std::string name;
    NonlinearityFn eval;
    /// F(t, g) = int_0^t f(s, g) ds; may be empty, then F_eval integrates.
    NonlinearityFn antiderivative;

    double operator()(double t, std::span<const double> g) const { return eval(t, g); }
};

struct PotentialHandle {
    std::string name;
    std::function<double(const Point&)> eval;
    double floor = 1.0;
    std::array<double, 2> period{1.0, 1.0};

    double operator()(const Point& x) const { return eval(x); }
};

/// Every symbol of the hypothesis list lives here.
struct ProblemSpec {
    std::string name;
    int dim = 1;
    double p = 2.0;
    /// Growth exponent of f; subcritical, q in (p, p*) when p < N.
    double q = 4.0;
    double theta = 4.0;
    double a = 0.125;
    double b = 1.0;
    /// Gradient-coupling strength of the graded builtins (0 otherwise).
    double epsilon = 0.0;
    /// True when p >= N: the standing assumption 1 < p < N fails and p* = inf.
    bool formal_regime = false;
    NonlinearityHandle f;
    PotentialHandle V;
};

/// Np/(N-p) for p < N, +inf otherwise.
double critical_exponent(double p, int dim);

/// Checks the ProblemSpec invariants, sets formal_regime, throws
/// std::invalid_argument on violation.
void validate(ProblemSpec& spec);

/// F(t, g): closed form when available, otherwise adaptive Gauss-Kronrod
/// quadrature of f(., g) over [0, t]. Zero for t <= 0. Throws
/// std::runtime_error if the quadrature does not reach its tolerance.
double F_eval(const NonlinearityHandle& f, double t, std::span<const double> g);

struct BuiltinOptions {
    double epsilon = 0.0;
    double p = 1.5;
    double q = 3.0;
};

/// classical_cubic, graded_cubic or plap_model. Throws std::invalid_argument
/// on an unknown name or an out-of-range option.
ProblemSpec builtin_problem(const std::string& name, const BuiltinOptions& options = {});

std::vector<std::string> builtin_names();

// Building blocks, also used by the CLI for custom problems and by the
// hypothesis tests for planted counterexamples.

/// t_+^{q-1} (1 + eps / (1 + |g|)), with closed-form antiderivative.
NonlinearityHandle graded_power(double q, double epsilon);
/// t_+.
NonlinearityHandle linear_positive();
/// |t|^{q-1}: violates the vanishing-on-negatives condition.
NonlinearityHandle abs_power(double q);
/// f = 0.
NonlinearityHandle zero_nonlinearity();

PotentialHandle constant_potential(double value);
/// 1.5 + 0.5 cos(2 pi x1) cos(2 pi x2) (1D: 1.5 + 0.5 cos(2 pi x1)).
PotentialHandle cosine_potential(int dim);
/// x1^2: neither bounded below by a positive constant nor periodic.
PotentialHandle quadratic_potential();

}  // namespace plapmp
