#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "plapmp/model.hpp"

namespace plapmp {

enum class Verdict { pass, fail, indeterminate };

std::string to_string(Verdict v);

/// One audited condition. Sampling can refute a condition but never prove
/// it, so `pass` means "no violation found".
struct HypothesisEntry {
    std::string id;
    Verdict verdict = Verdict::pass;
    /// Worst sample: the t (f-conditions) or x (V-conditions) coordinates.
    double witness_t = 0.0;
    std::array<double, 2> witness_x{0.0, 0.0};
    double measured = 0.0;
    std::size_t samples = 0;
    std::string note;
};

struct HypothesisReport {
    std::vector<HypothesisEntry> entries;

    const HypothesisEntry& at(const std::string& id) const;
    bool any(Verdict v) const;
};

/// Where the f- and V-audits look.
struct SamplingPlan {
    double t_min = 1e-6;
    double t_max = 1e6;
    int samples_per_decade = 20;
    /// Magnitudes of xi; directions are drawn from `seed`.
    std::vector<double> xi_magnitudes{0.0, 1e-3, 0.1, 1.0, 10.0, 100.0};
    int xi_directions = 3;
    /// Regular lattice per axis inside one period cell, plus random points.
    int cell_points_per_axis = 100;
    int cell_random_points = 10000;
    int lattice_shifts = 200;
    int max_shift = 50;
    std::uint64_t seed = 42;
};

/// Exponent used for the large-|t| decay test: (q + p*)/2, or 2q when p* = inf.
double f3_test_exponent(const ProblemSpec& spec);

/// Audits (f1)-(f5).
HypothesisReport check_f_conditions(const ProblemSpec& spec, const SamplingPlan& plan);

/// Audits (V1) floor and (V2) lattice periodicity.
HypothesisReport check_V_conditions(const PotentialHandle& V, int dim, const SamplingPlan& plan);

struct LipschitzPair {
    double t1 = 0.0;
    double t2 = 0.0;
    std::array<double, 2> xi1{0.0, 0.0};
    std::array<double, 2> xi2{0.0, 0.0};
};

struct LipschitzPlan {
    /// Pairs differing in t at a common xi (xi1 == xi2).
    std::vector<LipschitzPair> t_pairs;
    /// Pairs differing in xi at a common t (t1 == t2).
    std::vector<LipschitzPair> xi_pairs;
};

/// Deterministic pair sample inside [0, rho1] x {|xi| <= rho2}. Includes
/// near-diagonal pairs down to a separation of 1e-4 * rho.
LipschitzPlan lipschitz_plan(int dim, double rho1, double rho2, int samples, std::uint64_t seed);

struct LipschitzEstimate {
    double L1 = 0.0;
    double L2 = 0.0;
    LipschitzPair L1_witness;
    LipschitzPair L2_witness;
};

/// |xi|^{p-2} xi with the value 0 at xi = 0.
std::array<double, 2> flux_vector(const std::array<double, 2>& xi, double p, int dim);

LipschitzEstimate estimate_lipschitz(const ProblemSpec& spec, const LipschitzPlan& plan);
LipschitzEstimate estimate_lipschitz(const ProblemSpec& spec, double rho1, double rho2, int samples,
                                     std::uint64_t seed = 7);

struct CpEstimate {
    double value = 0.0;
    /// False for p < 2, where the sampled infimum degenerates towards 0.
    bool guaranteed = true;
    std::array<double, 2> witness_x{0.0, 0.0};
    std::array<double, 2> witness_y{0.0, 0.0};
};

/// Ratio <|x|^{p-2}x - |y|^{p-2}y, x - y> / |x - y|^p.
double monotonicity_ratio(const std::array<double, 2>& x, const std::array<double, 2>& y, double p,
                          int dim);

/// Sampled minimum of monotonicity_ratio. Throws std::invalid_argument for p <= 1.
CpEstimate cp_constant(double p, int dim, int samples, std::uint64_t seed = 11);

struct ConstantsEstimate {
    double L1 = 0.0;
    double L2 = 0.0;
    double Cp = 1.0;
    bool cp_guaranteed = true;
    double rho1 = 0.0;
    double rho2 = 0.0;
    double d = 0.0;
    bool guarantee_holds = false;
};

struct ContractionFactor {
    double d = 0.0;
    bool guarantee_holds = false;
};

/// d = (L2 / (Cp - L1))^{1/(p-1)}; L2 = 0 gives d = 0, Cp <= L1 gives +inf.
ContractionFactor contraction_factor(double L1, double L2, double Cp, double p);

/// Full pipeline: Lipschitz sample + Cp + d.
ConstantsEstimate estimate_constants(const ProblemSpec& spec, double rho1, double rho2,
                                     int lipschitz_samples, int cp_samples, std::uint64_t seed);

void write_report(std::ostream& os, const HypothesisReport& report);
void write_constants(std::ostream& os, const ConstantsEstimate& est);

}  // namespace plapmp
