#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "plapmp/grid.hpp"
#include "plapmp/hypotheses.hpp"
#include "plapmp/model.hpp"
#include "plapmp/mountain_pass.hpp"

namespace plapmp {

enum class InitialGuess { zero, sech_bump, random_bump };

InitialGuess parse_initial_guess(const std::string& name);
std::string to_string(InitialGuess g);
GridFunction initial_guess(const Grid& grid, InitialGuess kind, std::uint64_t seed = 3);

struct OuterConfig {
    std::optional<GridFunction> u0;
    double tol_outer = 1e-8;
    int max_outer = 30;
    MPConfig mp;
    /// lambda_config = lambda_factor * ||u_ref||, u_ref the solve with w = 0.
    double lambda_factor = 0.5;
    int divergence_window = 5;
    int lipschitz_samples = 10000;
    int cp_samples = 20000;
    std::uint64_t seed = 7;
};

void validate(const OuterConfig& cfg);

struct OuterRecord {
    int n = 0;
    double norm = 0.0;
    double delta = 0.0;
    /// delta_n / delta_{n-1}; NaN for n = 1.
    double ratio = 0.0;
    double c_w = 0.0;
    double min_interior = 0.0;
    double negative_part_norm = 0.0;
    double mass_fraction = 0.0;
    double mp_residual = 0.0;
    int mp_iters = 0;
    double identity_error = 0.0;
    double alpha_probe = 0.0;
    double eta_check = 0.0;
    /// (1/p - 1/theta) ||u||^p <= c_w + 1e-6.
    bool norm_bound_ok = false;
    bool lambda_ok = false;
    double sup_u = 0.0;
    double sup_grad = 0.0;
    std::vector<MPLogRecord> mp_log{};
};

struct OuterReport {
    std::vector<OuterRecord> records;
    double lambda_config = 0.0;
    std::optional<ConstantsEstimate> constants;
    double d_predicted = 0.0;
    bool converged = false;
    bool diverged = false;
    double final_residual = 0.0;
};

struct OuterResult {
    GridFunction u;
    OuterReport report;
};

/// Inner mountain-pass failure at outer step `iteration`; carries what was
/// computed so far.
class InnerSolveFailure : public std::runtime_error {
public:
    InnerSolveFailure(int iteration, const std::string& what, OuterReport partial, GridFunction last)
        : std::runtime_error(what),
          iteration_(iteration),
          partial_(std::move(partial)),
          last_(std::move(last)) {}
    int iteration() const { return iteration_; }
    const OuterReport& partial_report() const { return partial_; }
    const GridFunction& last_iterate() const { return last_; }

private:
    int iteration_;
    OuterReport partial_;
    GridFunction last_;
};

/// Frozen-gradient Picard iteration u_{n} = MP solution of the problem with
/// g frozen at grad u_{n-1}.
OuterResult outer_iterate(const ProblemSpec& spec, const Grid& grid, const OuterConfig& cfg);

struct AuditVerdict {
    double max_tail_ratio = 0.0;
    double d_predicted = 0.0;
    bool guarantee_holds = false;
    /// max_tail_ratio <= d + 0.1; meaningful only when guarantee_holds.
    bool consistent = false;
    bool informational = true;
};

/// Compares the observed tail ratios with d. Throws std::invalid_argument
/// with fewer than 3 records.
AuditVerdict contraction_audit(const OuterReport& report, const ConstantsEstimate& est);

/// Largest ratio over the second half of the records (NaN if none defined).
double max_tail_ratio(const OuterReport& report);

void write_report_csv(std::ostream& os, const OuterReport& report);
void write_summary(std::ostream& os, const OuterReport& report, const GridFunction& u,
                   const std::optional<AuditVerdict>& audit);

}  // namespace plapmp
