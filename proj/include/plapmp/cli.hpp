#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "plapmp/grid.hpp"
#include "plapmp/model.hpp"
#include "plapmp/outer.hpp"

namespace plapmp::cli {

/// Exit statuses shared by the commands.
namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int violation = 2;
inline constexpr int indeterminate = 3;
inline constexpr int diverged = 4;
inline constexpr int inner_failure = 5;
inline constexpr int not_converged = 6;
inline constexpr int usage = 64;
}  // namespace exit_code

/// Config problem with the offending line (0 when not from a file) and key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, std::string field, const std::string& message);
    int line() const { return line_; }
    const std::string& field() const { return field_; }

private:
    int line_;
    std::string field_;
};

/// Flat `section.key = value` configuration. Every key has a documented
/// default; unset problem-dependent keys resolve once the problem is known.
class RunConfig {
public:
    RunConfig();

    static RunConfig parse(std::istream& in);
    static RunConfig load(const std::filesystem::path& path);

    /// Throws ConfigError for unknown keys or malformed values.
    void set(const std::string& key, const std::string& value, int line = 0);
    void unset(const std::string& key);
    bool is_set(const std::string& key) const;
    std::string get(const std::string& key) const;
    double get_double(const std::string& key) const;
    long long get_int(const std::string& key) const;

    ProblemSpec problem() const;
    Grid grid() const;
    OuterConfig outer() const;
    SamplingPlan sampling() const;
    std::uint64_t seed() const;
    std::filesystem::path output_dir() const;

    /// Resolves and range-checks everything; throws ConfigError.
    void validate() const;

    /// Every key with its resolved value, one `key = value` per line.
    void write_effective(std::ostream& os) const;

    static const std::vector<std::string>& keys();

private:
    void check_all() const;
    std::string field_of(const std::string& message) const;
    std::map<std::string, std::string> values_;
    std::map<std::string, int> lines_;
};

struct CommandOptions {
    bool verbose = false;
    std::ostream* log = nullptr;
};

int cmd_check(const RunConfig& cfg, const CommandOptions& opts = {});
int cmd_solve(const RunConfig& cfg, const CommandOptions& opts = {});

/// One solve per value of `parameter` (epsilon, p, radius or h), each in its
/// own subdirectory, plus study.csv.
int cmd_study(const RunConfig& cfg, const std::string& parameter, const std::vector<double>& values,
              const CommandOptions& opts = {});

/// "epsilon=0,0.05,0.1" -> {"epsilon", {0, 0.05, 0.1}}. Throws ConfigError.
std::pair<std::string, std::vector<double>> parse_sweep(const std::string& text);

/// Nodal table: coordinates then value, one node per line.
void write_solution(std::ostream& os, const GridFunction& u);
/// Values along axis `axis` through the centre of the box.
void write_profile(std::ostream& os, const GridFunction& u, int axis);

}  // namespace plapmp::cli
