#pragma once

// Command dispatch shared by the CLI and the Python bindings.
//
// Exit codes:
//   0 success, 1 other error, 2 parse/validation error,
//   3 not well posed, 4 not contractive, 5 no convergence, 6 check failure.

#include "evobc/config.hpp"
#include "evobc/verify.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace evobc {

enum ExitCode : int {
    exit_ok = 0,
    exit_error = 1,
    exit_parse = 2,
    exit_not_well_posed = 3,
    exit_not_contractive = 4,
    exit_no_convergence = 5,
    exit_check_failed = 6,
};

struct CommandOptions {
    /// Optional only for `verify`.
    std::optional<std::filesystem::path> config;
    std::filesystem::path out = ".";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> steps;
    std::optional<std::string> method;
    bool quiet = false;
};

/// Reads the config file and applies --seed/--steps/--method before validation.
ProblemConfig load_config(const CommandOptions& options);

struct SweepRow {
    double parameter = 0.0;
    double sigma_min = 0.0;
    Verdict verdict = Verdict::singular;
    bool energy = false;
    bool accretive = false;
    bool optimized = false;
};

struct SweepResult {
    std::string parameter;
    std::vector<SweepRow> rows;
    /// Parameter value with the smallest sigma_min.
    double crossing = 0.0;
    /// Largest parameter (phi_scale) or smallest (tau) at which some sufficient test holds; NaN if none.
    double sufficient_edge = 0.0;
    /// Whether every point passing a sufficient test is well_posed.
    bool sufficient_inside = true;
};

/// Deterministic row order; points are evaluated concurrently.
SweepResult run_sweep(const ProblemConfig& config, const SweepSpec& spec);
std::string sweep_csv(const SweepResult& r);

/// t,u_1..u_n,residual_eq,residual_bc
std::string trajectory_csv(const Trajectory& u, double residual_bc);

/// Writes gram_h.csv, gram_v.csv, form_samples.csv and model_config.txt into `dir`.
/// The emitted config solves to the same trajectory as the original.
void write_model_files(const ProblemConfig& config, const Problem& problem, const std::filesystem::path& dir);

/// Default suite plus the checks whose hypotheses the configured problem satisfies.
/// `replay` is attached to failing config-specific checks.
std::vector<CheckReport> run_verify(const std::optional<Problem>& problem, std::uint64_t seed,
                                    const std::string& replay = "");

/// Runs one of solve | certify | sweep | verify | model; never throws.
int run_command(const std::string& cmd, const CommandOptions& options, std::ostream& out, std::ostream& err);

}  // namespace evobc
