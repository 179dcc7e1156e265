#pragma once

// Flat `key.path = value` problem descriptions.
//
//   schema = 1
//   space.kind = dim | dirichlet | divergence
//   form.kind = matrix | samples | builtin
//   boundary.kind = zero | identity | scalar | antiperiodic | dense | rank_one | nonlinear_builtin
//   time.tau, time.steps, time.method
//   forcing.kind = zero | constant | samples | builtin
//   semilinear.name, run.*, sweep.*
//
// Matrices are written inline as "a b; c d" or as a path to a CSV file,
// relative to the config file. See README.md for the full key table.

#include "evobc/semilinear.hpp"
#include "evobc/spectral_pde.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace evobc {

struct ConfigIssue {
    /// 0 when the issue is not tied to a line.
    std::size_t line = 0;
    std::string field;
    std::string message;
};

/// Syntax or validation failure; lists every problem found.
class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<ConfigIssue> issues);
    const std::vector<ConfigIssue>& issues() const noexcept { return issues_; }

private:
    std::vector<ConfigIssue> issues_;
};

/// Raw key/value entries after syntax checks.
struct ProblemConfig {
    std::map<std::string, std::string> entries;
    std::map<std::string, std::size_t> lines;
    std::filesystem::path base_dir;

    bool has(const std::string& key) const { return entries.count(key) != 0; }
    std::string get(const std::string& key, const std::string& fallback = "") const;
};

/// Syntax only; throws ConfigError.
ProblemConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir = ".");
/// Syntax plus full validation (build_problem is run and discarded); throws ConfigError.
ProblemConfig parse_config(const std::filesystem::path& path);

/// `schema = 1` followed by the entries in key order.
std::string write_config(const ProblemConfig& config);

struct SweepSpec {
    std::string parameter;
    double min = 0.0;
    double max = 1.0;
    std::size_t points = 11;
};

struct Problem {
    std::string space_kind;
    GelfandTriple triple;
    std::optional<FormFamily> form;
    OperatorFamily family;
    BoundaryMap phi;
    Vector y0;
    TimeGrid grid;
    ForcingTerm forcing;
    std::optional<SemilinearSpec> semilinear;
    std::optional<DirichletModel> dirichlet;
    std::optional<DivergenceFormModel> divergence;
    std::optional<SweepSpec> sweep;
    double tol = 1e-10;
    std::size_t max_iter = 200;
    std::uint64_t seed = 0;
    std::optional<double> singular_tol;

    Index dim() const noexcept { return triple.dim(); }
};

inline constexpr std::uint64_t kDefaultSeed = 20240611;

/// Builds every object described by the config; throws ConfigError listing all problems.
Problem build_problem(const ProblemConfig& config);

}  // namespace evobc
