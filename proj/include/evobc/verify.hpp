#pragma once

// Randomized and closed-form numerical checks of the solver's quantitative
// guarantees. Each check yields a CheckReport; pass == (worst_margin >= -tolerance).

#include "evobc/semilinear.hpp"
#include "evobc/spectral_pde.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace evobc {

struct CheckReport {
    std::string name;
    std::size_t trials = 0;
    /// Smallest slack observed; +inf until the first trial.
    double worst_margin = std::numeric_limits<double>::infinity();
    double tolerance = 0.0;
    bool pass = false;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::string note;
    /// Config text reproducing the worst trial, when one exists.
    std::string replay;

    /// Records one trial; returns true if it is the new worst.
    bool observe(double margin);
    void add_row(std::vector<std::string> row) { rows.push_back(std::move(row)); }
    /// Sets pass; a report with no trials or no details fails.
    void finish();
};

/// Deterministic per-trial seed (SplitMix64 mix of seed and index).
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t index);

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    double normal() { return normal_(gen_); }
    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(gen_); }
    Index uniform_int(Index a, Index b) { return std::uniform_int_distribution<Index>(a, b)(gen_); }
    Vector normal_vector(Index n);
    Matrix normal_matrix(Index r, Index c);

private:
    std::mt19937_64 gen_;
    std::normal_distribution<double> normal_;
};

/// S(t) = s0 + t s1 on a random triple with gram_v >= gram_h (so c_H >= 1).
/// sym(S(t)) >= alpha0 gram_v for t >= 0, so the family is coercive.
struct RandomFamily {
    FormFamily form;
    Matrix s0;
    Matrix s1;
};
RandomFamily random_coercive_family(Rng& rng, Index dim, double tau);

/// Config text for a random-family instance.
std::string instance_config(const GelfandTriple& triple, const Matrix& s0, const Matrix& s1, const BoundaryMap& phi,
                            const TimeGrid& grid);

/// |T(tau)|_H against (1 + 2 alpha kappa tau)^{-1/2} e^{omega tau}, directly and on random unit vectors.
CheckReport check_h_norm_bound(const FormFamily& form, const TimeGrid& grid, std::size_t trials, std::uint64_t seed);
/// The same bound over random coercive families with tau alternating 0.1 and 1.
CheckReport check_h_norm_bound_suite(std::size_t instances, Index max_dim, std::size_t steps, std::uint64_t seed);

/// |v(t)|_H^2 nonincreasing along homogeneous solutions; throws HypothesisFailed when omega != 0.
CheckReport check_energy_decay(const FormFamily& form, const TimeGrid& grid, std::size_t trials, std::uint64_t seed);
CheckReport check_energy_decay(const FormFamily& form, const TimeGrid& grid, const std::vector<Vector>& initial);

/// <v(s),w(s)> - <v(r),w(r)> against the trapezoid integral of <v',w> + <w',v>,
/// worst over node pairs; tolerance C h^2 with C estimated from third differences.
CheckReport check_integration_by_parts(const Trajectory& v, const Trajectory& w, const GelfandTriple& triple);

/// Discrete Re<Cu, u>: sum <u_{i+1} - u_i, (u_i + u_{i+1})/2>_H plus the trapezoid integral of a(t, u, u).
double space_time_pairing(const FormFamily& form, const Trajectory& u);

/// Pairing >= 0 on random piecewise-linear u with u(0) = Phi u(tau), plus solvability for random f.
/// Throws HypothesisFailed when omega != 0 or |Phi|_H > 1.
CheckReport check_m_accretive(const FormFamily& form, const BoundaryMap& phi, const TimeGrid& grid,
                              std::size_t trials, std::size_t solves, std::uint64_t seed);

struct EquivalenceInstance {
    OperatorFamily family;
    BoundaryMap phi;
    TimeGrid grid;
    ForcingTerm f;
    std::string replay;
};

/// Random coercive families and dense Phi; every third instance is made exactly singular.
std::vector<EquivalenceInstance> random_equivalence_instances(std::size_t count, Index max_dim, std::uint64_t seed);

/// Verdict from sigma_min (H and V geometry) against solve success and uniqueness.
CheckReport check_equivalence(const std::vector<EquivalenceInstance>& instances);

/// Every sufficient flag that holds comes with a well_posed verdict.
CheckReport check_sufficiency_ordering(std::size_t instances, Index max_dim, std::uint64_t seed);

/// Refinement ratio of |u'|_{L2(H)} and max |u(t_i)|_V stays <= 1.1 over `levels` grids.
/// Throws HypothesisFailed without a form decomposition or when Phi does not map V into V.
CheckReport check_h_regularity(const FormFamily& form, const BoundaryMap& phi, const ForcingTerm& f,
                               const TimeGrid& grid, std::size_t levels);

/// Perturbations f + 2^{-n} delta (sign-alternating on request): sup |u_n - u|_H <= C |delta_n|_{L1(H)}.
CheckReport check_continuity(const OperatorFamily& family, const BoundaryMap& phi, const ForcingTerm& f,
                             const ForcingTerm& delta, const TimeGrid& grid, std::size_t levels,
                             bool alternate_sign = false);

CheckReport check_v_norm_decay(const DirichletModel& model, double tau, std::size_t steps, Method method);
CheckReport check_singular_value_decay(const DirichletModel& model, const TimeGrid& grid);
CheckReport check_accretivity_example(const DivergenceFormModel& model, double beta);
/// |u|_{L2(H)} <= 1.05 * a-priori bound for the converged semilinear solution.
CheckReport check_semilinear_bound(const FormFamily& form, const BoundaryMap& phi, const SemilinearSpec& spec,
                                   const TimeGrid& grid);

/// All checks at default sizes.
std::vector<CheckReport> run_default_suite(std::uint64_t seed);

/// One block per report; failing reports include their replay config.
std::string format_report(const CheckReport& r, std::size_t max_rows = 20);
std::string format_reports(const std::vector<CheckReport>& reports);
/// name,trials,tolerance,worst_margin,pass
std::string reports_csv(const std::vector<CheckReport>& reports);

}  // namespace evobc
