#pragma once

// Generalized time-boundary condition u(0) = Phi u(tau) + y0.
//
// For linear Phi the problem reduces to the n x n system
//   (I - Phi T(tau)) x = Phi w(tau) + y0,
// where w is the zero-initial-value solution; the solution is then
// u = T(.) x + w. Nonlinear Lipschitz maps are handled by Banach iteration
// on x -> Phi(T(tau) x + w(tau)).

#include "evobc/propagator.hpp"

#include <Eigen/LU>

#include <optional>
#include <string>
#include <utility>

namespace evobc {

enum class BoundaryKind { zero, identity, scalar, dense, rank_one, nonlinear };

std::string_view to_string(BoundaryKind k);

class BoundaryMap {
public:
    using Map = std::function<Vector(const Vector&)>;

    static BoundaryMap zero();
    static BoundaryMap identity();
    static BoundaryMap scalar(double c);
    static BoundaryMap dense(Matrix m);
    /// Phi x = <xprime, x>_H x0.
    static BoundaryMap rank_one(Vector x0, Vector xprime);
    /// |map(x) - map(y)|_H <= lipschitz_l |x - y|_H is the caller's promise.
    static BoundaryMap nonlinear(Map map, double lipschitz_l);

    BoundaryKind kind() const noexcept { return kind_; }
    bool is_linear() const noexcept { return kind_ != BoundaryKind::nonlinear; }
    double scalar_value() const noexcept { return scalar_; }
    double lipschitz_l() const noexcept { return lipschitz_; }

    /// Caller-asserted Phi V subset V; verified for dense/rank-one maps by check_maps_into_v().
    bool maps_into_v() const noexcept { return maps_into_v_; }
    BoundaryMap& set_maps_into_v(bool v) {
        maps_into_v_ = v;
        return *this;
    }
    /// Images of the H-unit basis have finite V-norm.
    bool check_maps_into_v(const GelfandTriple& triple) const;

    Vector apply(const Vector& x, const GelfandTriple& triple) const;
    /// Matrix in H-coordinates; throws WrongKind for nonlinear maps.
    Matrix matrix(const GelfandTriple& triple) const;
    /// |Phi|_{L(H)}, or the Lipschitz constant for nonlinear maps.
    double norm_h(const GelfandTriple& triple) const;
    double norm_v(const GelfandTriple& triple) const;

    /// s * Phi
    BoundaryMap multiplied(double s) const;
    /// x -> Phi(s x); equals s * Phi for linear maps.
    BoundaryMap precomposed(double s) const;

    std::string describe() const;

private:
    BoundaryKind kind_ = BoundaryKind::zero;
    double scalar_ = 0.0;
    Matrix dense_;
    Vector x0_;
    Vector xprime_;
    Map map_;
    double lipschitz_ = 0.0;
    bool maps_into_v_ = true;
};

/// M = I - Phi T(tau) in H-coordinates.
Matrix assemble_boundary_system(const Propagator& prop, const BoundaryMap& phi, const GelfandTriple& triple);

enum class Verdict { well_posed, near_singular, singular };
std::string_view to_string(Verdict v);

/// Singular values of M as an operator on (R^n, |.|_G), descending, with
/// the right singular vector of the smallest one in original coordinates.
struct WeightedSvd {
    Vector singular_values;
    Vector null_direction;
};
WeightedSvd weighted_svd(const Matrix& m, const Matrix& gram);

/// Reusable solver for one (family, Phi, grid) triple.
class LinearBoundarySolver {
public:
    /// singular_tol defaults to 1e-10 scale(), the near-singular band ends at 1e-6 scale().
    LinearBoundarySolver(OperatorFamily family, BoundaryMap phi, const TimeGrid& grid,
                         std::optional<double> singular_tol = std::nullopt);
    LinearBoundarySolver(OperatorFamily family, BoundaryMap phi, Propagator prop,
                         std::optional<double> singular_tol = std::nullopt);

    const Propagator& propagator() const noexcept { return prop_; }
    const Matrix& system() const noexcept { return system_; }
    double sigma_min() const noexcept { return svd_.singular_values(svd_.singular_values.size() - 1); }
    double sigma_max() const noexcept { return svd_.singular_values(0); }
    double singular_tol() const noexcept { return singular_tol_; }
    /// 1 + |Phi|_H |T(tau)|_H, the size of the terms whose difference is I - Phi T.
    double scale() const noexcept { return scale_; }
    Verdict verdict() const noexcept;
    const Vector& null_direction() const noexcept { return svd_.null_direction; }

    /// Throws NotWellPosed when sigma_min <= singular_tol.
    Trajectory solve(const ForcingTerm& f, const Vector& y0) const;
    Trajectory solve(const ForcingTerm& f) const { return solve(f, Vector::Zero(family_.dim())); }

private:
    void factor(std::optional<double> singular_tol);

    OperatorFamily family_;
    BoundaryMap phi_;
    Propagator prop_;
    Matrix phi_matrix_;
    Matrix system_;
    WeightedSvd svd_;
    double singular_tol_ = 0.0;
    double scale_ = 1.0;
    Eigen::PartialPivLU<Matrix> lu_;
};

Trajectory solve_linear_bvp(const OperatorFamily& family, const BoundaryMap& phi, const ForcingTerm& f,
                            const Vector& y0, const TimeGrid& grid);

/// A sufficient well-posedness test |Phi|_H < bound.
struct SufficientTest {
    bool available = false;
    bool holds = false;
    double bound = 0.0;
    /// bound - |Phi|_H
    double margin = 0.0;
};

/// Which choice of moving coercivity into the shift is optimal.
enum class OptimizedCase { all_into_shift, keep_alpha, partial_shift };
std::string_view to_string(OptimizedCase c);

struct Certificate {
    double tau = 0.0;
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    double cond = 0.0;
    double singular_tol = 0.0;
    Verdict verdict = Verdict::singular;

    /// |Phi| < (1 + 2 alpha kappa tau)^{1/2} e^{-omega tau}
    SufficientTest energy;
    /// |Phi| < e^{alpha* tau}, alpha* the accretivity shift
    SufficientTest accretive;
    /// Optimized exchange of alpha against omega.
    SufficientTest optimized;
    OptimizedCase optimized_case = OptimizedCase::all_into_shift;
    double optimized_bound_as_written = 0.0;

    double norm_phi_h = 0.0;
    double norm_t_h = 0.0;
    double norm_t_v = 0.0;
    double alpha = 0.0;
    double omega = 0.0;
    double c_h = 0.0;
    double accretivity_shift = 0.0;
    double est_error = 0.0;
};

/// Effective constant kappa in the decay estimate (1 + 2 alpha kappa tau)^{-1/2}:
/// c_H when c_H >= 1, c_H^2 otherwise.
double decay_constant(double c_h);

/// (1 + 2 alpha kappa tau)^{-1/2} e^{omega tau}, an upper bound for |T(tau)|_{L(H)}.
double energy_decay_bound(double alpha, double omega, double c_h, double tau);

/// Certificate for a form family (all three sufficient tests available).
Certificate certify(const FormFamily& form, const BoundaryMap& phi, const TimeGrid& grid,
                    std::optional<double> singular_tol = std::nullopt);
/// Certificate for an operator family (only the accretive test is available).
Certificate certify(const OperatorFamily& family, const BoundaryMap& phi, const TimeGrid& grid,
                    std::optional<double> singular_tol = std::nullopt);
/// Same, reusing an already computed T(tau).
Certificate certify(const FormFamily& form, const BoundaryMap& phi, const Propagator& prop,
                    std::optional<double> singular_tol = std::nullopt);
Certificate certify(const OperatorFamily& family, const BoundaryMap& phi, const Propagator& prop,
                    std::optional<double> singular_tol = std::nullopt);

/// Structured text block, one `key = value` per line.
std::string format_certificate(const Certificate& c);

struct NonlinearSolveResult {
    Trajectory trajectory;
    Vector x;
    /// L |T(tau)|_H
    double q = 0.0;
    std::size_t iterations = 0;
    /// |x_{k+1} - x_k|_H per iteration
    std::vector<double> steps;
};

/// Banach iteration for nonlinear Lipschitz Phi; throws NotContractive / NoConvergence.
NonlinearSolveResult solve_nonlinear_phi(const OperatorFamily& family, const BoundaryMap& phi,
                                         const ForcingTerm& f, const TimeGrid& grid, double tol,
                                         std::size_t max_iter);

/// (A(.) - alpha, Phi(e^{-alpha tau} .)). A solution v of the shifted problem with
/// forcing e^{alpha t} f gives the original solution u(t) = e^{-alpha t} v(t).
std::pair<OperatorFamily, BoundaryMap> rescale_shift(const OperatorFamily& family, const BoundaryMap& phi,
                                                      double alpha, double tau);
/// t -> e^{alpha t} f(t)
ForcingTerm rescale_forcing(const ForcingTerm& f, double alpha);
/// Node-wise multiplication by e^{-alpha t}.
Trajectory unscale(const Trajectory& v, double alpha);

}  // namespace evobc
