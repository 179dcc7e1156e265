#pragma once

// u' + A(t) u = F(u), u(0) = Phi u(tau), by Picard iteration around the
// linear boundary solver.

#include "evobc/boundary.hpp"

#include <string>

namespace evobc {

/// Node-wise superposition operator u -> F(t, u) with growth constants.
struct SemilinearSpec {
    std::function<Vector(double, const Vector&)> nonlinearity;
    /// |F(v)|_{L2(H)} <= alpha2 |v|_{L2(H)} + beta1
    double alpha2 = 0.0;
    double beta1 = 0.0;
    std::string name;
};

/// F(u) sampled at the grid nodes of u.
ForcingTerm apply_nonlinearity(const SemilinearSpec& spec, const Trajectory& u);

/// beta1 / (alpha1 c_h^2 - alpha2); throws GrowthTooLarge when the denominator is <= 0.
double apriori_bound(const SemilinearSpec& spec, double alpha1, double c_h);

/// F(u) = a sin(u) + b componentwise. Growth constants are computed in the
/// L2(0,tau; H) norm of the given triple.
SemilinearSpec sin_affine_nonlinearity(double a, double b, const GelfandTriple& triple, double tau);
/// F(u) = a u + b componentwise.
SemilinearSpec affine_nonlinearity(double a, double b, const GelfandTriple& triple, double tau);

struct SemilinearResult {
    Trajectory trajectory;
    std::size_t iterations = 0;
    /// |u_{k+1} - u_k|_{L2(H)} per iteration
    std::vector<double> steps;
    double norm_l2_h = 0.0;
    double bound = 0.0;
    /// Converged iterate exceeds 1.05 * bound.
    bool bound_warning = false;
    double alpha1 = 0.0;
};

/// Throws HypothesisFailed when |Phi|_H > 1 or the form is not coercive,
/// NotWellPosed, GrowthTooLarge, NoConvergence.
SemilinearResult solve_semilinear(const FormFamily& form, const BoundaryMap& phi, const SemilinearSpec& spec,
                                  const TimeGrid& grid, double tol, std::size_t max_iter);

}  // namespace evobc
