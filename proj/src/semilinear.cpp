#include "evobc/semilinear.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace evobc {

ForcingTerm apply_nonlinearity(const SemilinearSpec& spec, const Trajectory& u) {
    std::vector<Vector> samples;
    samples.reserve(u.values.size());
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        samples.push_back(spec.nonlinearity(u.grid.node(i), u.values[i]));
    }
    return ForcingTerm::sampled(std::move(samples));
}

double apriori_bound(const SemilinearSpec& spec, double alpha1, double c_h) {
    const double denom = alpha1 * c_h * c_h - spec.alpha2;
    if (!(denom > 0.0)) {
        throw GrowthTooLarge("alpha2 = " + std::to_string(spec.alpha2) + " is not below alpha1 c_H^2 = " +
                             std::to_string(alpha1 * c_h * c_h));
    }
    return spec.beta1 / denom;
}

namespace {

// Ratio sqrt(lambda_max / lambda_min) of gram_h: converts a Euclidean
// Lipschitz constant into one for |.|_H.
double gram_distortion(const GelfandTriple& triple) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(triple.gram_h(), Eigen::EigenvaluesOnly);
    const Vector ev = es.eigenvalues();
    return std::sqrt(ev.maxCoeff() / ev.minCoeff());
}

double constant_term(double b, const GelfandTriple& triple, double tau) {
    return std::abs(b) * triple.norm_h(Vector::Ones(triple.dim())) * std::sqrt(tau);
}

}  // namespace

SemilinearSpec sin_affine_nonlinearity(double a, double b, const GelfandTriple& triple, double tau) {
    SemilinearSpec s;
    s.nonlinearity = [a, b](double, const Vector& u) -> Vector {
        return (a * u.array().sin() + b).matrix();
    };
    s.alpha2 = std::abs(a) * gram_distortion(triple);
    s.beta1 = constant_term(b, triple, tau);
    s.name = "sin_affine";
    return s;
}

SemilinearSpec affine_nonlinearity(double a, double b, const GelfandTriple& triple, double tau) {
    SemilinearSpec s;
    s.nonlinearity = [a, b](double, const Vector& u) -> Vector { return (a * u.array() + b).matrix(); };
    s.alpha2 = std::abs(a);
    s.beta1 = constant_term(b, triple, tau);
    s.name = "affine";
    return s;
}

SemilinearResult solve_semilinear(const FormFamily& form, const BoundaryMap& phi, const SemilinearSpec& spec,
                                  const TimeGrid& grid, double tol, std::size_t max_iter) {
    if (!(tol > 0.0)) {
        throw InvalidParameter("tol must be positive");
    }
    const auto& triple = form.triple;
    const double norm_phi = phi.norm_h(triple);
    if (norm_phi > 1.0 + 1e-12) {
        throw HypothesisFailed("semilinear solve requires |Phi|_H <= 1, got " + std::to_string(norm_phi));
    }
    const auto samples = uniform_samples(grid.tau());
    const double alpha1 = max_coercivity(form, samples);
    if (!(alpha1 > 0.0)) {
        throw HypothesisFailed("semilinear solve requires a coercive form (omega = 0)");
    }

    SemilinearResult r{Trajectory{grid}};
    r.alpha1 = alpha1;
    r.bound = apriori_bound(spec, alpha1, triple.c_h());

    const LinearBoundarySolver solver(operator_family(form), phi, grid);
    if (solver.verdict() == Verdict::singular) {
        throw NotWellPosed(solver.sigma_min());
    }

    Trajectory u{grid};
    u.values.assign(grid.nodes().size(), Vector::Zero(form.dim()));
    double last_step = std::numeric_limits<double>::infinity();
    bool converged = false;
    for (std::size_t k = 0; k < max_iter; ++k) {
        Trajectory next = solver.solve(apply_nonlinearity(spec, u));
        Trajectory diff{grid};
        diff.values.reserve(u.values.size());
        for (std::size_t i = 0; i < u.values.size(); ++i) {
            diff.values.push_back(next.values[i] - u.values[i]);
        }
        last_step = l2_norm_h(diff, triple);
        if (!std::isfinite(last_step)) {
            throw IntegrationDiverged(k, grid.tau());
        }
        r.steps.push_back(last_step);
        ++r.iterations;
        u = std::move(next);
        if (last_step <= tol && u.residual_bc.value_or(0.0) <= tol) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw NoConvergence("semilinear Picard iteration did not converge", u.initial(), last_step);
    }
    // Residuals against the full semilinear equation, not the last linear one.
    attach_residuals(u, operator_family(form), apply_nonlinearity(spec, u));
    r.norm_l2_h = l2_norm_h(u, triple);
    r.bound_warning = r.norm_l2_h > 1.05 * r.bound;
    r.trajectory = std::move(u);
    return r;
}

}  // namespace evobc
