#pragma once

// Finite models of parabolic problems on (0, l) with Dirichlet ends:
// the Laplacian in its eigenbasis, and P1 finite elements for a
// time-dependent divergence-form operator.

#include "evobc/boundary.hpp"

#include <string>

namespace evobc {

struct DirichletModel {
    std::size_t n_modes = 0;
    double length = 1.0;
    /// (k pi / l)^2, k = 1..n_modes
    Vector eigenvalues;
    FormFamily form;
    OperatorFamily family;

    const GelfandTriple& triple() const noexcept { return form.triple; }
};

/// gram_h = I, gram_v = diag(lambda), a(v, w) = w^T diag(lambda) v.
DirichletModel dirichlet_model(std::size_t n_modes, double length = 1.0);

struct DecayReport {
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false;
};

/// |T(tau)|_{L(V)} against e^{-lambda_1 tau}; pass when lhs <= rhs (1 + 1e-8).
DecayReport v_norm_decay_check(const DirichletModel& model, double tau, std::size_t steps,
                               Method method = Method::exact_autonomous);

/// max_k |sigma_k(T(tau)) - e^{-lambda_k tau}| over the H-singular values.
double singular_value_decay_error(const DirichletModel& model, const TimeGrid& grid);

/// Coefficient (t, x) -> value selected from a small registry.
struct Coefficient {
    std::string name;
    std::vector<double> params;
    std::function<double(double, double)> fn;
    bool time_dependent = false;

    double operator()(double t, double x) const { return fn(t, x); }
};

/// c
Coefficient constant_coefficient(double c);
/// a0 + a1 t
Coefficient affine_t_coefficient(double a0, double a1);
/// a0 + amp sin(pi x) cos(t)
Coefficient oscillating_coefficient(double a0, double amp);
/// Registry lookup by name; throws InvalidParameter for unknown names or arity.
Coefficient make_coefficient(const std::string& name, const std::vector<double>& params);

struct DivergenceSpec {
    std::size_t n_cells = 2;
    Coefficient coeff = constant_coefficient(1.0);
    /// first-order coefficient in c1 v' w
    std::optional<Coefficient> c1;
    /// zeroth-order coefficient in c0 v w
    std::optional<Coefficient> c0;
    /// added to c0
    double omega_shift = 0.0;
    /// Times at which ellipticity and the form constants are sampled.
    double tau = 1.0;
    /// Required lower bound for coeff; defaults to "strictly positive".
    std::optional<double> a_lo;
};

struct DivergenceFormModel {
    DivergenceSpec spec;
    double h = 0.0;
    Matrix mass;
    Matrix unit_stiffness;
    /// Smallest and largest coefficient value seen at quadrature points.
    double a_lo = 0.0;
    double a_hi = 0.0;
    /// First generalized eigenvalue of (unit_stiffness, mass).
    double lambda1_h = 0.0;
    FormFamily form;

    const GelfandTriple& triple() const noexcept { return form.triple; }
    /// Principal part int a v' w' at time t.
    Matrix principal(double t) const;
    /// Lower-order part at time t, including omega_shift.
    Matrix lower_order(double t) const;
};

/// Assembly with 2-point Gauss quadrature per cell and the exact P1 mass matrix.
/// Throws NotElliptic(t, x) when coeff falls below the bound at a quadrature point.
DivergenceFormModel divergence_form_model(const DivergenceSpec& spec);

struct AccretivityReport {
    double shift = 0.0;
    double lambda1_h = 0.0;
    double beta = 0.0;
    /// beta * lambda1_h
    double bound = 0.0;
    bool pass = false;
};

/// accretivity_shift of the model against beta * lambda1_h.
AccretivityReport accretivity_example_check(const DivergenceFormModel& model, double beta);

}  // namespace evobc
