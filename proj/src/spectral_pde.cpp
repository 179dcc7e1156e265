#include "evobc/spectral_pde.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

namespace evobc {

DirichletModel dirichlet_model(std::size_t n_modes, double length) {
    if (n_modes < 1) {
        throw InvalidParameter("dirichlet model needs at least one mode");
    }
    if (!(length > 0.0) || !std::isfinite(length)) {
        throw InvalidParameter("dirichlet model length must be positive");
    }
    const Index n = static_cast<Index>(n_modes);
    Vector eigenvalues(n);
    for (Index k = 0; k < n; ++k) {
        const double w = static_cast<double>(k + 1) * std::numbers::pi / length;
        eigenvalues(k) = w * w;
    }
    const Matrix s = eigenvalues.asDiagonal();
    FormFamily form{GelfandTriple::make(Matrix::Identity(n, n), s), [s](double) { return s; }};
    form.alpha = 1.0;
    form.omega = 0.0;
    form.bound_m = 1.0;
    form.decomposition = FormDecomposition{[s](double) { return s; },
                                           [n](double) -> Matrix { return Matrix::Zero(n, n); }};
    form.lipschitz_l = 0.0;
    form.autonomous = true;
    DirichletModel m{n_modes, length, eigenvalues, form, operator_family(form)};
    return m;
}

DecayReport v_norm_decay_check(const DirichletModel& model, double tau, std::size_t steps, Method method) {
    DecayReport r;
    r.rhs = std::exp(-model.eigenvalues(0) * tau);
    if (tau == 0.0) {
        r.lhs = 1.0;
    } else {
        const Propagator p = propagator_matrix(model.family, TimeGrid::uniform(tau, steps, method));
        r.lhs = p.norm_v;
    }
    r.pass = r.lhs <= r.rhs * (1.0 + 1e-8);
    return r;
}

double singular_value_decay_error(const DirichletModel& model, const TimeGrid& grid) {
    const Propagator p = propagator_matrix(model.family, grid);
    // gram_h = I, so H-singular values are the plain ones.
    Eigen::JacobiSVD<Matrix> svd(p.matrix);
    const Vector sv = svd.singularValues();
    double worst = 0.0;
    for (Index k = 0; k < sv.size(); ++k) {
        worst = std::max(worst, std::abs(sv(k) - std::exp(-model.eigenvalues(k) * grid.tau())));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Coefficients

Coefficient constant_coefficient(double c) {
    return Coefficient{"constant", {c}, [c](double, double) { return c; }, false};
}

Coefficient affine_t_coefficient(double a0, double a1) {
    return Coefficient{"affine_t", {a0, a1}, [a0, a1](double t, double) { return a0 + a1 * t; }, a1 != 0.0};
}

Coefficient oscillating_coefficient(double a0, double amp) {
    return Coefficient{"oscillating",
                       {a0, amp},
                       [a0, amp](double t, double x) { return a0 + amp * std::sin(std::numbers::pi * x) * std::cos(t); },
                       amp != 0.0};
}

Coefficient make_coefficient(const std::string& name, const std::vector<double>& params) {
    auto need = [&](std::size_t k) {
        if (params.size() != k) {
            throw InvalidParameter("coefficient '" + name + "' takes " + std::to_string(k) + " parameter(s)");
        }
    };
    if (name == "constant") {
        need(1);
        return constant_coefficient(params[0]);
    }
    if (name == "affine_t") {
        need(2);
        return affine_t_coefficient(params[0], params[1]);
    }
    if (name == "oscillating") {
        need(2);
        return oscillating_coefficient(params[0], params[1]);
    }
    throw InvalidParameter("unknown coefficient '" + name + "' (constant, affine_t, oscillating)");
}

// ---------------------------------------------------------------------------
// Divergence-form model

namespace {

struct Quadrature {
    double x[2];
    double w[2];
};

Quadrature gauss2(double left, double h) {
    const double mid = left + 0.5 * h;
    const double d = 0.5 * h / std::sqrt(3.0);
    return Quadrature{{mid - d, mid + d}, {0.5 * h, 0.5 * h}};
}

// Local P1 basis on [left, left + h]: phi_0 = 1 - s, phi_1 = s.
void basis(double x, double left, double h, double phi[2]) {
    const double s = (x - left) / h;
    phi[0] = 1.0 - s;
    phi[1] = s;
}

// Global interior index of local node j in cell c, or -1 on the boundary.
Index global_index(std::size_t c, int j, std::size_t n_cells) {
    const std::size_t node = c + static_cast<std::size_t>(j);
    if (node == 0 || node == n_cells) {
        return -1;
    }
    return static_cast<Index>(node) - 1;
}

template <typename Local>
Matrix assemble(std::size_t n_cells, Local local) {
    const Index n = static_cast<Index>(n_cells) - 1;
    Matrix m = Matrix::Zero(n, n);
    const double h = 1.0 / static_cast<double>(n_cells);
    for (std::size_t c = 0; c < n_cells; ++c) {
        const double left = static_cast<double>(c) * h;
        double k[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
        local(left, h, k);
        for (int i = 0; i < 2; ++i) {
            const Index gi = global_index(c, i, n_cells);
            if (gi < 0) {
                continue;
            }
            for (int j = 0; j < 2; ++j) {
                const Index gj = global_index(c, j, n_cells);
                if (gj >= 0) {
                    m(gi, gj) += k[i][j];
                }
            }
        }
    }
    return m;
}

}  // namespace

Matrix DivergenceFormModel::principal(double t) const {
    const auto& a = spec.coeff;
    return assemble(spec.n_cells, [&](double left, double hc, double k[2][2]) {
        const Quadrature q = gauss2(left, hc);
        const double dphi[2] = {-1.0 / hc, 1.0 / hc};
        for (int p = 0; p < 2; ++p) {
            const double v = q.w[p] * a(t, q.x[p]);
            for (int i = 0; i < 2; ++i) {
                for (int j = 0; j < 2; ++j) {
                    k[i][j] += v * dphi[j] * dphi[i];
                }
            }
        }
    });
}

Matrix DivergenceFormModel::lower_order(double t) const {
    return assemble(spec.n_cells, [&](double left, double hc, double k[2][2]) {
        const Quadrature q = gauss2(left, hc);
        const double dphi[2] = {-1.0 / hc, 1.0 / hc};
        for (int p = 0; p < 2; ++p) {
            double phi[2];
            basis(q.x[p], left, hc, phi);
            const double c1 = spec.c1 ? (*spec.c1)(t, q.x[p]) : 0.0;
            const double c0 = (spec.c0 ? (*spec.c0)(t, q.x[p]) : 0.0) + spec.omega_shift;
            for (int i = 0; i < 2; ++i) {
                for (int j = 0; j < 2; ++j) {
                    // row i tests with phi_i, column j is the trial function
                    k[i][j] += q.w[p] * (c1 * dphi[j] * phi[i] + c0 * phi[j] * phi[i]);
                }
            }
        }
    });
}

DivergenceFormModel divergence_form_model(const DivergenceSpec& spec) {
    if (spec.n_cells < 2) {
        throw InvalidParameter("divergence model needs at least 2 cells");
    }
    if (!(spec.tau > 0.0)) {
        throw InvalidParameter("divergence model sampling horizon must be positive");
    }
    const double h = 1.0 / static_cast<double>(spec.n_cells);
    const auto samples = uniform_samples(spec.tau);
    const bool time_dependent = spec.coeff.time_dependent || (spec.c1 && spec.c1->time_dependent) ||
                                (spec.c0 && spec.c0->time_dependent);
    double a_lo = std::numeric_limits<double>::infinity();
    double a_hi = -std::numeric_limits<double>::infinity();
    for (double t : samples) {
        for (std::size_t c = 0; c < spec.n_cells; ++c) {
            const Quadrature q = gauss2(static_cast<double>(c) * h, h);
            for (double x : q.x) {
                const double a = spec.coeff(t, x);
                const bool ok = spec.a_lo ? (a >= *spec.a_lo && *spec.a_lo > 0.0) : a > 0.0;
                if (!ok || !std::isfinite(a)) {
                    throw NotElliptic(t, x);
                }
                a_lo = std::min(a_lo, a);
                a_hi = std::max(a_hi, a);
            }
        }
        if (!time_dependent) {
            break;
        }
    }

    const Matrix mass = assemble(spec.n_cells, [](double, double hc, double k[2][2]) {
        k[0][0] = k[1][1] = hc / 3.0;
        k[0][1] = k[1][0] = hc / 6.0;
    });
    const Matrix stiffness = assemble(spec.n_cells, [](double, double hc, double k[2][2]) {
        k[0][0] = k[1][1] = 1.0 / hc;
        k[0][1] = k[1][0] = -1.0 / hc;
    });
    auto triple = GelfandTriple::make(mass, mass + stiffness);

    // The closures below hold their own copy of the assembly data.
    auto shared = std::make_shared<DivergenceFormModel>(DivergenceFormModel{
        spec, h, mass, stiffness, a_lo, a_hi, 0.0, FormFamily{triple, nullptr}});
    MatrixFn eval = [shared](double t) -> Matrix { return shared->principal(t) + shared->lower_order(t); };
    FormFamily form = make_form_family(triple, eval, samples, std::nullopt, !time_dependent);
    form.decomposition = FormDecomposition{[shared](double t) { return shared->principal(t); },
                                           [shared](double t) { return shared->lower_order(t); }};
    form.lipschitz_l = lipschitz_estimate(triple, form.decomposition->principal, samples);

    DivergenceFormModel m = *shared;
    m.lambda1_h = min_generalized_eigenvalue(stiffness, mass);
    m.form = std::move(form);
    return m;
}

AccretivityReport accretivity_example_check(const DivergenceFormModel& model, double beta) {
    AccretivityReport r;
    r.beta = beta;
    r.lambda1_h = model.lambda1_h;
    r.bound = beta * model.lambda1_h;
    r.shift = accretivity_shift(operator_family(model.form), uniform_samples(model.spec.tau));
    r.pass = r.shift >= r.bound - 1e-10;
    return r;
}

}  // namespace evobc
