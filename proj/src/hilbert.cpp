#include "evobc/hilbert.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace evobc {

namespace {

Matrix checked_gram(Matrix g, const char* name) {
    if (g.rows() == 0 || g.rows() != g.cols()) {
        throw InvalidSpace(std::string(name) + " must be a nonempty square matrix");
    }
    if (!g.allFinite()) {
        throw InvalidSpace(std::string(name) + " has non-finite entries");
    }
    const double scale = g.cwiseAbs().maxCoeff();
    const double asym = (g - g.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymmetryTolerance * scale) {
        throw InvalidSpace(std::string(name) + " is not symmetric");
    }
    return sym(g);
}

Eigen::LLT<Matrix> checked_cholesky(const Matrix& g, const char* name) {
    Eigen::LLT<Matrix> llt(g);
    if (llt.info() != Eigen::Success) {
        throw InvalidSpace(std::string(name) + " is not positive definite");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
    if (!(es.eigenvalues().minCoeff() > 0.0)) {
        throw InvalidSpace(std::string(name) + " is not positive definite");
    }
    return llt;
}

// L^T M L^{-T} for gram = L L^T.
Matrix to_euclidean(const Matrix& m, const Eigen::LLT<Matrix>& llt) {
    const Matrix l = llt.matrixL();
    Matrix lt_m = l.transpose() * m;
    // X = lt_m * L^{-T}  <=>  X L^T = lt_m  <=>  L X^T = lt_m^T
    Matrix xt = llt.matrixL().solve(lt_m.transpose());
    return xt.transpose();
}

double largest_singular_value(const Matrix& m) {
    if (m.size() == 0) {
        return 0.0;
    }
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

}  // namespace

GelfandTriple GelfandTriple::make(Matrix gram_h, Matrix gram_v) {
    auto state = std::make_shared<State>();
    state->gram_h = checked_gram(std::move(gram_h), "gram_h");
    state->gram_v = checked_gram(std::move(gram_v), "gram_v");
    if (state->gram_h.rows() != state->gram_v.rows()) {
        throw InvalidSpace("gram_h and gram_v differ in dimension");
    }
    state->chol_h = checked_cholesky(state->gram_h, "gram_h");
    state->chol_v = checked_cholesky(state->gram_v, "gram_v");
    state->c_h = std::sqrt(min_generalized_eigenvalue(state->gram_v, state->gram_h));
    return GelfandTriple(std::move(state));
}

GelfandTriple GelfandTriple::identity(Index dim) {
    return make(Matrix::Identity(dim, dim), Matrix::Identity(dim, dim));
}

double GelfandTriple::norm_h(const Vector& x) const {
    return std::sqrt(std::max(0.0, inner_h(x, x)));
}

double GelfandTriple::norm_v(const Vector& x) const {
    return std::sqrt(std::max(0.0, inner_v(x, x)));
}

std::vector<double> uniform_samples(double tau, std::size_t count) {
    if (count < 2) {
        return {0.0, tau};
    }
    std::vector<double> t(count);
    for (std::size_t i = 0; i < count; ++i) {
        t[i] = tau * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    t.back() = tau;
    return t;
}

double min_generalized_eigenvalue(const Matrix& a, const Matrix& b) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(sym(a), sym(b), Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
    if (es.info() != Eigen::Success) {
        throw InvalidSpace("generalized eigenproblem failed (indefinite right-hand gram?)");
    }
    return es.eigenvalues().minCoeff();
}

double embedding_constant(const GelfandTriple& triple) {
    return std::sqrt(min_generalized_eigenvalue(triple.gram_v(), triple.gram_h()));
}

FormFamily make_form_family(GelfandTriple triple, MatrixFn eval, std::span<const double> t_samples,
                            std::optional<double> alpha_target, bool autonomous) {
    FormFamily form{std::move(triple), std::move(eval)};
    form.autonomous = autonomous;
    const Matrix s0 = form.eval(t_samples.empty() ? 0.0 : t_samples.front());
    if (s0.rows() != form.dim() || s0.cols() != form.dim()) {
        throw InvalidParameter("form matrix does not match the triple dimension");
    }
    form.bound_m = continuity_constant(form, t_samples);
    if (alpha_target) {
        const auto c = coercivity_constants(form, *alpha_target, t_samples);
        form.alpha = c.alpha;
        form.omega = c.omega;
    } else {
        const double amax = max_coercivity(form, t_samples);
        if (amax > 0.0) {
            form.alpha = amax;
            form.omega = 0.0;
        } else {
            const auto c = coercivity_constants(form, 1.0, t_samples);
            form.alpha = c.alpha;
            form.omega = c.omega;
        }
    }
    return form;
}

FormFamily constant_form(GelfandTriple triple, Matrix s, std::optional<double> alpha_target) {
    const double t0[] = {0.0};
    return make_form_family(
        std::move(triple), [s = std::move(s)](double) { return s; }, t0, alpha_target, true);
}

OperatorFamily operator_family(const FormFamily& form) {
    auto llt = std::make_shared<const Eigen::LLT<Matrix>>(form.triple.chol_h());
    MatrixFn s = form.eval;
    return OperatorFamily{form.triple, [llt, s](double t) -> Matrix { return llt->solve(s(t)); },
                          form.autonomous};
}

OperatorFamily constant_operator(GelfandTriple triple, Matrix a) {
    if (a.rows() != triple.dim() || a.cols() != triple.dim()) {
        throw InvalidParameter("operator matrix does not match the triple dimension");
    }
    return OperatorFamily{std::move(triple), [a = std::move(a)](double) { return a; }, true};
}

CoercivityConstants coercivity_constants(const FormFamily& form, double alpha_target,
                                         std::span<const double> t_samples) {
    if (!(alpha_target > 0.0)) {
        throw InvalidParameter("alpha_target must be positive");
    }
    double omega = 0.0;
    const Matrix& gv = form.triple.gram_v();
    const Matrix& gh = form.triple.gram_h();
    for (double t : t_samples) {
        const Matrix shifted = sym(form.eval(t)) - alpha_target * gv;
        omega = std::max(omega, -min_generalized_eigenvalue(shifted, gh));
    }
    return {alpha_target, omega};
}

double max_coercivity(const FormFamily& form, std::span<const double> t_samples) {
    double alpha = std::numeric_limits<double>::infinity();
    for (double t : t_samples) {
        alpha = std::min(alpha, min_generalized_eigenvalue(form.eval(t), form.triple.gram_v()));
    }
    return alpha;
}

double continuity_constant(const FormFamily& form, std::span<const double> t_samples) {
    double m = 0.0;
    for (double t : t_samples) {
        m = std::max(m, form_norm_in(form.eval(t), form.triple.gram_v()));
    }
    return m;
}

double accretivity_shift(const OperatorFamily& ops, std::span<const double> t_samples) {
    // Herm_H(A) has the same spectrum as the pencil (sym(G_H A), G_H).
    double shift = std::numeric_limits<double>::infinity();
    const Matrix& gh = ops.triple.gram_h();
    for (double t : t_samples) {
        shift = std::min(shift, min_generalized_eigenvalue(gh * ops.eval(t), gh));
    }
    return shift;
}

double operator_norm_in(const Matrix& t, const Matrix& gram) {
    if (t.rows() != gram.rows() || t.cols() != gram.cols()) {
        throw InvalidParameter("operator_norm_in: shape mismatch");
    }
    Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success) {
        throw InvalidSpace("operator_norm_in: gram is not positive definite");
    }
    return largest_singular_value(to_euclidean(t, llt));
}

double form_norm_in(const Matrix& s, const Matrix& gram) {
    Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success) {
        throw InvalidSpace("form_norm_in: gram is not positive definite");
    }
    // L^{-1} S L^{-T}
    Matrix y = llt.matrixL().solve(s);
    Matrix z = llt.matrixL().solve(y.transpose());
    return largest_singular_value(z);
}

double lipschitz_estimate(const GelfandTriple& triple, const MatrixFn& eval, std::span<const double> t_samples) {
    double l = 0.0;
    for (std::size_t i = 1; i < t_samples.size(); ++i) {
        const double dt = t_samples[i] - t_samples[i - 1];
        if (dt <= 0.0) {
            continue;
        }
        l = std::max(l, form_norm_in(eval(t_samples[i]) - eval(t_samples[i - 1]), triple.gram_v()) / dt);
    }
    return l;
}

}  // namespace evobc
