#pragma once

// Finite-dimensional Gelfand triple V -> H -> V' and the scalar constants
// (embedding, coercivity, continuity, accretivity) extracted from forms on it.
//
// All three spaces share the coordinates of R^n; only the norms differ.
// V' is never materialized: a functional is identified with its Riesz
// vector in H-coordinates.

#include "evobc/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace evobc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Time-dependent matrix t -> M(t).
using MatrixFn = std::function<Matrix(double)>;

/// Relative tolerance for the symmetry test of gram matrices.
inline constexpr double kSymmetryTolerance = 1e-12;

/// Default number of uniform t-samples used to verify uniform-in-t constants.
inline constexpr std::size_t kDefaultTimeSamples = 129;

class GelfandTriple {
public:
    /// Validates symmetry and positive definiteness; throws InvalidSpace.
    static GelfandTriple make(Matrix gram_h, Matrix gram_v);
    static GelfandTriple identity(Index dim);

    Index dim() const noexcept { return state_->gram_h.rows(); }
    const Matrix& gram_h() const noexcept { return state_->gram_h; }
    const Matrix& gram_v() const noexcept { return state_->gram_v; }

    /// Largest c with c |v|_H <= |v|_V.
    double c_h() const noexcept { return state_->c_h; }

    double inner_h(const Vector& x, const Vector& y) const { return y.dot(state_->gram_h * x); }
    double inner_v(const Vector& x, const Vector& y) const { return y.dot(state_->gram_v * x); }
    double norm_h(const Vector& x) const;
    double norm_v(const Vector& x) const;

    /// Cholesky factor L of gram_h = L L^T.
    const Eigen::LLT<Matrix>& chol_h() const noexcept { return state_->chol_h; }
    const Eigen::LLT<Matrix>& chol_v() const noexcept { return state_->chol_v; }

private:
    struct State {
        Matrix gram_h;
        Matrix gram_v;
        Eigen::LLT<Matrix> chol_h;
        Eigen::LLT<Matrix> chol_v;
        double c_h = 1.0;
    };
    explicit GelfandTriple(std::shared_ptr<const State> s) : state_(std::move(s)) {}
    std::shared_ptr<const State> state_;
};

/// Optional split a = a1 + a2 with a1 symmetric, coercive and Lipschitz in t,
/// and a2 bounded by M |v|_V |w|_H.
struct FormDecomposition {
    MatrixFn principal;
    MatrixFn perturbation;
};

/// Sesquilinear form family a(t, v, w) = w^T S(t) v together with its constants.
struct FormFamily {
    GelfandTriple triple;
    MatrixFn eval;
    double bound_m = 0.0;
    double alpha = 1.0;
    double omega = 0.0;
    std::optional<FormDecomposition> decomposition;
    std::optional<double> lipschitz_l;
    bool autonomous = false;

    Index dim() const noexcept { return triple.dim(); }
};

/// H-realization A(t) = gram_h^{-1} S(t) of a form family, or any matrix family.
struct OperatorFamily {
    GelfandTriple triple;
    MatrixFn eval;
    bool autonomous = false;

    Index dim() const noexcept { return triple.dim(); }
};

/// `count` uniformly spaced points covering [0, tau] including both ends.
std::vector<double> uniform_samples(double tau, std::size_t count = kDefaultTimeSamples);

/// Builds a form family and fills M, alpha and omega from the sampled times.
///
/// Without `alpha_target` the family is made coercive (omega = 0) with the
/// largest admissible alpha when that is positive; otherwise alpha = 1 and
/// omega is the smallest shift making the quasi-coercivity inequality hold.
FormFamily make_form_family(GelfandTriple triple, MatrixFn eval, std::span<const double> t_samples,
                            std::optional<double> alpha_target = std::nullopt, bool autonomous = false);

/// Time-independent form S(t) = s.
FormFamily constant_form(GelfandTriple triple, Matrix s, std::optional<double> alpha_target = std::nullopt);

OperatorFamily operator_family(const FormFamily& form);
OperatorFamily constant_operator(GelfandTriple triple, Matrix a);

/// Smallest eigenvalue of sym(a) x = lambda b x via Cholesky reduction.
double min_generalized_eigenvalue(const Matrix& a, const Matrix& b);

double embedding_constant(const GelfandTriple& triple);

struct CoercivityConstants {
    double alpha = 0.0;
    double omega = 0.0;
};

/// Smallest omega >= 0 with Re a(t,v,v) + omega |v|_H^2 >= alpha_target |v|_V^2
/// at every sample.
CoercivityConstants coercivity_constants(const FormFamily& form, double alpha_target,
                                         std::span<const double> t_samples);

/// Largest alpha with Re a(t,v,v) >= alpha |v|_V^2 at every sample (may be <= 0).
double max_coercivity(const FormFamily& form, std::span<const double> t_samples);

/// Continuity constant M = max_t sup |a(t,v,w)| / (|v|_V |w|_V).
double continuity_constant(const FormFamily& form, std::span<const double> t_samples);

/// Largest alpha such that A(t) - alpha is accretive in H at every sample.
double accretivity_shift(const OperatorFamily& ops, std::span<const double> t_samples);

/// Induced norm of T : (R^n, |.|_G) -> (R^n, |.|_G).
double operator_norm_in(const Matrix& t, const Matrix& gram);

/// Bilinear norm sup |w^T s v| / (|v|_G |w|_G).
double form_norm_in(const Matrix& s, const Matrix& gram);

/// max over consecutive samples of |S(t) - S(s)|_V / |t - s|.
double lipschitz_estimate(const GelfandTriple& triple, const MatrixFn& eval, std::span<const double> t_samples);

/// Symmetric part (M + M^T) / 2.
inline Matrix sym(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace evobc
