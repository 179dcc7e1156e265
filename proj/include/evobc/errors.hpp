#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace evobc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A gram matrix is not symmetric positive definite.
class InvalidSpace : public Error {
public:
    using Error::Error;
};

class InvalidParameter : public Error {
public:
    using Error::Error;
};

/// A time step produced non-finite values.
class IntegrationDiverged : public Error {
public:
    IntegrationDiverged(std::size_t step, double t)
        : Error("integration diverged at step " + std::to_string(step) + " (t = " + std::to_string(t) + ")"),
          step_(step), t_(t) {}
    std::size_t step() const noexcept { return step_; }
    double time() const noexcept { return t_; }

private:
    std::size_t step_;
    double t_;
};

/// exact_autonomous requested for a time-dependent family.
class MethodMismatch : public Error {
public:
    using Error::Error;
};

/// Operation requires a linear boundary map.
class WrongKind : public Error {
public:
    using Error::Error;
};

/// I - Phi T(tau) is numerically singular.
class NotWellPosed : public Error {
public:
    explicit NotWellPosed(double sigma_min)
        : Error("boundary problem is not well-posed: sigma_min = " + std::to_string(sigma_min)),
          sigma_min_(sigma_min) {}
    double sigma_min() const noexcept { return sigma_min_; }

private:
    double sigma_min_;
};

/// Fixed-point map is not a contraction (q >= 1).
class NotContractive : public Error {
public:
    explicit NotContractive(double q)
        : Error("boundary map is not contractive: q = " + std::to_string(q)), q_(q) {}
    double q() const noexcept { return q_; }

private:
    double q_;
};

/// Iteration budget exhausted; carries the best iterate seen.
class NoConvergence : public Error {
public:
    NoConvergence(const std::string& what, Eigen::VectorXd best, double last_step)
        : Error(what), best_(std::move(best)), last_step_(last_step) {}
    const Eigen::VectorXd& best_iterate() const noexcept { return best_; }
    double last_step() const noexcept { return last_step_; }

private:
    Eigen::VectorXd best_;
    double last_step_;
};

/// Nonlinearity grows too fast for the a-priori bound (alpha2 >= alpha1 c_H^2).
class GrowthTooLarge : public Error {
public:
    using Error::Error;
};

class NotElliptic : public Error {
public:
    NotElliptic(double t, double x)
        : Error("coefficient not elliptic at t = " + std::to_string(t) + ", x = " + std::to_string(x)),
          t_(t), x_(x) {}
    double time() const noexcept { return t_; }
    double position() const noexcept { return x_; }

private:
    double t_;
    double x_;
};

class GridMismatch : public Error {
public:
    using Error::Error;
};

/// A precondition required by a check does not hold numerically.
class HypothesisFailed : public Error {
public:
    using Error::Error;
};

}  // namespace evobc
