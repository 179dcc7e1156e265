#pragma once

// Time stepping for u' + A(t) u = f on a fixed grid: homogeneous solves,
// the zero-initial-value (Duhamel) solve and the solution map T(tau).

#include "evobc/hilbert.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace evobc {

enum class Method { crank_nicolson, implicit_euler, rk4, exact_autonomous };

std::string_view to_string(Method m);
/// Throws InvalidParameter for unknown names.
Method parse_method(std::string_view name);
/// Convergence order of the scheme (0 for the exact path).
int method_order(Method m);

class TimeGrid {
public:
    /// Nodes must start at 0, be strictly increasing and end at tau > 0.
    TimeGrid(std::vector<double> nodes, Method method = Method::crank_nicolson);
    static TimeGrid uniform(double tau, std::size_t steps, Method method = Method::crank_nicolson);

    double tau() const noexcept { return nodes_.back(); }
    std::size_t steps() const noexcept { return nodes_.size() - 1; }
    const std::vector<double>& nodes() const noexcept { return nodes_; }
    double node(std::size_t i) const { return nodes_[i]; }
    /// Midpoint of step n, the evaluation time of A(t) for crank_nicolson.
    double midpoint(std::size_t n) const { return 0.5 * (nodes_[n] + nodes_[n + 1]); }
    double max_step() const;
    Method method() const noexcept { return method_; }

    TimeGrid with_method(Method m) const { return TimeGrid(nodes_, m); }
    /// Every step split in two.
    TimeGrid refined() const;
    /// Trapezoid weights for integrals over [0, tau].
    std::vector<double> trapezoid_weights() const;

private:
    std::vector<double> nodes_;
    Method method_;
};

/// Right-hand side f of the evolution equation.
class ForcingTerm {
public:
    using Closure = std::function<Vector(double)>;

    static ForcingTerm zero() { return ForcingTerm(Zero{}); }
    static ForcingTerm constant(Vector c) { return ForcingTerm(std::move(c)); }
    /// One vector per grid node.
    static ForcingTerm sampled(std::vector<Vector> samples) { return ForcingTerm(Sampled{std::move(samples)}); }
    static ForcingTerm closure(Closure f) { return ForcingTerm(std::move(f)); }

    bool is_zero() const noexcept { return std::holds_alternative<Zero>(data_); }
    bool is_sampled() const noexcept { return std::holds_alternative<Sampled>(data_); }

    /// Throws GridMismatch when sampled data does not align with the grid.
    void check(const TimeGrid& grid, Index dim) const;

    Vector at_node(const TimeGrid& grid, std::size_t i, Index dim) const;
    /// Value at time t inside step n; sampled data is interpolated linearly.
    Vector within_step(const TimeGrid& grid, std::size_t n, double t, Index dim) const;

    /// s * f
    ForcingTerm scaled(double s) const;
    /// f + other
    ForcingTerm plus(const ForcingTerm& other) const;
    /// t -> g(t) f(t)
    ForcingTerm modulated(std::function<double(double)> g) const;

private:
    struct Zero {};
    struct Sampled {
        std::vector<Vector> values;
    };
    struct Combination {
        std::shared_ptr<const ForcingTerm> a;
        std::shared_ptr<const ForcingTerm> b;
        double scale_a = 1.0;
        double scale_b = 0.0;
    };
    struct Modulated {
        std::shared_ptr<const ForcingTerm> base;
        std::function<double(double)> factor;
    };
    using Data = std::variant<Zero, Vector, Sampled, Closure, Combination, Modulated>;
    explicit ForcingTerm(Data d) : data_(std::move(d)) {}
    Data data_;
};

/// Discrete solution on a grid.
struct Trajectory {
    TimeGrid grid;
    std::vector<Vector> values;
    /// Second-order difference quotients (centered in the interior).
    std::vector<Vector> derivative;
    /// |u' + A u - f|_H at every node (one-sided at the ends).
    std::vector<double> node_residual;
    /// Max of node_residual over interior nodes.
    double residual_eq = 0.0;
    /// |u(0) - Phi(u(tau)) - y0|_H when a boundary condition is attached.
    std::optional<double> residual_bc;

    const Vector& initial() const { return values.front(); }
    const Vector& final() const { return values.back(); }
};

/// Computed solution map T(tau) in H-coordinates.
struct Propagator {
    double tau = 0.0;
    Matrix matrix;
    TimeGrid grid;
    double norm_h = 0.0;
    double norm_v = 0.0;
    /// Richardson estimate of the relative error of T(tau), from one halved-step probe solve.
    double est_error = 0.0;
};

/// Solves u' + A(t) u = f, u(0) = x.
Trajectory evolve(const OperatorFamily& family, const Vector& x, const ForcingTerm& f, const TimeGrid& grid);

/// v' + A(t) v = 0, v(0) = x.
Trajectory evolve_homogeneous(const OperatorFamily& family, const Vector& x, const TimeGrid& grid);

/// w' + A(t) w = f, w(0) = 0.
Trajectory duhamel(const OperatorFamily& family, const ForcingTerm& f, const TimeGrid& grid);

/// Column j is evolve_homogeneous(e_j).values.back(); exact_autonomous uses expm(-tau A).
Propagator propagator_matrix(const OperatorFamily& family, const TimeGrid& grid);

/// Solution map from node `from` to node `to` of the grid (from <= to).
Matrix propagator_between(const OperatorFamily& family, const TimeGrid& grid, std::size_t from, std::size_t to);

/// Three-point difference quotients (one-sided at the ends), second order on any grid.
std::vector<Vector> difference_quotients(const TimeGrid& grid, const std::vector<Vector>& u);

/// Recomputes derivative samples and equation residuals of a trajectory.
void attach_residuals(Trajectory& traj, const OperatorFamily& family, const ForcingTerm& f);

/// Node-wise sum a + b of two trajectories on the same grid.
Trajectory superpose(const Trajectory& a, const Trajectory& b);

/// Trapezoid approximation of (integral |u|_H^2)^{1/2}.
double l2_norm_h(const Trajectory& u, const GelfandTriple& triple);
double l2_norm_v(const Trajectory& u, const GelfandTriple& triple);
/// max_i |u_i|_H
double sup_norm_h(const Trajectory& u, const GelfandTriple& triple);

}  // namespace evobc
