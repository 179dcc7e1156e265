#include "evobc/propagator.hpp"

#include <Eigen/LU>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>

namespace evobc {

std::string_view to_string(Method m) {
    switch (m) {
        case Method::crank_nicolson: return "crank_nicolson";
        case Method::implicit_euler: return "implicit_euler";
        case Method::rk4: return "rk4";
        case Method::exact_autonomous: return "exact_autonomous";
    }
    return "unknown";
}

Method parse_method(std::string_view name) {
    for (Method m : {Method::crank_nicolson, Method::implicit_euler, Method::rk4, Method::exact_autonomous}) {
        if (to_string(m) == name) {
            return m;
        }
    }
    throw InvalidParameter("unknown time-stepping method '" + std::string(name) + "'");
}

int method_order(Method m) {
    switch (m) {
        case Method::crank_nicolson: return 2;
        case Method::implicit_euler: return 1;
        case Method::rk4: return 4;
        case Method::exact_autonomous: return 0;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// TimeGrid

TimeGrid::TimeGrid(std::vector<double> nodes, Method method) : nodes_(std::move(nodes)), method_(method) {
    if (nodes_.size() < 2) {
        throw InvalidParameter("time grid needs at least one step");
    }
    if (nodes_.front() != 0.0) {
        throw InvalidParameter("time grid must start at 0");
    }
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        if (!(nodes_[i] > nodes_[i - 1]) || !std::isfinite(nodes_[i])) {
            throw InvalidParameter("time grid nodes must be finite and strictly increasing");
        }
    }
}

TimeGrid TimeGrid::uniform(double tau, std::size_t steps, Method method) {
    if (!(tau > 0.0) || !std::isfinite(tau)) {
        throw InvalidParameter("tau must be positive and finite");
    }
    if (steps == 0) {
        throw InvalidParameter("a time grid needs at least one step");
    }
    std::vector<double> nodes(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) {
        nodes[i] = tau * static_cast<double>(i) / static_cast<double>(steps);
    }
    nodes.back() = tau;
    return TimeGrid(std::move(nodes), method);
}

double TimeGrid::max_step() const {
    double h = 0.0;
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        h = std::max(h, nodes_[i] - nodes_[i - 1]);
    }
    return h;
}

TimeGrid TimeGrid::refined() const {
    std::vector<double> fine;
    fine.reserve(2 * nodes_.size() - 1);
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
        fine.push_back(nodes_[i]);
        fine.push_back(midpoint(i));
    }
    fine.push_back(nodes_.back());
    return TimeGrid(std::move(fine), method_);
}

std::vector<double> TimeGrid::trapezoid_weights() const {
    std::vector<double> w(nodes_.size(), 0.0);
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
        const double h = nodes_[i + 1] - nodes_[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    return w;
}

// ---------------------------------------------------------------------------
// ForcingTerm

void ForcingTerm::check(const TimeGrid& grid, Index dim) const {
    std::visit(
        [&](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Vector>) {
                if (d.size() != dim) {
                    throw GridMismatch("constant forcing has wrong dimension");
                }
            } else if constexpr (std::is_same_v<T, Sampled>) {
                if (d.values.size() != grid.nodes().size()) {
                    throw GridMismatch("sampled forcing does not match the grid length");
                }
                for (const auto& v : d.values) {
                    if (v.size() != dim) {
                        throw GridMismatch("sampled forcing has wrong dimension");
                    }
                }
            } else if constexpr (std::is_same_v<T, Combination>) {
                d.a->check(grid, dim);
                d.b->check(grid, dim);
            } else if constexpr (std::is_same_v<T, Modulated>) {
                d.base->check(grid, dim);
            }
        },
        data_);
}

Vector ForcingTerm::at_node(const TimeGrid& grid, std::size_t i, Index dim) const {
    return std::visit(
        [&](const auto& d) -> Vector {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Zero>) {
                return Vector::Zero(dim);
            } else if constexpr (std::is_same_v<T, Vector>) {
                return d;
            } else if constexpr (std::is_same_v<T, Sampled>) {
                return d.values.at(i);
            } else if constexpr (std::is_same_v<T, Closure>) {
                return d(grid.node(i));
            } else if constexpr (std::is_same_v<T, Combination>) {
                return d.scale_a * d.a->at_node(grid, i, dim) + d.scale_b * d.b->at_node(grid, i, dim);
            } else {
                return d.factor(grid.node(i)) * d.base->at_node(grid, i, dim);
            }
        },
        data_);
}

Vector ForcingTerm::within_step(const TimeGrid& grid, std::size_t n, double t, Index dim) const {
    return std::visit(
        [&](const auto& d) -> Vector {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Zero>) {
                return Vector::Zero(dim);
            } else if constexpr (std::is_same_v<T, Vector>) {
                return d;
            } else if constexpr (std::is_same_v<T, Sampled>) {
                const double t0 = grid.node(n);
                const double t1 = grid.node(n + 1);
                const double w = (t - t0) / (t1 - t0);
                return (1.0 - w) * d.values.at(n) + w * d.values.at(n + 1);
            } else if constexpr (std::is_same_v<T, Closure>) {
                return d(t);
            } else if constexpr (std::is_same_v<T, Combination>) {
                return d.scale_a * d.a->within_step(grid, n, t, dim) + d.scale_b * d.b->within_step(grid, n, t, dim);
            } else {
                return d.factor(t) * d.base->within_step(grid, n, t, dim);
            }
        },
        data_);
}

ForcingTerm ForcingTerm::scaled(double s) const {
    return ForcingTerm(Combination{std::make_shared<const ForcingTerm>(*this), std::make_shared<const ForcingTerm>(zero()), s, 0.0});
}

ForcingTerm ForcingTerm::plus(const ForcingTerm& other) const {
    return ForcingTerm(Combination{std::make_shared<const ForcingTerm>(*this), std::make_shared<const ForcingTerm>(other), 1.0, 1.0});
}

ForcingTerm ForcingTerm::modulated(std::function<double(double)> g) const {
    return ForcingTerm(Modulated{std::make_shared<const ForcingTerm>(*this), std::move(g)});
}

// ---------------------------------------------------------------------------
// Single-step kernels

namespace {

bool same_step(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

/// One-step map of the chosen scheme. prepare(n) builds the step operators;
/// apply() advances one vector. Propagator columns and single solves go
/// through the same calls, so they agree bitwise.
class Stepper {
public:
    Stepper(const OperatorFamily& family, const TimeGrid& grid) : family_(family), grid_(grid), n_(family.dim()) {
        if (grid.method() == Method::exact_autonomous) {
            a_const_ = require_autonomous(family, grid);
        } else if (family.autonomous) {
            a_const_ = family.eval(0.0);
        }
    }

    void prepare(std::size_t step) {
        step_ = step;
        t0_ = grid_.node(step);
        t1_ = grid_.node(step + 1);
        tm_ = grid_.midpoint(step);
        h_ = t1_ - t0_;
        const Matrix id = Matrix::Identity(n_, n_);
        switch (grid_.method()) {
            case Method::crank_nicolson: {
                if (a_const_ && prepared_ && same_step(h_, cached_h_)) {
                    return;
                }
                const Matrix a = a_const_ ? *a_const_ : family_.eval(tm_);
                check_shape(a);
                lu_.compute(id + 0.5 * h_ * a);
                rhs_ = id - 0.5 * h_ * a;
                break;
            }
            case Method::implicit_euler: {
                if (a_const_ && prepared_ && same_step(h_, cached_h_)) {
                    return;
                }
                const Matrix a = a_const_ ? *a_const_ : family_.eval(t1_);
                check_shape(a);
                lu_.compute(id + h_ * a);
                break;
            }
            case Method::rk4: {
                if (a_const_) {
                    a0_ = am_ = a1_ = *a_const_;
                } else {
                    a0_ = family_.eval(t0_);
                    am_ = family_.eval(tm_);
                    a1_ = family_.eval(t1_);
                }
                check_shape(a0_);
                break;
            }
            case Method::exact_autonomous: {
                if (prepared_ && same_step(h_, cached_h_)) {
                    return;
                }
                // exp(h Z) for Z = [[-A, I, 0], [0, 0, I], [0, 0, 0]] yields
                // E = exp(-hA), P1 = int_0^h e^{-(h-s)A} ds, P2 = int_0^h e^{-(h-s)A} s ds.
                const Index n = n_;
                Matrix z = Matrix::Zero(3 * n, 3 * n);
                z.block(0, 0, n, n) = -h_ * *a_const_;
                z.block(0, n, n, n) = h_ * id;
                z.block(n, 2 * n, n, n) = h_ * id;
                const Matrix ez = z.exp();
                exp_ = ez.block(0, 0, n, n);
                p1_ = ez.block(0, n, n, n);
                p2_ = ez.block(0, 2 * n, n, n);
                break;
            }
        }
        prepared_ = true;
        cached_h_ = h_;
    }

    /// Homogeneous step.
    Vector apply(const Vector& u) const {
        switch (grid_.method()) {
            case Method::crank_nicolson: return lu_.solve(rhs_ * u);
            case Method::implicit_euler: return lu_.solve(u);
            case Method::rk4: {
                const Vector k1 = -(a0_ * u);
                const Vector k2 = -(am_ * (u + 0.5 * h_ * k1));
                const Vector k3 = -(am_ * (u + 0.5 * h_ * k2));
                const Vector k4 = -(a1_ * (u + h_ * k3));
                return u + (h_ / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
            case Method::exact_autonomous: return exp_ * u;
        }
        return u;
    }

    /// Forced step.
    Vector apply(const Vector& u, const ForcingTerm& f) const {
        if (f.is_zero()) {
            return apply(u);
        }
        const Vector f0 = f.at_node(grid_, step_, n_);
        const Vector f1 = f.at_node(grid_, step_ + 1, n_);
        switch (grid_.method()) {
            case Method::crank_nicolson: return lu_.solve(rhs_ * u + 0.5 * h_ * (f0 + f1));
            case Method::implicit_euler: return lu_.solve(u + h_ * f1);
            case Method::rk4: {
                const Vector fm = f.within_step(grid_, step_, tm_, n_);
                const Vector k1 = f0 - a0_ * u;
                const Vector k2 = fm - am_ * (u + 0.5 * h_ * k1);
                const Vector k3 = fm - am_ * (u + 0.5 * h_ * k2);
                const Vector k4 = f1 - a1_ * (u + h_ * k3);
                return u + (h_ / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
            case Method::exact_autonomous: return exp_ * u + p1_ * f0 + p2_ * ((f1 - f0) / h_);
        }
        return u;
    }

    double t1() const noexcept { return t1_; }

    static Matrix require_autonomous(const OperatorFamily& family, const TimeGrid& grid) {
        Matrix a0 = family.eval(0.0);
        if (family.autonomous) {
            return a0;
        }
        const double scale = std::max(1.0, a0.cwiseAbs().maxCoeff());
        for (std::size_t i = 0; i < grid.nodes().size(); ++i) {
            const double t = grid.node(i);
            const double diff = (family.eval(t) - a0).cwiseAbs().maxCoeff();
            if (diff > 1e-14 * scale) {
                throw MethodMismatch("exact_autonomous requested for a time-dependent family");
            }
        }
        return a0;
    }

private:
    void check_shape(const Matrix& a) const {
        if (a.rows() != n_ || a.cols() != n_) {
            throw InvalidParameter("operator matrix does not match the family dimension");
        }
    }

    const OperatorFamily& family_;
    const TimeGrid& grid_;
    Index n_;
    std::optional<Matrix> a_const_;
    std::size_t step_ = 0;
    double t0_ = 0.0, t1_ = 0.0, tm_ = 0.0, h_ = 0.0;
    bool prepared_ = false;
    double cached_h_ = 0.0;
    Eigen::PartialPivLU<Matrix> lu_;
    Matrix rhs_, a0_, am_, a1_, exp_, p1_, p2_;
};

void check_finite(const Vector& v, std::size_t step, double t) {
    if (!v.allFinite()) {
        throw IntegrationDiverged(step, t);
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Solves

Trajectory evolve(const OperatorFamily& family, const Vector& x, const ForcingTerm& f, const TimeGrid& grid) {
    const Index n = family.dim();
    if (x.size() != n) {
        throw InvalidParameter("initial value has wrong dimension");
    }
    f.check(grid, n);
    Trajectory traj{grid};
    traj.values.reserve(grid.nodes().size());
    traj.values.push_back(x);
    Stepper stepper(family, grid);
    for (std::size_t s = 0; s < grid.steps(); ++s) {
        stepper.prepare(s);
        Vector next = stepper.apply(traj.values.back(), f);
        check_finite(next, s, stepper.t1());
        traj.values.push_back(std::move(next));
    }
    attach_residuals(traj, family, f);
    return traj;
}

Trajectory evolve_homogeneous(const OperatorFamily& family, const Vector& x, const TimeGrid& grid) {
    return evolve(family, x, ForcingTerm::zero(), grid);
}

Trajectory duhamel(const OperatorFamily& family, const ForcingTerm& f, const TimeGrid& grid) {
    return evolve(family, Vector::Zero(family.dim()), f, grid);
}

Matrix propagator_between(const OperatorFamily& family, const TimeGrid& grid, std::size_t from, std::size_t to) {
    if (from > to || to > grid.steps()) {
        throw InvalidParameter("propagator_between: invalid node range");
    }
    const Index n = family.dim();
    std::vector<Vector> cols;
    cols.reserve(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j) {
        cols.push_back(Vector::Unit(n, j));
    }
    Stepper stepper(family, grid);
    for (std::size_t s = from; s < to; ++s) {
        stepper.prepare(s);
        for (auto& c : cols) {
            c = stepper.apply(c);
            check_finite(c, s, stepper.t1());
        }
    }
    Matrix m(n, n);
    for (Index j = 0; j < n; ++j) {
        m.col(j) = cols[static_cast<std::size_t>(j)];
    }
    return m;
}

Propagator propagator_matrix(const OperatorFamily& family, const TimeGrid& grid) {
    Propagator p{grid.tau(), Matrix(), grid};
    const auto& triple = family.triple;
    if (grid.method() == Method::exact_autonomous) {
        const Matrix a = Stepper::require_autonomous(family, grid);
        p.matrix = (-grid.tau() * a).exp();
        p.est_error = 0.0;
    } else {
        p.matrix = propagator_between(family, grid, 0, grid.steps());
        // Richardson indicator on one probe vector.
        const Index n = family.dim();
        Vector probe = Vector::Ones(n);
        probe /= triple.norm_h(probe);
        const Vector coarse = p.matrix * probe;
        const TimeGrid fine_grid = grid.refined();
        const Vector fine = evolve_homogeneous(family, probe, fine_grid).final();
        // coarse - fine = (1 - 2^{-p}) e_coarse to leading order.
        const double factor = 1.0 - std::pow(2.0, -method_order(grid.method()));
        p.est_error = triple.norm_h(coarse - fine) / factor;
    }
    if (!p.matrix.allFinite()) {
        throw IntegrationDiverged(grid.steps(), grid.tau());
    }
    p.norm_h = operator_norm_in(p.matrix, triple.gram_h());
    p.norm_v = operator_norm_in(p.matrix, triple.gram_v());
    return p;
}

// ---------------------------------------------------------------------------
// Trajectory utilities

std::vector<Vector> difference_quotients(const TimeGrid& grid, const std::vector<Vector>& u) {
    const auto& t = grid.nodes();
    const std::size_t count = t.size();
    if (u.size() != count) {
        throw GridMismatch("difference_quotients: value count does not match the grid");
    }
    std::vector<Vector> d(count);
    if (count == 2) {
        d[0] = (u[1] - u[0]) / (t[1] - t[0]);
        d[1] = d[0];
        return d;
    }
    for (std::size_t i = 1; i + 1 < count; ++i) {
        const double h1 = t[i] - t[i - 1];
        const double h2 = t[i + 1] - t[i];
        d[i] = (-h2 / (h1 * (h1 + h2))) * u[i - 1] + ((h2 - h1) / (h1 * h2)) * u[i] +
               (h1 / (h2 * (h1 + h2))) * u[i + 1];
    }
    {
        const double h1 = t[1] - t[0];
        const double h2 = t[2] - t[1];
        d[0] = (-(2.0 * h1 + h2) / (h1 * (h1 + h2))) * u[0] + ((h1 + h2) / (h1 * h2)) * u[1] -
               (h1 / (h2 * (h1 + h2))) * u[2];
    }
    {
        const std::size_t e = count - 1;
        const double h1 = t[e] - t[e - 1];
        const double h2 = t[e - 1] - t[e - 2];
        d[e] = ((2.0 * h1 + h2) / (h1 * (h1 + h2))) * u[e] - ((h1 + h2) / (h1 * h2)) * u[e - 1] +
               (h1 / (h2 * (h1 + h2))) * u[e - 2];
    }
    return d;
}

void attach_residuals(Trajectory& traj, const OperatorFamily& family, const ForcingTerm& f) {
    const auto& t = traj.grid.nodes();
    const std::size_t count = t.size();
    const auto& u = traj.values;
    const Index n = family.dim();
    traj.derivative = difference_quotients(traj.grid, u);
    traj.node_residual.assign(count, 0.0);
    const Matrix a_const = family.autonomous ? family.eval(0.0) : Matrix();
    for (std::size_t i = 0; i < count; ++i) {
        const Matrix a = family.autonomous ? a_const : family.eval(t[i]);
        const Vector r = traj.derivative[i] + a * u[i] - f.at_node(traj.grid, i, n);
        traj.node_residual[i] = family.triple.norm_h(r);
    }
    double worst = 0.0;
    if (count == 2) {
        worst = std::max(traj.node_residual[0], traj.node_residual[1]);
    } else {
        for (std::size_t i = 1; i + 1 < count; ++i) {
            worst = std::max(worst, traj.node_residual[i]);
        }
    }
    traj.residual_eq = worst;
}

Trajectory superpose(const Trajectory& a, const Trajectory& b) {
    if (a.values.size() != b.values.size() || a.grid.nodes() != b.grid.nodes()) {
        throw GridMismatch("superpose: trajectories live on different grids");
    }
    Trajectory out{a.grid};
    out.values.reserve(a.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        out.values.push_back(a.values[i] + b.values[i]);
    }
    return out;
}

double l2_norm_h(const Trajectory& u, const GelfandTriple& triple) {
    const auto w = u.grid.trapezoid_weights();
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        s += w[i] * triple.inner_h(u.values[i], u.values[i]);
    }
    return std::sqrt(s);
}

double l2_norm_v(const Trajectory& u, const GelfandTriple& triple) {
    const auto w = u.grid.trapezoid_weights();
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        s += w[i] * triple.inner_v(u.values[i], u.values[i]);
    }
    return std::sqrt(s);
}

double sup_norm_h(const Trajectory& u, const GelfandTriple& triple) {
    double s = 0.0;
    for (const auto& v : u.values) {
        s = std::max(s, triple.norm_h(v));
    }
    return s;
}

}  // namespace evobc
