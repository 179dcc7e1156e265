#include "evobc/verify.hpp"

#include "evobc/csv.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace evobc {

bool CheckReport::observe(double margin) {
    ++trials;
    if (std::isnan(margin)) {
        margin = -std::numeric_limits<double>::infinity();
    }
    if (margin < worst_margin) {
        worst_margin = margin;
        return true;
    }
    return false;
}

void CheckReport::finish() {
    if (trials == 0 || rows.empty()) {
        worst_margin = -std::numeric_limits<double>::infinity();
    }
    pass = worst_margin >= -tolerance;
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t index) {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(seed ^ mix(index));
}

Vector Rng::normal_vector(Index n) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) {
        v(i) = normal();
    }
    return v;
}

Matrix Rng::normal_matrix(Index r, Index c) {
    Matrix m(r, c);
    for (Index j = 0; j < c; ++j) {
        for (Index i = 0; i < r; ++i) {
            m(i, j) = normal();
        }
    }
    return m;
}

namespace {

std::string num(double v) { return format_double(v); }
std::string num(std::size_t v) { return std::to_string(v); }
std::string flag(bool b) { return b ? "true" : "false"; }

Vector unit_h(const Vector& x, const GelfandTriple& triple) {
    const double n = triple.norm_h(x);
    return n > 0.0 ? Vector(x / n) : x;
}

std::string dirichlet_config(std::size_t n_modes, const std::string& boundary, const TimeGrid& grid,
                             const std::string& forcing = "zero") {
    std::ostringstream os;
    os << "schema = 1\n"
       << "space.kind = dirichlet\n"
       << "space.n_modes = " << n_modes << "\n"
       << boundary << "time.tau = " << num(grid.tau()) << "\n"
       << "time.steps = " << grid.steps() << "\n"
       << "time.method = " << to_string(grid.method()) << "\n"
       << "forcing.kind = " << forcing << "\n";
    return os.str();
}

std::string scalar_boundary(double c) { return "boundary.kind = scalar\nboundary.c = " + num(c) + "\n"; }

}  // namespace

RandomFamily random_coercive_family(Rng& rng, Index dim, double tau) {
    const Matrix id = Matrix::Identity(dim, dim);
    const double inv = 1.0 / static_cast<double>(dim);
    const Matrix b = rng.normal_matrix(dim, dim);
    const Matrix gh = sym(b * b.transpose() * inv + 0.5 * id);
    const Matrix c = rng.normal_matrix(dim, dim);
    const Matrix gv = sym(gh + c * c.transpose() * inv + 0.1 * id);
    const double alpha0 = rng.uniform(0.2, 2.0);
    const Matrix p = rng.normal_matrix(dim, dim) * std::sqrt(inv);
    Vector d0(dim), d1(dim);
    for (Index i = 0; i < dim; ++i) {
        d0(i) = rng.uniform(0.0, 1.0);
        d1(i) = rng.uniform(0.0, 1.0);
    }
    Matrix k0 = rng.normal_matrix(dim, dim);
    k0 = 0.5 * (k0 - k0.transpose());
    Matrix k1 = rng.normal_matrix(dim, dim);
    k1 = 0.25 * (k1 - k1.transpose());

    const Matrix s0 = alpha0 * gv + p.transpose() * d0.asDiagonal() * p + k0;
    const Matrix s1 = p.transpose() * d1.asDiagonal() * p + k1;
    auto triple = GelfandTriple::make(gh, gv);
    MatrixFn eval = [s0, s1](double t) -> Matrix { return s0 + t * s1; };
    return RandomFamily{make_form_family(triple, eval, uniform_samples(tau)), s0, s1};
}

std::string instance_config(const GelfandTriple& triple, const Matrix& s0, const Matrix& s1, const BoundaryMap& phi,
                            const TimeGrid& grid) {
    std::ostringstream os;
    os << "schema = 1\n"
       << "space.kind = dim\n"
       << "space.gram_h = " << matrix_inline(triple.gram_h()) << "\n"
       << "space.gram_v = " << matrix_inline(triple.gram_v()) << "\n"
       << "form.kind = matrix\n"
       << "form.matrix = " << matrix_inline(s0) << "\n";
    if (s1.size() > 0) {
        os << "form.matrix_t1 = " << matrix_inline(s1) << "\n";
    }
    if (phi.is_linear()) {
        os << "boundary.kind = dense\n"
           << "boundary.matrix = " << matrix_inline(phi.matrix(triple)) << "\n";
    }
    os << "time.tau = " << num(grid.tau()) << "\n"
       << "time.steps = " << grid.steps() << "\n"
       << "time.method = " << to_string(grid.method()) << "\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Decay bound

CheckReport check_h_norm_bound(const FormFamily& form, const TimeGrid& grid, std::size_t trials, std::uint64_t seed) {
    CheckReport r;
    r.name = "h_norm_bound";
    r.columns = {"trial", "norm", "bound", "margin"};
    const auto& triple = form.triple;
    const OperatorFamily family = operator_family(form);
    const Propagator prop = propagator_matrix(family, grid);
    const double bound = energy_decay_bound(form.alpha, form.omega, triple.c_h(), grid.tau());
    r.tolerance = 1e-9 + prop.est_error;
    r.note = "bound (1 + 2 alpha kappa tau)^(-1/2) e^(omega tau), kappa = c_H if c_H >= 1 else c_H^2; "
             "tolerance includes the scheme error estimate";
    r.observe(bound - prop.norm_h);
    r.add_row({"operator", num(prop.norm_h), num(bound), num(bound - prop.norm_h)});
    Rng rng(seed);
    for (std::size_t k = 0; k < trials; ++k) {
        const Vector x = unit_h(rng.normal_vector(form.dim()), triple);
        const double v = triple.norm_h(evolve_homogeneous(family, x, grid).final());
        r.observe(bound - v);
        r.add_row({num(k), num(v), num(bound), num(bound - v)});
    }
    r.finish();
    return r;
}

CheckReport check_h_norm_bound_suite(std::size_t instances, Index max_dim, std::size_t steps, std::uint64_t seed) {
    CheckReport r;
    r.name = "h_norm_bound_random";
    r.columns = {"instance", "dim", "tau", "c_h", "alpha", "norm", "bound", "margin"};
    r.note = "random coercive families, tau alternating 0.1 and 1";
    r.tolerance = 1e-9;
    for (std::size_t i = 0; i < instances; ++i) {
        Rng rng(trial_seed(seed, i));
        const Index dim = rng.uniform_int(1, max_dim);
        const double tau = (i % 2 == 0) ? 0.1 : 1.0;
        const RandomFamily rf = random_coercive_family(rng, dim, tau);
        const TimeGrid grid = TimeGrid::uniform(tau, steps);
        const CheckReport sub = check_h_norm_bound(rf.form, grid, 2, trial_seed(seed, instances + i));
        r.trials += sub.trials;
        r.tolerance = std::max(r.tolerance, sub.tolerance);
        if (sub.worst_margin < r.worst_margin) {
            r.worst_margin = sub.worst_margin;
            r.replay = instance_config(rf.form.triple, rf.s0, rf.s1, BoundaryMap::zero(), grid);
        }
        r.add_row({num(i), std::to_string(dim), num(tau), num(rf.form.triple.c_h()), num(rf.form.alpha),
                   sub.rows.front()[1], sub.rows.front()[2], num(sub.worst_margin)});
    }
    r.finish();
    return r;
}

// ---------------------------------------------------------------------------
// Energy decay

CheckReport check_energy_decay(const FormFamily& form, const TimeGrid& grid, const std::vector<Vector>& initial) {
    if (form.omega != 0.0) {
        throw HypothesisFailed("energy decay check needs a coercive form (omega = 0), got omega = " +
                               format_double(form.omega));
    }
    CheckReport r;
    r.name = "energy_decay";
    r.columns = {"trial", "max_increase", "margin"};
    r.tolerance = 1e-10;
    const auto& triple = form.triple;
    const OperatorFamily family = operator_family(form);
    for (std::size_t k = 0; k < initial.size(); ++k) {
        const Trajectory v = evolve_homogeneous(family, initial[k], grid);
        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < v.values.size(); ++i) {
            const double a = triple.inner_h(v.values[i], v.values[i]);
            const double b = triple.inner_h(v.values[i + 1], v.values[i + 1]);
            worst = std::max(worst, b - a);
        }
        r.observe(-worst);
        r.add_row({num(k), num(worst), num(-worst)});
    }
    r.finish();
    return r;
}

CheckReport check_energy_decay(const FormFamily& form, const TimeGrid& grid, std::size_t trials, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Vector> xs;
    for (std::size_t k = 0; k < trials; ++k) {
        xs.push_back(unit_h(rng.normal_vector(form.dim()), form.triple));
    }
    return check_energy_decay(form, grid, xs);
}

// ---------------------------------------------------------------------------
// Integration by parts

CheckReport check_integration_by_parts(const Trajectory& v, const Trajectory& w, const GelfandTriple& triple) {
    if (v.grid.nodes() != w.grid.nodes() || v.values.size() != w.values.size()) {
        throw GridMismatch("integration by parts: trajectories live on different grids");
    }
    const auto& t = v.grid.nodes();
    const std::size_t count = t.size();
    const auto dv = difference_quotients(v.grid, v.values);
    const auto dw = difference_quotients(w.grid, w.values);
    std::vector<double> p(count), g(count);
    for (std::size_t i = 0; i < count; ++i) {
        p[i] = triple.inner_h(v.values[i], w.values[i]);
        g[i] = triple.inner_h(dv[i], w.values[i]) + triple.inner_h(dw[i], v.values[i]);
    }
    // E_k = <v,w>(t_k) - int_0^{t_k} g; the worst pair residual is max E - min E.
    double cum = 0.0;
    double e_min = p[0];
    double e_max = p[0];
    std::size_t i_min = 0;
    std::size_t i_max = 0;
    for (std::size_t i = 1; i < count; ++i) {
        cum += 0.5 * (t[i] - t[i - 1]) * (g[i - 1] + g[i]);
        const double e = p[i] - cum;
        if (e < e_min) {
            e_min = e;
            i_min = i;
        }
        if (e > e_max) {
            e_max = e;
            i_max = i;
        }
    }
    const double residual = e_max - e_min;

    // Local errors summed over steps: a third difference is about h^3 times the third derivative,
    // the trapezoid rule loses h^3 |P'''| / 12 per step and a difference quotient h^2 |v'''| / 3.
    const double h = v.grid.max_step();
    const double tau = v.grid.tau();
    double local = 0.0, sup_v = 0.0, sup_w = 0.0, sup_p = 0.0, sup_g = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        sup_v = std::max(sup_v, triple.norm_h(v.values[i]));
        sup_w = std::max(sup_w, triple.norm_h(w.values[i]));
        sup_p = std::max(sup_p, std::abs(p[i]));
        sup_g = std::max(sup_g, std::abs(g[i]));
    }
    for (std::size_t i = 0; i + 3 < count; ++i) {
        const double d3p = std::abs(p[i + 3] - 3.0 * p[i + 2] + 3.0 * p[i + 1] - p[i]);
        const double d3v =
            triple.norm_h(v.values[i + 3] - 3.0 * v.values[i + 2] + 3.0 * v.values[i + 1] - v.values[i]);
        const double d3w =
            triple.norm_h(w.values[i + 3] - 3.0 * w.values[i + 2] + 3.0 * w.values[i + 1] - w.values[i]);
        local += d3p / 12.0 + (d3v * sup_w + d3w * sup_v) / 3.0;
    }
    const double c = 4.0 * local / (h * h);
    const double roundoff = 1e-13 * static_cast<double>(count) * (1.0 + sup_p + tau * sup_g);

    CheckReport r;
    r.name = "integration_by_parts";
    r.columns = {"r", "s", "residual", "c_estimate", "h", "tolerance"};
    r.tolerance = c * h * h + roundoff;
    r.note = "tolerance C h^2, C = 4 x summed local error from third differences";
    r.trials = count * (count - 1) / 2;
    r.worst_margin = -residual;
    r.add_row({num(t[std::min(i_min, i_max)]), num(t[std::max(i_min, i_max)]), num(residual), num(c), num(h),
               num(r.tolerance)});
    r.finish();
    return r;
}

// ---------------------------------------------------------------------------
// m-accretivity

namespace {

struct Pairing {
    double derivative = 0.0;
    double form = 0.0;
};

Pairing pairing_terms(const FormFamily& form, const Trajectory& u) {
    const auto& triple = form.triple;
    Pairing p;
    for (std::size_t i = 0; i + 1 < u.values.size(); ++i) {
        p.derivative += triple.inner_h(u.values[i + 1] - u.values[i], 0.5 * (u.values[i] + u.values[i + 1]));
    }
    const auto w = u.grid.trapezoid_weights();
    const Matrix s_const = form.autonomous ? form.eval(0.0) : Matrix();
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        const Matrix s = form.autonomous ? s_const : form.eval(u.grid.node(i));
        p.form += w[i] * u.values[i].dot(s * u.values[i]);
    }
    return p;
}

}  // namespace

double space_time_pairing(const FormFamily& form, const Trajectory& u) {
    const Pairing p = pairing_terms(form, u);
    return p.derivative + p.form;
}

CheckReport check_m_accretive(const FormFamily& form, const BoundaryMap& phi, const TimeGrid& grid,
                              std::size_t trials, std::size_t solves, std::uint64_t seed) {
    const auto& triple = form.triple;
    if (form.omega != 0.0) {
        throw HypothesisFailed("m-accretivity check needs a coercive form (omega = 0)");
    }
    if (!phi.is_linear()) {
        throw HypothesisFailed("m-accretivity check needs a linear boundary map");
    }
    const double norm_phi = phi.norm_h(triple);
    if (norm_phi > 1.0 + 1e-12) {
        throw HypothesisFailed("m-accretivity check needs |Phi|_H <= 1, got " + format_double(norm_phi));
    }
    CheckReport r;
    r.name = "m_accretive";
    r.columns = {"trial", "derivative_term", "form_term", "margin"};
    r.tolerance = 1e-9;
    r.note = "random piecewise-linear u with u(0) = Phi u(tau), then solvability for random f";
    Rng rng(seed);
    const Index n = form.dim();
    for (std::size_t k = 0; k < trials; ++k) {
        Trajectory u{grid};
        u.values.resize(grid.nodes().size());
        u.values.back() = rng.normal_vector(n);
        for (std::size_t i = 1; i + 1 < u.values.size(); ++i) {
            u.values[i] = rng.normal_vector(n);
        }
        u.values.front() = phi.apply(u.values.back(), triple);
        const Pairing p = pairing_terms(form, u);
        const double margin = p.derivative + p.form;
        r.observe(margin);
        r.add_row({num(k), num(p.derivative), num(p.form), num(margin)});
    }
    const LinearBoundarySolver solver(operator_family(form), phi, grid);
    for (std::size_t j = 0; j < solves; ++j) {
        std::vector<Vector> samples;
        for (std::size_t i = 0; i < grid.nodes().size(); ++i) {
            samples.push_back(rng.normal_vector(n));
        }
        bool ok = false;
        double res = std::numeric_limits<double>::infinity();
        try {
            const Trajectory u = solver.solve(ForcingTerm::sampled(std::move(samples)));
            res = u.residual_bc.value_or(res);
            ok = res <= 1e-8 * (1.0 + sup_norm_h(u, triple));
        } catch (const NotWellPosed&) {
            ok = false;
        }
        r.observe(ok ? 0.0 : -1.0);
        r.add_row({"solve " + num(j), "residual_bc", num(res), ok ? "0" : "-1"});
    }
    r.finish();
    return r;
}

// ---------------------------------------------------------------------------
// Equivalence of the verdict with solvability and uniqueness

std::vector<EquivalenceInstance> random_equivalence_instances(std::size_t count, Index max_dim, std::uint64_t seed) {
    std::vector<EquivalenceInstance> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng(trial_seed(seed, i));
        const Index dim = rng.uniform_int(1, max_dim);
        const double tau = rng.uniform(0.2, 1.5);
        const RandomFamily rf = random_coercive_family(rng, dim, tau);
        const TimeGrid grid = TimeGrid::uniform(tau, 64);
        const OperatorFamily family = operator_family(rf.form);
        Matrix phi = rng.normal_matrix(dim, dim) * (rng.uniform(0.0, 3.0) / std::sqrt(static_cast<double>(dim)));
        if (i % 3 == 2) {
            // Rank-one correction so that Phi T z = z for a random z.
            const Matrix t = propagator_matrix(family, grid).matrix;
            const Vector z = rng.normal_vector(dim);
            const Vector tz = t * z;
            phi += (z - phi * tz) * tz.transpose() / tz.squaredNorm();
        }
        const BoundaryMap bm = BoundaryMap::dense(phi);
        const Vector f = rng.normal_vector(dim);
        out.push_back(EquivalenceInstance{family, bm, grid, ForcingTerm::constant(f),
                                          instance_config(rf.form.triple, rf.s0, rf.s1, bm, grid) +
                                              "forcing.kind = constant\nforcing.value = " + vector_inline(f) + "\n"});
    }
    return out;
}

CheckReport check_equivalence(const std::vector<EquivalenceInstance>& instances) {
    CheckReport r;
    r.name = "equivalence";
    r.columns = {"instance", "dim", "sigma_h", "singular_tol", "verdict", "solved", "second_solution",
                 "sigma_v", "singular_v", "solved_v", "consistent"};
    r.tolerance = 0.0;
    r.note = "singular <=> solve fails <=> a second solution exists, in H and in V geometry";
    std::size_t inconsistent = 0;
    for (std::size_t k = 0; k < instances.size(); ++k) {
        const auto& inst = instances[k];
        const auto& triple = inst.family.triple;
        const LinearBoundarySolver solver(inst.family, inst.phi, inst.grid);
        const bool singular = solver.verdict() == Verdict::singular;

        bool solved = false;
        bool solved_v = false;
        try {
            const Trajectory u = solver.solve(inst.f);
            solved = u.residual_bc.value_or(1.0) <= 1e-8 * (1.0 + sup_norm_h(u, triple));
            double sup_v = 0.0;
            for (const auto& x : u.values) {
                sup_v = std::max(sup_v, triple.norm_v(x));
            }
            const Vector bc = u.initial() - inst.phi.apply(u.final(), triple);
            solved_v = triple.norm_v(bc) <= 1e-8 * (1.0 + sup_v);
        } catch (const NotWellPosed&) {
        }

        // Homogeneous solution started from the least-singular direction.
        const Vector z = unit_h(solver.null_direction(), triple);
        const Trajectory second = evolve_homogeneous(inst.family, z, inst.grid);
        const double res2 = triple.norm_h(second.initial() - inst.phi.apply(second.final(), triple));
        const bool second_solution = res2 <= 10.0 * solver.singular_tol();

        const WeightedSvd sv = weighted_svd(solver.system(), triple.gram_v());
        const double sigma_v = sv.singular_values(sv.singular_values.size() - 1);
        const double scale_v = 1.0 + inst.phi.norm_v(triple) * solver.propagator().norm_v;
        const bool singular_v = sigma_v <= 1e-10 * scale_v;

        const bool consistent = (singular == !solved) && (singular == second_solution) &&
                                (singular == singular_v) && (solved == solved_v);
        if (!consistent) {
            ++inconsistent;
        }
        if (r.observe(consistent ? 0.0 : -1.0) && !consistent) {
            r.replay = inst.replay;
        }
        r.add_row({num(k), std::to_string(triple.dim()), num(solver.sigma_min()), num(solver.singular_tol()),
                   std::string(to_string(solver.verdict())), flag(solved), flag(second_solution), num(sigma_v),
                   flag(singular_v), flag(solved_v), flag(consistent)});
    }
    if (inconsistent > 0) {
        r.worst_margin = -static_cast<double>(inconsistent);
    }
    r.finish();
    return r;
}

CheckReport check_sufficiency_ordering(std::size_t instances, Index max_dim, std::uint64_t seed) {
    CheckReport r;
    r.name = "sufficiency_ordering";
    r.columns = {"instance", "dim", "tau", "norm_phi", "energy", "accretive", "optimized", "verdict"};
    r.tolerance = 0.0;
    r.note = "any sufficient flag implies verdict well_posed";
    for (std::size_t i = 0; i < instances; ++i) {
        Rng rng(trial_seed(seed, i));
        const Index dim = rng.uniform_int(1, max_dim);
        const double tau = rng.uniform(0.05, 2.0);
        const RandomFamily rf = random_coercive_family(rng, dim, tau);
        const TimeGrid grid = TimeGrid::uniform(tau, 64);
        const Propagator prop = propagator_matrix(operator_family(rf.form), grid);
        const double bound = 1.0 / energy_decay_bound(rf.form.alpha, rf.form.omega, rf.form.triple.c_h(), tau);
        const double target = rng.uniform(0.0, 2.0 * bound);
        BoundaryMap phi = BoundaryMap::scalar(target);
        if (i % 2 == 1) {
            const Matrix m = rng.normal_matrix(dim, dim);
            phi = BoundaryMap::dense(m * (target / operator_norm_in(m, rf.form.triple.gram_h())));
        }
        const Certificate c = certify(rf.form, phi, prop);
        const bool any = c.energy.holds || c.accretive.holds || c.optimized.holds;
        const bool ok = !any || c.verdict == Verdict::well_posed;
        if (r.observe(ok ? 0.0 : -1.0) && !ok) {
            r.replay = instance_config(rf.form.triple, rf.s0, rf.s1, phi, grid);
        }
        r.add_row({num(i), std::to_string(dim), num(tau), num(c.norm_phi_h), flag(c.energy.holds),
                   flag(c.accretive.holds), flag(c.optimized.holds), std::string(to_string(c.verdict))});
    }
    r.finish();
    return r;
}

// ---------------------------------------------------------------------------
// Regularity under refinement

CheckReport check_h_regularity(const FormFamily& form, const BoundaryMap& phi, const ForcingTerm& f,
                               const TimeGrid& grid, std::size_t levels) {
    if (!form.decomposition) {
        throw HypothesisFailed("regularity check needs a form decomposition");
    }
    if (!phi.is_linear() || !phi.maps_into_v() || !phi.check_maps_into_v(form.triple)) {
        throw HypothesisFailed("regularity check needs a linear Phi mapping V into V");
    }
    if (levels < 2) {
        throw InvalidParameter("regularity check needs at least 2 refinement levels");
    }
    const auto& triple = form.triple;
    const OperatorFamily family = operator_family(form);
    CheckReport r;
    r.name = "h_regularity";
    r.columns = {"level", "steps", "derivative_l2_h", "max_v", "ratio_derivative", "ratio_v"};
    r.tolerance = 0.0;
    r.note = "refinement ratio threshold 1.1 (engineering choice)";
    auto ratio = [](double next, double prev) {
        if (prev <= 1e-300) {
            return next <= 1e-300 ? 1.0 : std::numeric_limits<double>::infinity();
        }
        return next / prev;
    };
    TimeGrid g = grid;
    double prev_d = 0.0;
    double prev_v = 0.0;
    for (std::size_t level = 0; level < levels; ++level) {
        const LinearBoundarySolver solver(family, phi, g);
        const Trajectory u = solver.solve(f);
        const auto w = g.trapezoid_weights();
        double d2 = 0.0;
        double vmax = 0.0;
        for (std::size_t i = 0; i < u.values.size(); ++i) {
            d2 += w[i] * triple.inner_h(u.derivative[i], u.derivative[i]);
            vmax = std::max(vmax, triple.norm_v(u.values[i]));
        }
        const double d = std::sqrt(d2);
        if (level == 0) {
            r.add_row({"0", num(g.steps()), num(d), num(vmax), "", ""});
        } else {
            const double rd = ratio(d, prev_d);
            const double rv = ratio(vmax, prev_v);
            r.observe(1.1 - std::max(rd, rv));
            r.add_row({num(level), num(g.steps()), num(d), num(vmax), num(rd), num(rv)});
        }
        prev_d = d;
        prev_v = vmax;
        if (level + 1 < levels) {
            g = g.refined();
        }
    }
    r.finish();
    return r;
}

// ---------------------------------------------------------------------------
// Continuity of the solution map

CheckReport check_continuity(const OperatorFamily& family, const BoundaryMap& phi, const ForcingTerm& f,
                             const ForcingTerm& delta, const TimeGrid& grid, std::size_t levels, bool alternate_sign) {
    const auto& triple = family.triple;
    const LinearBoundarySolver solver(family, phi, grid);
    const Trajectory u = solver.solve(f);
    const auto w = grid.trapezoid_weights();
    const Index n = family.dim();
    CheckReport r;
    r.name = "continuity";
    r.columns = {"level", "delta_l1_h", "sup_difference", "bound", "decay_ratio"};
    r.tolerance = 1e-12 * (1.0 + sup_norm_h(u, triple));
    r.note = "C estimated from the first perturbation";
    double c = 0.0;
    double prev = 0.0;
    for (std::size_t k = 0; k < levels; ++k) {
        double s = std::ldexp(1.0, -static_cast<int>(k));
        if (alternate_sign && k % 2 == 1) {
            s = -s;
        }
        const ForcingTerm dk = delta.scaled(s);
        double l1 = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            l1 += w[i] * triple.norm_h(dk.at_node(grid, i, n));
        }
        const Trajectory uk = solver.solve(f.plus(dk));
        double sup = 0.0;
        for (std::size_t i = 0; i < u.values.size(); ++i) {
            sup = std::max(sup, triple.norm_h(uk.values[i] - u.values[i]));
        }
        if (k == 0) {
            c = l1 > 0.0 ? sup / l1 : 0.0;
        }
        r.observe(c * l1 - sup);
        r.add_row({num(k), num(l1), num(sup), num(c * l1), k == 0 || prev == 0.0 ? "" : num(sup / prev)});
        prev = sup;
    }
    r.finish();
    return r;
}

// ---------------------------------------------------------------------------
// Model checks

CheckReport check_v_norm_decay(const DirichletModel& model, double tau, std::size_t steps, Method method) {
    const DecayReport d = v_norm_decay_check(model, tau, steps, method);
    CheckReport r;
    r.name = "v_norm_decay";
    r.columns = {"modes", "tau", "method", "norm_v", "bound"};
    r.tolerance = 1e-8 * d.rhs;
    r.observe(d.rhs - d.lhs);
    r.add_row({num(model.n_modes), num(tau), std::string(to_string(method)), num(d.lhs), num(d.rhs)});
    if (tau > 0.0) {
        r.replay = dirichlet_config(model.n_modes, "boundary.kind = zero\n", TimeGrid::uniform(tau, steps, method));
    }
    r.finish();
    return r;
}

CheckReport check_singular_value_decay(const DirichletModel& model, const TimeGrid& grid) {
    const double err = singular_value_decay_error(model, grid);
    CheckReport r;
    r.name = "singular_value_decay";
    r.columns = {"modes", "tau", "max_error"};
    r.tolerance = 1e-8;
    r.note = "sigma_k(T) = exp(-lambda_k tau)";
    r.observe(-err);
    r.add_row({num(model.n_modes), num(grid.tau()), num(err)});
    r.replay = dirichlet_config(model.n_modes, "boundary.kind = zero\n", grid);
    r.finish();
    return r;
}

CheckReport check_accretivity_example(const DivergenceFormModel& model, double beta) {
    const AccretivityReport a = accretivity_example_check(model, beta);
    CheckReport r;
    r.name = "accretivity_shift";
    r.columns = {"n_cells", "beta", "lambda1_h", "shift", "bound"};
    r.tolerance = 1e-10;
    r.observe(a.shift - a.bound);
    r.add_row({num(model.spec.n_cells), num(beta), num(a.lambda1_h), num(a.shift), num(a.bound)});
    r.finish();
    return r;
}

CheckReport check_semilinear_bound(const FormFamily& form, const BoundaryMap& phi, const SemilinearSpec& spec,
                                   const TimeGrid& grid) {
    const SemilinearResult s = solve_semilinear(form, phi, spec, grid, 1e-12, 500);
    CheckReport r;
    r.name = "semilinear_bound";
    r.columns = {"nonlinearity", "iterations", "norm_l2_h", "bound", "slack_bound"};
    r.tolerance = 0.0;
    r.note = "bound beta1 / (alpha1 c_H^2 - alpha2) with 5% slack";
    r.observe(1.05 * s.bound - s.norm_l2_h);
    r.add_row({spec.name, num(s.iterations), num(s.norm_l2_h), num(s.bound), num(1.05 * s.bound)});
    r.finish();
    return r;
}

// ---------------------------------------------------------------------------
// Default suite

std::vector<CheckReport> run_default_suite(std::uint64_t seed) {
    std::vector<CheckReport> out;
    std::uint64_t k = 0;
    auto next = [&] { return trial_seed(seed, 1000 + k++); };

    out.push_back(check_h_norm_bound_suite(100, 16, 64, next()));

    const FormFamily scalar = constant_form(GelfandTriple::identity(1), Matrix::Ones(1, 1));
    {
        auto r = check_h_norm_bound(scalar, TimeGrid::uniform(1.0, 512), 4, next());
        r.name = "h_norm_bound_scalar";
        out.push_back(std::move(r));
    }

    const DirichletModel d16 = dirichlet_model(16);
    {
        const TimeGrid g = TimeGrid::uniform(0.1, 256);
        auto r = check_energy_decay(d16.form, g, 20, next());
        r.replay = dirichlet_config(16, "boundary.kind = zero\n", g);
        out.push_back(std::move(r));
    }
    {
        const DirichletModel d4 = dirichlet_model(4);
        const TimeGrid g = TimeGrid::uniform(0.5, 256);
        Rng rng(next());
        // Mode k weighted by 1/k^2, the decay of a smooth initial profile.
        const Vector weight = Vector::LinSpaced(4, 1.0, 4.0).cwiseAbs2().cwiseInverse();
        const Vector f = Vector::Ones(4).cwiseProduct(weight);
        const Trajectory v =
            evolve(d4.family, rng.normal_vector(4).cwiseProduct(weight), ForcingTerm::constant(f), g);
        const Trajectory w = evolve_homogeneous(d4.family, rng.normal_vector(4).cwiseProduct(weight), g);
        out.push_back(check_integration_by_parts(v, w, d4.triple()));
    }
    {
        const TimeGrid g = TimeGrid::uniform(0.1, 256);
        auto r = check_m_accretive(d16.form, BoundaryMap::scalar(0.9), g, 100, 10, next());
        r.replay = dirichlet_config(16, scalar_boundary(0.9), g);
        out.push_back(std::move(r));
    }
    {
        auto instances = random_equivalence_instances(100, 8, next());
        const OperatorFamily one = operator_family(scalar);
        const TimeGrid exact = TimeGrid::uniform(std::numbers::ln2, 64, Method::exact_autonomous);
        instances.push_back({one, BoundaryMap::scalar(2.0), exact, ForcingTerm::constant(Vector::Ones(1)),
                             "scalar form 1, tau ln 2, Phi = 2, exact_autonomous"});
        const TimeGrid g = TimeGrid::uniform(0.1, 128);
        instances.push_back({d16.family, BoundaryMap::identity(), g, ForcingTerm::constant(Vector::Ones(16)),
                             dirichlet_config(16, "boundary.kind = identity\n", g, "builtin")});
        out.push_back(check_equivalence(instances));
    }
    out.push_back(check_sufficiency_ordering(100, 8, next()));
    {
        auto r = check_h_regularity(d16.form, BoundaryMap::zero(), ForcingTerm::constant(Vector::Ones(16)),
                                    TimeGrid::uniform(0.5, 32), 4);
        r.name = "h_regularity_dirichlet";
        r.replay = dirichlet_config(16, "boundary.kind = zero\n", TimeGrid::uniform(0.5, 32), "builtin");
        out.push_back(std::move(r));
    }
    {
        DivergenceSpec spec;
        spec.n_cells = 16;
        spec.coeff = affine_t_coefficient(1.0, 0.5);
        spec.tau = 1.0;
        const DivergenceFormModel m = divergence_form_model(spec);
        auto r = check_h_regularity(m.form, BoundaryMap::scalar(0.5),
                                    ForcingTerm::constant(Vector::Ones(m.form.dim())), TimeGrid::uniform(1.0, 32), 4);
        r.name = "h_regularity_divergence";
        r.replay =
            "schema = 1\nspace.kind = divergence\nspace.n_cells = 16\nspace.coeff = affine_t 1 0.5\n" +
            scalar_boundary(0.5) + "time.tau = 1\ntime.steps = 32\nforcing.kind = builtin\nforcing.name = ones\n";
        out.push_back(std::move(r));
    }
    {
        const TimeGrid g = TimeGrid::uniform(std::numbers::ln2, 512);
        auto r = check_continuity(operator_family(scalar), BoundaryMap::identity(),
                                  ForcingTerm::constant(Vector::Ones(1)), ForcingTerm::constant(Vector::Ones(1)), g, 6);
        out.push_back(std::move(r));
    }
    const DirichletModel d64 = dirichlet_model(64);
    out.push_back(check_v_norm_decay(d64, 0.1, 64, Method::exact_autonomous));
    out.push_back(check_singular_value_decay(d64, TimeGrid::uniform(0.1, 64, Method::exact_autonomous)));
    {
        DivergenceSpec spec;
        spec.n_cells = 64;
        out.push_back(check_accretivity_example(divergence_form_model(spec), 1.0));
    }
    {
        const TimeGrid g = TimeGrid::uniform(std::numbers::ln2, 512);
        out.push_back(check_semilinear_bound(scalar, BoundaryMap::identity(),
                                             sin_affine_nonlinearity(0.25, 0.5, scalar.triple, g.tau()), g));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Output

std::string format_report(const CheckReport& r, std::size_t max_rows) {
    std::ostringstream os;
    os << "[check " << r.name << "]\n"
       << "trials = " << r.trials << "\n"
       << "tolerance = " << num(r.tolerance) << "\n"
       << "worst_margin = " << num(r.worst_margin) << "\n"
       << "pass = " << flag(r.pass) << "\n";
    if (!r.note.empty()) {
        os << "note = " << r.note << "\n";
    }
    os << "details:\n";
    auto line = [&os](const std::vector<std::string>& cells) {
        os << "  ";
        for (std::size_t i = 0; i < cells.size(); ++i) {
            os << (i ? "," : "") << cells[i];
        }
        os << "\n";
    };
    line(r.columns);
    for (std::size_t i = 0; i < r.rows.size() && i < max_rows; ++i) {
        line(r.rows[i]);
    }
    if (r.rows.size() > max_rows) {
        os << "  ... " << (r.rows.size() - max_rows) << " more rows\n";
    }
    if (!r.pass && !r.replay.empty()) {
        os << "replay:\n";
        std::istringstream in(r.replay);
        std::string l;
        while (std::getline(in, l)) {
            os << "  " << l << "\n";
        }
    }
    return os.str();
}

std::string format_reports(const std::vector<CheckReport>& reports) {
    std::string s;
    for (const auto& r : reports) {
        s += format_report(r) + "\n";
    }
    return s;
}

std::string reports_csv(const std::vector<CheckReport>& reports) {
    std::string s = "name,trials,tolerance,worst_margin,pass\n";
    for (const auto& r : reports) {
        s += r.name + "," + std::to_string(r.trials) + "," + num(r.tolerance) + "," + num(r.worst_margin) + "," +
             flag(r.pass) + "\n";
    }
    return s;
}

}  // namespace evobc
