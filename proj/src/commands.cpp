#include "evobc/commands.hpp"

#include "evobc/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

namespace evobc {

namespace fs = std::filesystem;

ProblemConfig load_config(const CommandOptions& options) {
    if (!options.config) {
        throw ConfigError({{0, "config", "--config is required for this command"}});
    }
    const fs::path& path = *options.config;
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError({{0, "config", "cannot read " + path.string()}});
    }
    std::stringstream ss;
    ss << in.rdbuf();
    ProblemConfig c = parse_config_text(ss.str(), path.has_parent_path() ? path.parent_path() : ".");
    if (options.seed) {
        c.entries["run.seed"] = std::to_string(*options.seed);
    }
    if (options.steps) {
        c.entries["time.steps"] = std::to_string(*options.steps);
    }
    if (options.method) {
        c.entries["time.method"] = *options.method;
    }
    return c;
}

// ---------------------------------------------------------------------------
// solve

std::string trajectory_csv(const Trajectory& u, double residual_bc) {
    const Index n = u.values.empty() ? 0 : u.values.front().size();
    std::string s = "t";
    for (Index j = 0; j < n; ++j) {
        s += ",u_" + std::to_string(j + 1);
    }
    s += ",residual_eq,residual_bc\n";
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        std::vector<double> row{u.grid.node(i)};
        for (Index j = 0; j < n; ++j) {
            row.push_back(u.values[i](j));
        }
        row.push_back(i < u.node_residual.size() ? u.node_residual[i] : 0.0);
        row.push_back(residual_bc);
        s += csv_row(row) + "\n";
    }
    return s;
}

namespace {

std::string kv(const std::string& k, const std::string& v) { return k + " = " + v + "\n"; }
std::string kv(const std::string& k, double v) { return kv(k, format_double(v)); }
std::string kv(const std::string& k, std::size_t v) { return kv(k, std::to_string(v)); }

std::string problem_summary(const Problem& p) {
    std::string s;
    s += kv("space.kind", p.space_kind);
    s += kv("dim", static_cast<std::size_t>(p.dim()));
    s += kv("tau", p.grid.tau());
    s += kv("steps", p.grid.steps());
    s += kv("method", std::string(to_string(p.grid.method())));
    s += kv("boundary", p.phi.describe());
    return s;
}

int cmd_solve(const Problem& p, const fs::path& out_dir, std::ostream& out, bool quiet) {
    std::string summary = "command = solve\n" + problem_summary(p);
    Trajectory u{p.grid};
    double residual_bc = 0.0;
    if (p.semilinear) {
        const SemilinearResult r = solve_semilinear(*p.form, p.phi, *p.semilinear, p.grid, p.tol, p.max_iter);
        u = r.trajectory;
        residual_bc = u.residual_bc.value_or(0.0);
        summary += kv("mode", "semilinear");
        summary += kv("nonlinearity", p.semilinear->name);
        summary += kv("iterations", r.iterations);
        summary += kv("alpha1", r.alpha1);
        summary += kv("alpha2", p.semilinear->alpha2);
        summary += kv("beta1", p.semilinear->beta1);
        summary += kv("norm_l2_h", r.norm_l2_h);
        summary += kv("apriori_bound", r.bound);
        summary += kv("bound_warning", r.bound_warning ? "true" : "false");
    } else if (!p.phi.is_linear()) {
        BoundaryMap phi = p.phi;
        if (p.y0.size() > 0 && p.y0.norm() > 0.0) {
            phi = BoundaryMap::nonlinear(
                [base = p.phi, y0 = p.y0, triple = p.triple](const Vector& x) -> Vector {
                    return base.apply(x, triple) + y0;
                },
                p.phi.lipschitz_l());
        }
        const NonlinearSolveResult r = solve_nonlinear_phi(p.family, phi, p.forcing, p.grid, p.tol, p.max_iter);
        u = r.trajectory;
        residual_bc = u.residual_bc.value_or(0.0);
        summary += kv("mode", "nonlinear_boundary");
        summary += kv("q", r.q);
        summary += kv("iterations", r.iterations);
        double worst_ratio = 0.0;
        for (std::size_t k = 1; k < r.steps.size(); ++k) {
            if (r.steps[k - 1] > 0.0) {
                worst_ratio = std::max(worst_ratio, r.steps[k] / r.steps[k - 1]);
            }
        }
        summary += kv("max_contraction_ratio", worst_ratio);
        summary += kv("x", vector_inline(r.x));
    } else {
        const LinearBoundarySolver solver(p.family, p.phi, p.grid, p.singular_tol);
        summary += kv("mode", "linear");
        summary += kv("sigma_min", solver.sigma_min());
        summary += kv("singular_tol", solver.singular_tol());
        summary += kv("verdict", std::string(to_string(solver.verdict())));
        u = solver.solve(p.forcing, p.y0);
        residual_bc = u.residual_bc.value_or(0.0);
    }
    summary += kv("residual_eq", u.residual_eq);
    summary += kv("residual_bc", residual_bc);
    summary += kv("sup_norm_h", sup_norm_h(u, p.triple));
    summary += kv("l2_norm_h", l2_norm_h(u, p.triple));
    write_text_file(out_dir / "trajectory.csv", trajectory_csv(u, residual_bc));
    write_text_file(out_dir / "summary.txt", summary);
    if (!quiet) {
        out << summary;
    }
    return exit_ok;
}

int cmd_certify(const Problem& p, const fs::path& out_dir, std::ostream& out, bool quiet) {
    if (!p.phi.is_linear()) {
        throw WrongKind("certify needs a linear boundary map; use solve for nonlinear maps");
    }
    const Certificate c = p.form ? certify(*p.form, p.phi, p.grid, p.singular_tol)
                                 : certify(p.family, p.phi, p.grid, p.singular_tol);
    const std::string text = format_certificate(c);
    write_text_file(out_dir / "certificate.txt", text);
    if (!quiet) {
        out << text;
    }
    return exit_ok;
}

}  // namespace

// ---------------------------------------------------------------------------
// sweep

SweepResult run_sweep(const ProblemConfig& config, const SweepSpec& spec) {
    const Problem base = build_problem(config);
    std::vector<double> params(spec.points);
    for (std::size_t i = 0; i < spec.points; ++i) {
        params[i] = spec.points == 1 ? spec.min
                                     : spec.min + (spec.max - spec.min) * static_cast<double>(i) /
                                                      static_cast<double>(spec.points - 1);
    }
    std::optional<Propagator> prop;
    if (spec.parameter == "phi_scale") {
        if (!base.phi.is_linear()) {
            throw WrongKind("phi_scale sweep needs a linear boundary map");
        }
        prop = propagator_matrix(base.family, base.grid);
    } else if (spec.parameter != "tau") {
        throw InvalidParameter("unknown sweep parameter '" + spec.parameter + "'");
    }

    auto point = [&](double value) -> SweepRow {
        Certificate c;
        if (prop) {
            const BoundaryMap phi = base.phi.multiplied(value);
            c = base.form ? certify(*base.form, phi, *prop, base.singular_tol)
                          : certify(base.family, phi, *prop, base.singular_tol);
        } else {
            ProblemConfig cfg = config;
            cfg.entries["time.tau"] = format_double(value);
            const Problem p = build_problem(cfg);
            c = p.form ? certify(*p.form, p.phi, p.grid, p.singular_tol)
                       : certify(p.family, p.phi, p.grid, p.singular_tol);
        }
        return SweepRow{value, c.sigma_min, c.verdict, c.energy.holds, c.accretive.holds, c.optimized.holds};
    };

    SweepResult r;
    r.parameter = spec.parameter;
    r.rows.resize(params.size());
    const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    for (std::size_t start = 0; start < params.size(); start += workers) {
        const std::size_t end = std::min(params.size(), start + workers);
        std::vector<std::future<SweepRow>> jobs;
        for (std::size_t i = start; i < end; ++i) {
            jobs.push_back(std::async(std::launch::async, point, params[i]));
        }
        for (std::size_t i = start; i < end; ++i) {
            r.rows[i] = jobs[i - start].get();
        }
    }

    std::size_t argmin = 0;
    for (std::size_t i = 1; i < r.rows.size(); ++i) {
        if (r.rows[i].sigma_min < r.rows[argmin].sigma_min) {
            argmin = i;
        }
    }
    r.crossing = r.rows[argmin].parameter;
    r.sufficient_edge = std::numeric_limits<double>::quiet_NaN();
    for (const auto& row : r.rows) {
        if (row.energy || row.accretive || row.optimized) {
            if (row.verdict != Verdict::well_posed) {
                r.sufficient_inside = false;
            }
            if (std::isnan(r.sufficient_edge)) {
                r.sufficient_edge = row.parameter;
            } else if (spec.parameter == "tau") {
                r.sufficient_edge = std::min(r.sufficient_edge, row.parameter);
            } else {
                r.sufficient_edge = std::max(r.sufficient_edge, row.parameter);
            }
        }
    }
    return r;
}

std::string sweep_csv(const SweepResult& r) {
    auto b = [](bool v) { return v ? "1" : "0"; };
    std::string s = "parameter,sigma_min,verdict,sufficient_energy,sufficient_accretive,sufficient_optimized\n";
    for (const auto& row : r.rows) {
        s += format_double(row.parameter) + "," + format_double(row.sigma_min) + "," +
             std::string(to_string(row.verdict)) + "," + b(row.energy) + "," + b(row.accretive) + "," +
             b(row.optimized) + "\n";
    }
    return s;
}

namespace {

int cmd_sweep(const ProblemConfig& config, const Problem& p, const fs::path& out_dir, std::ostream& out,
              bool quiet) {
    if (!p.sweep) {
        throw ConfigError({{0, "sweep.parameter", "required for the sweep command (phi_scale or tau)"}});
    }
    const SweepResult r = run_sweep(config, *p.sweep);
    write_text_file(out_dir / "sweep.csv", sweep_csv(r));
    std::string summary = "command = sweep\n" + problem_summary(p);
    summary += kv("parameter", r.parameter);
    summary += kv("points", r.rows.size());
    summary += kv("crossing", r.crossing);
    const double cell = r.rows.size() > 1 ? (p.sweep->max - p.sweep->min) / static_cast<double>(r.rows.size() - 1)
                                          : 0.0;
    summary += kv("grid_cell", cell);
    summary += kv("sufficient_edge", r.sufficient_edge);
    summary += kv("sufficient_inside_well_posed", r.sufficient_inside ? "true" : "false");
    write_text_file(out_dir / "sweep_summary.txt", summary);
    if (!quiet) {
        out << summary;
    }
    return exit_ok;
}

}  // namespace

// ---------------------------------------------------------------------------
// verify

std::vector<CheckReport> run_verify(const std::optional<Problem>& problem, std::uint64_t seed,
                                    const std::string& replay) {
    std::vector<CheckReport> reports = run_default_suite(seed);
    if (!problem) {
        return reports;
    }
    const Problem& p = *problem;
    auto add = [&](CheckReport r) {
        r.name = "config_" + r.name;
        if (r.replay.empty()) {
            r.replay = replay;
        }
        reports.push_back(std::move(r));
    };
    // Checks whose hypotheses fail for this problem are skipped.
    auto attempt = [&](auto&& fn) {
        try {
            add(fn());
        } catch (const HypothesisFailed&) {
        } catch (const NotWellPosed&) {
        } catch (const GrowthTooLarge&) {
        }
    };
    if (p.form) {
        attempt([&] { return check_h_norm_bound(*p.form, p.grid, 20, trial_seed(seed, 1)); });
        attempt([&] { return check_energy_decay(*p.form, p.grid, 20, trial_seed(seed, 2)); });
    }
    if (p.phi.is_linear()) {
        attempt([&] { return check_equivalence({EquivalenceInstance{p.family, p.phi, p.grid, p.forcing, replay}}); });
        if (p.form) {
            attempt([&] { return check_m_accretive(*p.form, p.phi, p.grid, 100, 10, trial_seed(seed, 3)); });
            attempt([&] { return check_h_regularity(*p.form, p.phi, p.forcing, p.grid, 3); });
        }
    }
    if (p.semilinear && p.form) {
        attempt([&] { return check_semilinear_bound(*p.form, p.phi, *p.semilinear, p.grid); });
    }
    return reports;
}

namespace {

int cmd_verify(const std::optional<Problem>& p, std::uint64_t seed, const std::string& replay,
               const fs::path& out_dir, std::ostream& out, bool quiet) {
    const auto reports = run_verify(p, seed, replay);
    write_text_file(out_dir / "verify_report.txt", format_reports(reports));
    write_text_file(out_dir / "verify_report.csv", reports_csv(reports));
    bool ok = true;
    for (const auto& r : reports) {
        ok = ok && r.pass;
        if (!r.pass) {
            out << format_report(r);
        } else if (!quiet) {
            out << "PASS " << r.name << " worst_margin = " << format_double(r.worst_margin) << "\n";
        }
    }
    if (!quiet || !ok) {
        out << (ok ? "all checks passed\n" : "some checks failed\n");
    }
    return ok ? exit_ok : exit_check_failed;
}

bool is_file_value(const ProblemConfig& c, const std::string& key) {
    if (!c.has(key)) {
        return false;
    }
    const fs::path v = c.get(key);
    std::error_code ec;
    return fs::is_regular_file(v.is_absolute() ? v : c.base_dir / v, ec);
}

}  // namespace

// ---------------------------------------------------------------------------
// model

void write_model_files(const ProblemConfig& config, const Problem& p, const fs::path& dir) {
    if (!p.form) {
        throw WrongKind("model needs a form family");
    }
    const Index n = p.dim();
    write_text_file(dir / "gram_h.csv", matrix_csv(p.triple.gram_h()));
    write_text_file(dir / "gram_v.csv", matrix_csv(p.triple.gram_v()));

    // Twice-refined nodes cover every time at which a stepper or the error probe evaluates the form.
    const TimeGrid fine = p.grid.refined().refined();
    std::string samples;
    for (const double t : fine.nodes()) {
        const Matrix s = p.form->eval(t);
        std::vector<double> row{t};
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < n; ++j) {
                row.push_back(s(i, j));
            }
        }
        samples += csv_row(row) + "\n";
    }
    write_text_file(dir / "form_samples.csv", samples);

    ProblemConfig out;
    for (const auto& [k, v] : config.entries) {
        if (k.rfind("space.", 0) == 0 || k.rfind("form.", 0) == 0 || k.rfind("semilinear.", 0) == 0) {
            continue;
        }
        if (is_file_value(config, k)) {
            const fs::path path = v;
            out.entries[k] = fs::absolute(path.is_absolute() ? path : config.base_dir / path).string();
        } else {
            out.entries[k] = v;
        }
    }
    if (p.semilinear) {
        for (const auto& [k, v] : config.entries) {
            if (k.rfind("semilinear.", 0) == 0) {
                out.entries[k] = v;
            }
        }
    }
    out.entries["space.kind"] = "dim";
    out.entries["space.gram_h"] = "gram_h.csv";
    out.entries["space.gram_v"] = "gram_v.csv";
    out.entries["form.kind"] = "samples";
    out.entries["form.samples"] = "form_samples.csv";
    write_text_file(dir / "model_config.txt", write_config(out));

    std::string info = "command = model\n" + problem_summary(p);
    info += kv("alpha", p.form->alpha);
    info += kv("omega", p.form->omega);
    info += kv("bound_m", p.form->bound_m);
    info += kv("c_h", p.triple.c_h());
    info += kv("autonomous", p.form->autonomous ? "true" : "false");
    if (p.dirichlet) {
        info += kv("eigenvalues", vector_inline(p.dirichlet->eigenvalues));
    }
    if (p.divergence) {
        info += kv("a_lo", p.divergence->a_lo);
        info += kv("a_hi", p.divergence->a_hi);
        info += kv("lambda1_h", p.divergence->lambda1_h);
        info += kv("accretivity_shift", accretivity_shift(operator_family(*p.form), uniform_samples(p.grid.tau())));
    }
    write_text_file(dir / "model_info.txt", info);
}

// ---------------------------------------------------------------------------

int run_command(const std::string& cmd, const CommandOptions& options, std::ostream& out, std::ostream& err) {
    try {
        if (cmd != "solve" && cmd != "certify" && cmd != "sweep" && cmd != "verify" && cmd != "model") {
            err << "error: unknown command '" << cmd << "' (solve, certify, sweep, verify, model)\n";
            return exit_parse;
        }
        if (cmd == "verify" && !options.config) {
            return cmd_verify(std::nullopt, options.seed.value_or(kDefaultSeed), "", options.out, out,
                              options.quiet);
        }
        const ProblemConfig config = load_config(options);
        const Problem p = build_problem(config);
        if (cmd == "solve") {
            return cmd_solve(p, options.out, out, options.quiet);
        }
        if (cmd == "certify") {
            return cmd_certify(p, options.out, out, options.quiet);
        }
        if (cmd == "sweep") {
            return cmd_sweep(config, p, options.out, out, options.quiet);
        }
        if (cmd == "verify") {
            return cmd_verify(p, p.seed, write_config(config), options.out, out, options.quiet);
        }
        write_model_files(config, p, options.out);
        if (!options.quiet) {
            out << "wrote model files to " << options.out.string() << "\n";
        }
        return exit_ok;
    } catch (const ConfigError& e) {
        for (const auto& issue : e.issues()) {
            err << "config error";
            if (issue.line > 0) {
                err << " (line " << issue.line << ")";
            }
            if (!issue.field.empty()) {
                err << " " << issue.field;
            }
            err << ": " << issue.message << "\n";
        }
        return exit_parse;
    } catch (const WrongKind& e) {
        err << "error: " << e.what() << "\n";
        return exit_parse;
    } catch (const NotWellPosed& e) {
        err << "error: " << e.what() << "\n";
        return exit_not_well_posed;
    } catch (const NotContractive& e) {
        err << "error: " << e.what() << "\n";
        return exit_not_contractive;
    } catch (const NoConvergence& e) {
        err << "error: " << e.what() << "\n";
        return exit_no_convergence;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_error;
    }
}

}  // namespace evobc
