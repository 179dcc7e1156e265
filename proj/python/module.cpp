#include "evobc/commands.hpp"
#include "evobc/csv.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace evobc;

namespace {

Matrix trajectory_values(const Trajectory& u) {
    const Index n = u.values.empty() ? 0 : u.values.front().size();
    Matrix m(static_cast<Index>(u.values.size()), n);
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        m.row(static_cast<Index>(i)) = u.values[i].transpose();
    }
    return m;
}

py::dict test_dict(const SufficientTest& t) {
    py::dict d;
    d["available"] = t.available;
    d["holds"] = t.holds;
    d["bound"] = t.bound;
    d["margin"] = t.margin;
    return d;
}

}  // namespace

PYBIND11_MODULE(_evobc, m) {
    m.doc() = "Evolution equations u' + A(t)u = f with time-boundary condition u(0) = Phi u(tau) + y0";

    auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<InvalidSpace>(m, "InvalidSpace", error.ptr());
    py::register_exception<InvalidParameter>(m, "InvalidParameter", error.ptr());
    py::register_exception<IntegrationDiverged>(m, "IntegrationDiverged", error.ptr());
    py::register_exception<MethodMismatch>(m, "MethodMismatch", error.ptr());
    py::register_exception<WrongKind>(m, "WrongKind", error.ptr());
    py::register_exception<NotWellPosed>(m, "NotWellPosed", error.ptr());
    py::register_exception<NotContractive>(m, "NotContractive", error.ptr());
    py::register_exception<NoConvergence>(m, "NoConvergence", error.ptr());
    py::register_exception<GrowthTooLarge>(m, "GrowthTooLarge", error.ptr());
    py::register_exception<NotElliptic>(m, "NotElliptic", error.ptr());
    py::register_exception<GridMismatch>(m, "GridMismatch", error.ptr());
    py::register_exception<HypothesisFailed>(m, "HypothesisFailed", error.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", error.ptr());

    py::class_<GelfandTriple>(m, "GelfandTriple")
        .def(py::init(&GelfandTriple::make), py::arg("gram_h"), py::arg("gram_v"))
        .def_static("identity", &GelfandTriple::identity, py::arg("dim"))
        .def_property_readonly("dim", &GelfandTriple::dim)
        .def_property_readonly("gram_h", &GelfandTriple::gram_h)
        .def_property_readonly("gram_v", &GelfandTriple::gram_v)
        .def_property_readonly("c_h", &GelfandTriple::c_h)
        .def("norm_h", &GelfandTriple::norm_h)
        .def("norm_v", &GelfandTriple::norm_v);

    py::class_<FormFamily>(m, "FormFamily")
        .def_readonly("triple", &FormFamily::triple)
        .def_readonly("alpha", &FormFamily::alpha)
        .def_readonly("omega", &FormFamily::omega)
        .def_readonly("bound_m", &FormFamily::bound_m)
        .def_readonly("autonomous", &FormFamily::autonomous)
        .def_property_readonly("dim", &FormFamily::dim)
        .def("__call__", [](const FormFamily& f, double t) { return f.eval(t); });

    py::class_<OperatorFamily>(m, "OperatorFamily")
        .def_property_readonly("dim", &OperatorFamily::dim)
        .def("__call__", [](const OperatorFamily& f, double t) { return f.eval(t); });

    m.def("constant_form", &constant_form, py::arg("triple"), py::arg("s"), py::arg("alpha_target") = py::none());
    m.def(
        "form_family",
        [](const GelfandTriple& triple, MatrixFn eval, double tau, bool autonomous) {
            return make_form_family(triple, std::move(eval), uniform_samples(tau), std::nullopt, autonomous);
        },
        py::arg("triple"), py::arg("eval"), py::arg("tau"), py::arg("autonomous") = false);
    m.def("operator_family", &operator_family, py::arg("form"));

    py::enum_<Method>(m, "Method")
        .value("crank_nicolson", Method::crank_nicolson)
        .value("implicit_euler", Method::implicit_euler)
        .value("rk4", Method::rk4)
        .value("exact_autonomous", Method::exact_autonomous);

    py::class_<TimeGrid>(m, "TimeGrid")
        .def(py::init<std::vector<double>, Method>(), py::arg("nodes"), py::arg("method") = Method::crank_nicolson)
        .def_static("uniform", &TimeGrid::uniform, py::arg("tau"), py::arg("steps"),
                    py::arg("method") = Method::crank_nicolson)
        .def_property_readonly("tau", &TimeGrid::tau)
        .def_property_readonly("steps", &TimeGrid::steps)
        .def_property_readonly("nodes", &TimeGrid::nodes)
        .def_property_readonly("method", &TimeGrid::method)
        .def("refined", &TimeGrid::refined);

    py::class_<ForcingTerm>(m, "ForcingTerm")
        .def_static("zero", &ForcingTerm::zero)
        .def_static("constant", &ForcingTerm::constant, py::arg("value"))
        .def_static("sampled", &ForcingTerm::sampled, py::arg("samples"))
        .def_static("closure", &ForcingTerm::closure, py::arg("f"));

    py::class_<Trajectory>(m, "Trajectory")
        .def_property_readonly("times", [](const Trajectory& u) { return u.grid.nodes(); })
        .def_property_readonly("values", &trajectory_values)
        .def_readonly("node_residual", &Trajectory::node_residual)
        .def_readonly("residual_eq", &Trajectory::residual_eq)
        .def_readonly("residual_bc", &Trajectory::residual_bc);

    py::class_<BoundaryMap>(m, "BoundaryMap")
        .def_static("zero", &BoundaryMap::zero)
        .def_static("identity", &BoundaryMap::identity)
        .def_static("scalar", &BoundaryMap::scalar, py::arg("c"))
        .def_static("dense", &BoundaryMap::dense, py::arg("matrix"))
        .def_static("rank_one", &BoundaryMap::rank_one, py::arg("x0"), py::arg("xprime"))
        .def_static("nonlinear", &BoundaryMap::nonlinear, py::arg("map"), py::arg("lipschitz_l"))
        .def_property_readonly("is_linear", &BoundaryMap::is_linear)
        .def("apply", &BoundaryMap::apply)
        .def("matrix", &BoundaryMap::matrix)
        .def("norm_h", &BoundaryMap::norm_h)
        .def("multiplied", &BoundaryMap::multiplied)
        .def("__repr__", &BoundaryMap::describe);

    py::class_<Propagator>(m, "Propagator")
        .def_readonly("tau", &Propagator::tau)
        .def_readonly("matrix", &Propagator::matrix)
        .def_readonly("norm_h", &Propagator::norm_h)
        .def_readonly("norm_v", &Propagator::norm_v)
        .def_readonly("est_error", &Propagator::est_error);

    m.def("evolve", &evolve, py::arg("family"), py::arg("x"), py::arg("f"), py::arg("grid"));
    m.def("evolve_homogeneous", &evolve_homogeneous, py::arg("family"), py::arg("x"), py::arg("grid"));
    m.def("propagator_matrix", &propagator_matrix, py::arg("family"), py::arg("grid"));
    m.def("solve_linear_bvp", &solve_linear_bvp, py::arg("family"), py::arg("phi"), py::arg("f"), py::arg("y0"),
          py::arg("grid"));

    py::class_<Certificate>(m, "Certificate")
        .def_readonly("tau", &Certificate::tau)
        .def_readonly("sigma_min", &Certificate::sigma_min)
        .def_readonly("sigma_max", &Certificate::sigma_max)
        .def_readonly("singular_tol", &Certificate::singular_tol)
        .def_property_readonly("verdict", [](const Certificate& c) { return std::string(to_string(c.verdict)); })
        .def_property_readonly("sufficient_energy", [](const Certificate& c) { return test_dict(c.energy); })
        .def_property_readonly("sufficient_accretive", [](const Certificate& c) { return test_dict(c.accretive); })
        .def_property_readonly("sufficient_optimized", [](const Certificate& c) { return test_dict(c.optimized); })
        .def_readonly("norm_phi_h", &Certificate::norm_phi_h)
        .def_readonly("norm_t_h", &Certificate::norm_t_h)
        .def_readonly("alpha", &Certificate::alpha)
        .def_readonly("omega", &Certificate::omega)
        .def_readonly("c_h", &Certificate::c_h)
        .def("__str__", &format_certificate);

    m.def(
        "certify",
        [](const FormFamily& form, const BoundaryMap& phi, const TimeGrid& grid, std::optional<double> tol) {
            return certify(form, phi, grid, tol);
        },
        py::arg("form"), py::arg("phi"), py::arg("grid"), py::arg("singular_tol") = py::none());
    m.def("energy_decay_bound", &energy_decay_bound, py::arg("alpha"), py::arg("omega"), py::arg("c_h"),
          py::arg("tau"));

    py::class_<NonlinearSolveResult>(m, "NonlinearSolveResult")
        .def_readonly("trajectory", &NonlinearSolveResult::trajectory)
        .def_readonly("x", &NonlinearSolveResult::x)
        .def_readonly("q", &NonlinearSolveResult::q)
        .def_readonly("iterations", &NonlinearSolveResult::iterations)
        .def_readonly("steps", &NonlinearSolveResult::steps);
    m.def("solve_nonlinear_phi", &solve_nonlinear_phi, py::arg("family"), py::arg("phi"), py::arg("f"),
          py::arg("grid"), py::arg("tol") = 1e-12, py::arg("max_iter") = 200);

    py::class_<SemilinearSpec>(m, "SemilinearSpec")
        .def_readonly("alpha2", &SemilinearSpec::alpha2)
        .def_readonly("beta1", &SemilinearSpec::beta1)
        .def_readonly("name", &SemilinearSpec::name);
    m.def("sin_affine_nonlinearity", &sin_affine_nonlinearity, py::arg("a"), py::arg("b"), py::arg("triple"),
          py::arg("tau"));
    m.def("affine_nonlinearity", &affine_nonlinearity, py::arg("a"), py::arg("b"), py::arg("triple"),
          py::arg("tau"));
    m.def("apriori_bound", &apriori_bound, py::arg("spec"), py::arg("alpha1"), py::arg("c_h"));
    py::class_<SemilinearResult>(m, "SemilinearResult")
        .def_readonly("trajectory", &SemilinearResult::trajectory)
        .def_readonly("iterations", &SemilinearResult::iterations)
        .def_readonly("norm_l2_h", &SemilinearResult::norm_l2_h)
        .def_readonly("bound", &SemilinearResult::bound)
        .def_readonly("bound_warning", &SemilinearResult::bound_warning);
    m.def("solve_semilinear", &solve_semilinear, py::arg("form"), py::arg("phi"), py::arg("spec"), py::arg("grid"),
          py::arg("tol") = 1e-12, py::arg("max_iter") = 200);

    py::class_<DirichletModel>(m, "DirichletModel")
        .def_readonly("n_modes", &DirichletModel::n_modes)
        .def_readonly("eigenvalues", &DirichletModel::eigenvalues)
        .def_readonly("form", &DirichletModel::form)
        .def_readonly("family", &DirichletModel::family);
    m.def("dirichlet_model", &dirichlet_model, py::arg("n_modes"), py::arg("length") = 1.0);

    py::class_<CheckReport>(m, "CheckReport")
        .def_readonly("name", &CheckReport::name)
        .def_readonly("trials", &CheckReport::trials)
        .def_readonly("worst_margin", &CheckReport::worst_margin)
        .def_readonly("tolerance", &CheckReport::tolerance)
        .def_readonly("passed", &CheckReport::pass)
        .def_readonly("replay", &CheckReport::replay)
        .def("__str__", [](const CheckReport& r) { return format_report(r); });
    m.def("run_default_suite", &run_default_suite, py::arg("seed") = kDefaultSeed);

    m.def(
        "run_command",
        [](const std::string& cmd, std::optional<std::filesystem::path> config, std::filesystem::path out,
           std::optional<std::uint64_t> seed, std::optional<std::size_t> steps, std::optional<std::string> method) {
            CommandOptions o;
            o.config = std::move(config);
            o.out = std::move(out);
            o.seed = seed;
            o.steps = steps;
            o.method = std::move(method);
            o.quiet = true;
            std::ostringstream os, es;
            const int code = run_command(cmd, o, os, es);
            return py::make_tuple(code, os.str(), es.str());
        },
        py::arg("command"), py::arg("config") = py::none(), py::arg("out") = ".", py::arg("seed") = py::none(),
        py::arg("steps") = py::none(), py::arg("method") = py::none(),
        "Runs a CLI command; returns (exit_code, stdout, stderr).");

    m.attr("DEFAULT_SEED") = kDefaultSeed;
}
