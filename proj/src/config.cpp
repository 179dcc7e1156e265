#include "evobc/config.hpp"

#include "evobc/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace evobc {

namespace {

std::string join_issues(const std::vector<ConfigIssue>& issues) {
    std::string s = "invalid configuration:";
    for (const auto& i : issues) {
        s += "\n  ";
        if (i.line) {
            s += "line " + std::to_string(i.line) + ": ";
        }
        if (!i.field.empty()) {
            s += i.field + ": ";
        }
        s += i.message;
    }
    return s;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

bool valid_key(const std::string& k) {
    return !k.empty() && std::all_of(k.begin(), k.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '.';
    });
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "schema",
        "space.kind", "space.dim", "space.gram_h", "space.gram_v", "space.n_modes", "space.length",
        "space.n_cells", "space.coeff", "space.c1", "space.c0", "space.omega_shift", "space.a_lo",
        "form.kind", "form.matrix", "form.matrix_t1", "form.samples",
        "boundary.kind", "boundary.c", "boundary.matrix", "boundary.x0", "boundary.xprime", "boundary.name",
        "boundary.lipschitz_l", "boundary.y0",
        "time.tau", "time.steps", "time.method",
        "forcing.kind", "forcing.value", "forcing.path", "forcing.name",
        "semilinear.name", "semilinear.a", "semilinear.b", "semilinear.alpha2", "semilinear.beta1",
        "run.tol", "run.max_iter", "run.seed", "run.singular_tol",
        "sweep.parameter", "sweep.min", "sweep.max", "sweep.points",
    };
    return keys;
}

/// Piecewise-linear lookup in a table of (t, matrix) rows; exact nodes are returned verbatim.
class SampledMatrix {
public:
    SampledMatrix(std::vector<double> t, std::vector<Matrix> m) : t_(std::move(t)), m_(std::move(m)) {}

    Matrix operator()(double t) const {
        const auto it = std::lower_bound(t_.begin(), t_.end(), t);
        if (it == t_.end()) {
            return m_.back();
        }
        const auto k = static_cast<std::size_t>(it - t_.begin());
        if (*it == t || k == 0) {
            return m_[k];
        }
        const double s = (t - t_[k - 1]) / (t_[k] - t_[k - 1]);
        return (1.0 - s) * m_[k - 1] + s * m_[k];
    }

private:
    std::vector<double> t_;
    std::vector<Matrix> m_;
};

class SampledVector {
public:
    SampledVector(std::vector<double> t, std::vector<Vector> v) : t_(std::move(t)), v_(std::move(v)) {}

    Vector operator()(double t) const {
        const auto it = std::lower_bound(t_.begin(), t_.end(), t);
        if (it == t_.end()) {
            return v_.back();
        }
        const auto k = static_cast<std::size_t>(it - t_.begin());
        if (*it == t || k == 0) {
            return v_[k];
        }
        const double s = (t - t_[k - 1]) / (t_[k] - t_[k - 1]);
        return (1.0 - s) * v_[k - 1] + s * v_[k];
    }

    const std::vector<double>& times() const { return t_; }
    const std::vector<Vector>& values() const { return v_; }

private:
    std::vector<double> t_;
    std::vector<Vector> v_;
};

class Builder {
public:
    explicit Builder(const ProblemConfig& c) : c_(c) {}

    std::vector<ConfigIssue> issues;

    void issue(const std::string& field, const std::string& message) {
        const auto it = c_.lines.find(field);
        issues.push_back({it == c_.lines.end() ? 0 : it->second, field, message});
    }

    bool has(const std::string& key) const { return c_.has(key); }
    std::string str(const std::string& key, const std::string& fallback = "") const { return c_.get(key, fallback); }

    std::optional<double> number(const std::string& key) {
        if (!has(key)) {
            return std::nullopt;
        }
        const auto v = parse_double(str(key));
        if (!v || !std::isfinite(*v)) {
            issue(key, "expected a finite number, got '" + str(key) + "'");
            return std::nullopt;
        }
        return v;
    }

    double number_or(const std::string& key, double fallback) { return number(key).value_or(fallback); }

    std::optional<double> required_number(const std::string& key) {
        if (!has(key)) {
            issue(key, "required");
            return std::nullopt;
        }
        return number(key);
    }

    std::optional<std::size_t> count(const std::string& key, std::size_t fallback, std::size_t at_least) {
        if (!has(key)) {
            return fallback;
        }
        const auto v = number(key);
        if (!v) {
            return std::nullopt;
        }
        if (*v != std::floor(*v) || *v < static_cast<double>(at_least) || *v > 9007199254740992.0) {
            issue(key, "expected an integer >= " + std::to_string(at_least));
            return std::nullopt;
        }
        return static_cast<std::size_t>(*v);
    }

    std::filesystem::path path(const std::string& key) const {
        std::filesystem::path p = str(key);
        return p.is_absolute() ? p : c_.base_dir / p;
    }

    /// Inline "a b; c d" or a CSV path.
    std::optional<Matrix> matrix(const std::string& key) {
        if (!has(key)) {
            issue(key, "required");
            return std::nullopt;
        }
        const std::string v = str(key);
        std::vector<std::vector<double>> rows;
        bool inline_ok = true;
        std::stringstream ss(v);
        std::string part;
        while (std::getline(ss, part, ';')) {
            auto nums = parse_numbers(part);
            if (!nums || nums->empty()) {
                inline_ok = false;
                break;
            }
            rows.push_back(std::move(*nums));
        }
        if (inline_ok && !rows.empty()) {
            Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows[0].size()));
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (rows[i].size() != rows[0].size()) {
                    issue(key, "ragged matrix rows");
                    return std::nullopt;
                }
                for (std::size_t j = 0; j < rows[i].size(); ++j) {
                    m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
                }
            }
            return m;
        }
        try {
            return read_csv_matrix(path(key));
        } catch (const Error& e) {
            issue(key, e.what());
            return std::nullopt;
        }
    }

    /// Inline numbers or a CSV path holding one row or one column.
    std::optional<Vector> vector(const std::string& key, Index dim) {
        if (!has(key)) {
            issue(key, "required");
            return std::nullopt;
        }
        std::vector<double> nums;
        if (auto inl = parse_numbers(str(key)); inl && !inl->empty()) {
            nums = std::move(*inl);
        } else {
            try {
                const Matrix m = read_csv_matrix(path(key));
                nums.assign(m.data(), m.data() + m.size());
            } catch (const Error& e) {
                issue(key, e.what());
                return std::nullopt;
            }
        }
        if (nums.size() == 1 && dim > 1) {
            return Vector::Constant(dim, nums[0]);
        }
        if (static_cast<Index>(nums.size()) != dim) {
            issue(key, "dimension mismatch: expected " + std::to_string(dim) + " entries, got " +
                           std::to_string(nums.size()));
            return std::nullopt;
        }
        return Eigen::Map<Vector>(nums.data(), dim);
    }

    std::optional<Coefficient> coefficient(const std::string& key) {
        std::stringstream ss(str(key));
        std::string name;
        ss >> name;
        std::string rest;
        std::getline(ss, rest);
        const auto params = parse_numbers(rest);
        if (!params) {
            issue(key, "expected '<name> <params...>'");
            return std::nullopt;
        }
        try {
            return make_coefficient(name, *params);
        } catch (const Error& e) {
            issue(key, e.what());
            return std::nullopt;
        }
    }

private:
    const ProblemConfig& c_;
};

struct Space {
    std::string kind;
    std::optional<GelfandTriple> triple;
    std::optional<FormFamily> form;
    std::optional<DirichletModel> dirichlet;
    std::optional<DivergenceFormModel> divergence;
};

Space build_space(Builder& b, std::optional<double> tau) {
    Space s;
    s.kind = b.str("space.kind", "dim");
    try {
        if (s.kind == "dim") {
            if (b.has("space.gram_h") || b.has("space.gram_v")) {
                auto gh = b.has("space.gram_h") ? b.matrix("space.gram_h") : std::nullopt;
                auto gv = b.has("space.gram_v") ? b.matrix("space.gram_v") : std::nullopt;
                if (!gh && gv) {
                    gh = Matrix::Identity(gv->rows(), gv->cols());
                }
                if (!gv && gh) {
                    gv = *gh;
                }
                if (gh && gv) {
                    if (b.has("space.dim") && b.number("space.dim") != static_cast<double>(gh->rows())) {
                        b.issue("space.dim", "does not match the gram matrix size");
                    }
                    try {
                        s.triple = GelfandTriple::make(*gh, *gv);
                    } catch (const Error& e) {
                        b.issue("space", e.what());
                    }
                }
            } else if (const auto n = b.count("space.dim", 1, 1)) {
                s.triple = GelfandTriple::identity(static_cast<Index>(*n));
            }
        } else if (s.kind == "dirichlet") {
            const auto n = b.count("space.n_modes", 8, 1);
            const double len = b.number_or("space.length", 1.0);
            if (!(len > 0.0)) {
                b.issue("space.length", "must be positive");
            } else if (n) {
                s.dirichlet = dirichlet_model(*n, len);
                s.triple = s.dirichlet->triple();
                s.form = s.dirichlet->form;
            }
        } else if (s.kind == "divergence") {
            DivergenceSpec spec;
            const auto n = b.count("space.n_cells", 16, 2);
            std::optional<Coefficient> coeff = constant_coefficient(1.0);
            if (b.has("space.coeff")) {
                coeff = b.coefficient("space.coeff");
            }
            if (b.has("space.c1")) {
                spec.c1 = b.coefficient("space.c1");
            }
            if (b.has("space.c0")) {
                spec.c0 = b.coefficient("space.c0");
            }
            spec.omega_shift = b.number_or("space.omega_shift", 0.0);
            if (b.has("space.a_lo")) {
                spec.a_lo = b.number("space.a_lo");
            }
            if (n && coeff && tau && *tau > 0.0 && (!b.has("space.c1") || spec.c1) &&
                (!b.has("space.c0") || spec.c0)) {
                spec.n_cells = *n;
                spec.coeff = *coeff;
                spec.tau = *tau;
                s.divergence = divergence_form_model(spec);
                s.triple = s.divergence->triple();
                s.form = s.divergence->form;
            }
        } else {
            b.issue("space.kind", "unknown kind '" + s.kind + "' (dim, dirichlet, divergence)");
        }
    } catch (const Error& e) {
        b.issue("space", e.what());
    }
    return s;
}

std::optional<FormFamily> build_form(Builder& b, const Space& space, double tau) {
    const std::string kind = b.str("form.kind", space.kind == "dim" ? "matrix" : "builtin");
    const GelfandTriple& triple = *space.triple;
    const Index n = triple.dim();
    const auto samples = uniform_samples(tau);
    if (kind == "builtin") {
        if (!space.form) {
            b.issue("form.kind", "builtin form needs space.kind = dirichlet or divergence");
        }
        return space.form;
    }
    if (space.kind != "dim") {
        b.issue("form.kind", "model spaces only support the builtin form");
        return std::nullopt;
    }
    try {
        if (kind == "matrix") {
            const auto s0 = b.matrix("form.matrix");
            std::optional<Matrix> s1;
            if (b.has("form.matrix_t1")) {
                s1 = b.matrix("form.matrix_t1");
                if (!s1) {
                    return std::nullopt;
                }
            }
            if (!s0) {
                return std::nullopt;
            }
            if (s0->rows() != n || s0->cols() != n || (s1 && (s1->rows() != n || s1->cols() != n))) {
                b.issue("form.matrix", "dimension mismatch: expected " + std::to_string(n) + "x" + std::to_string(n));
                return std::nullopt;
            }
            MatrixFn eval;
            if (s1) {
                eval = [a = *s0, c = *s1](double t) -> Matrix { return a + t * c; };
            } else {
                eval = [a = *s0](double) { return a; };
            }
            return make_form_family(triple, eval, samples, std::nullopt, !s1.has_value());
        }
        if (kind == "samples") {
            if (!b.has("form.samples")) {
                b.issue("form.samples", "required");
                return std::nullopt;
            }
            const auto rows = read_csv_rows(b.path("form.samples"));
            std::vector<double> ts;
            std::vector<Matrix> ms;
            for (const auto& row : rows) {
                if (static_cast<Index>(row.size()) != 1 + n * n) {
                    b.issue("form.samples", "each row needs t followed by " + std::to_string(n * n) + " entries");
                    return std::nullopt;
                }
                if (!ts.empty() && row[0] <= ts.back()) {
                    b.issue("form.samples", "sample times must be strictly increasing");
                    return std::nullopt;
                }
                ts.push_back(row[0]);
                Matrix m(n, n);
                for (Index i = 0; i < n; ++i) {
                    for (Index j = 0; j < n; ++j) {
                        m(i, j) = row[static_cast<std::size_t>(1 + i * n + j)];
                    }
                }
                ms.push_back(std::move(m));
            }
            if (ts.empty()) {
                b.issue("form.samples", "no samples");
                return std::nullopt;
            }
            const bool constant = std::all_of(ms.begin(), ms.end(), [&](const Matrix& m) { return m == ms[0]; });
            MatrixFn eval = SampledMatrix(std::move(ts), std::move(ms));
            return make_form_family(triple, eval, samples, std::nullopt, constant);
        }
        b.issue("form.kind", "unknown kind '" + kind + "' (matrix, samples, builtin)");
    } catch (const Error& e) {
        b.issue("form", e.what());
    }
    return std::nullopt;
}

double gram_distortion(const GelfandTriple& triple) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(triple.gram_h(), Eigen::EigenvaluesOnly);
    return std::sqrt(es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff());
}

std::optional<BoundaryMap> build_boundary(Builder& b, const GelfandTriple& triple) {
    const std::string kind = b.str("boundary.kind", "zero");
    const Index n = triple.dim();
    try {
        if (kind == "zero") {
            return BoundaryMap::zero();
        }
        if (kind == "identity") {
            return BoundaryMap::identity();
        }
        if (kind == "antiperiodic") {
            return BoundaryMap::scalar(-1.0);
        }
        if (kind == "scalar") {
            if (const auto c = b.required_number("boundary.c")) {
                return BoundaryMap::scalar(*c);
            }
            return std::nullopt;
        }
        if (kind == "dense") {
            const auto m = b.matrix("boundary.matrix");
            if (!m) {
                return std::nullopt;
            }
            if (m->rows() != n || m->cols() != n) {
                b.issue("boundary", "dimension mismatch: dense map is " + std::to_string(m->rows()) + "x" +
                                        std::to_string(m->cols()) + ", space has dimension " + std::to_string(n));
                return std::nullopt;
            }
            return BoundaryMap::dense(*m);
        }
        if (kind == "rank_one") {
            const auto x0 = b.vector("boundary.x0", n);
            const auto xp = b.vector("boundary.xprime", n);
            if (x0 && xp) {
                return BoundaryMap::rank_one(*x0, *xp);
            }
            return std::nullopt;
        }
        if (kind == "nonlinear_builtin") {
            const std::string name = b.str("boundary.name", "scaled_sin");
            if (name != "scaled_sin") {
                b.issue("boundary.name", "unknown nonlinear map '" + name + "' (scaled_sin)");
                return std::nullopt;
            }
            const double c = b.number_or("boundary.c", 0.5);
            const double computed = std::abs(c) * gram_distortion(triple);
            double l = computed;
            if (b.has("boundary.lipschitz_l")) {
                l = b.number_or("boundary.lipschitz_l", computed);
                if (l < computed * (1.0 - 1e-12)) {
                    b.issue("boundary.lipschitz_l", "below the Lipschitz constant of the map (" +
                                                        format_double(computed) + ")");
                    return std::nullopt;
                }
            }
            return BoundaryMap::nonlinear([c](const Vector& x) -> Vector { return c * x.array().sin().matrix(); },
                                          l);
        }
        b.issue("boundary.kind", "unknown kind '" + kind +
                                     "' (zero, identity, scalar, antiperiodic, dense, rank_one, nonlinear_builtin)");
    } catch (const Error& e) {
        b.issue("boundary", e.what());
    }
    return std::nullopt;
}

std::optional<ForcingTerm> build_forcing(Builder& b, Index n, const TimeGrid& grid) {
    const std::string kind = b.str("forcing.kind", "zero");
    try {
        if (kind == "zero") {
            return ForcingTerm::zero();
        }
        if (kind == "constant") {
            if (const auto v = b.vector("forcing.value", n)) {
                return ForcingTerm::constant(*v);
            }
            return std::nullopt;
        }
        if (kind == "builtin") {
            const std::string name = b.str("forcing.name", "ones");
            const double tau = grid.tau();
            if (name == "ones") {
                return ForcingTerm::constant(Vector::Ones(n));
            }
            if (name == "sine") {
                return ForcingTerm::closure([n, tau](double t) -> Vector {
                    return Vector::Constant(n, std::sin(2.0 * std::numbers::pi * t / tau));
                });
            }
            if (name == "decay") {
                return ForcingTerm::closure([n](double t) -> Vector { return Vector::Constant(n, std::exp(-t)); });
            }
            b.issue("forcing.name", "unknown forcing '" + name + "' (ones, sine, decay)");
            return std::nullopt;
        }
        if (kind == "samples") {
            if (!b.has("forcing.path")) {
                b.issue("forcing.path", "required");
                return std::nullopt;
            }
            const auto rows = read_csv_rows(b.path("forcing.path"));
            std::vector<double> ts;
            std::vector<Vector> vs;
            for (const auto& row : rows) {
                if (static_cast<Index>(row.size()) != 1 + n) {
                    b.issue("forcing.path", "each row needs t followed by " + std::to_string(n) + " entries");
                    return std::nullopt;
                }
                if (!ts.empty() && row[0] <= ts.back()) {
                    b.issue("forcing.path", "sample times must be strictly increasing");
                    return std::nullopt;
                }
                ts.push_back(row[0]);
                vs.push_back(Eigen::Map<const Vector>(row.data() + 1, n));
            }
            if (ts.empty()) {
                b.issue("forcing.path", "no samples");
                return std::nullopt;
            }
            if (ts == grid.nodes()) {
                return ForcingTerm::sampled(std::move(vs));
            }
            return ForcingTerm::closure(SampledVector(std::move(ts), std::move(vs)));
        }
        b.issue("forcing.kind", "unknown kind '" + kind + "' (zero, constant, samples, builtin)");
    } catch (const Error& e) {
        b.issue("forcing", e.what());
    }
    return std::nullopt;
}

std::optional<SemilinearSpec> build_semilinear(Builder& b, const GelfandTriple& triple, double tau) {
    const std::string name = b.str("semilinear.name");
    const double a = b.number_or("semilinear.a", 0.25);
    const double c = b.number_or("semilinear.b", 0.5);
    std::optional<SemilinearSpec> spec;
    if (name == "sin_affine") {
        spec = sin_affine_nonlinearity(a, c, triple, tau);
    } else if (name == "affine") {
        spec = affine_nonlinearity(a, c, triple, tau);
    } else {
        b.issue("semilinear.name", "unknown nonlinearity '" + name + "' (sin_affine, affine)");
        return std::nullopt;
    }
    // User-supplied growth constants may only weaken the computed ones.
    if (const auto a2 = b.number("semilinear.alpha2")) {
        if (*a2 < spec->alpha2 * (1.0 - 1e-12)) {
            b.issue("semilinear.alpha2", "below the growth constant of the nonlinearity (" +
                                             format_double(spec->alpha2) + ")");
        }
        spec->alpha2 = *a2;
    }
    if (const auto b1 = b.number("semilinear.beta1")) {
        if (*b1 < spec->beta1 * (1.0 - 1e-12)) {
            b.issue("semilinear.beta1", "below the growth constant of the nonlinearity (" +
                                            format_double(spec->beta1) + ")");
        }
        spec->beta1 = *b1;
    }
    return spec;
}

}  // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : Error(join_issues(issues)), issues_(std::move(issues)) {}

std::string ProblemConfig::get(const std::string& key, const std::string& fallback) const {
    const auto it = entries.find(key);
    return it == entries.end() ? fallback : it->second;
}

ProblemConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir) {
    ProblemConfig c;
    c.base_dir = base_dir;
    std::vector<ConfigIssue> issues;
    std::stringstream ss(text);
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(ss, raw)) {
        ++lineno;
        std::string line = raw;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.resize(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            issues.push_back({lineno, "", "expected 'key = value'"});
            continue;
        }
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (!valid_key(key)) {
            issues.push_back({lineno, key, "invalid key"});
            continue;
        }
        if (!known_keys().count(key)) {
            issues.push_back({lineno, key, "unknown key"});
            continue;
        }
        if (c.entries.count(key)) {
            issues.push_back({lineno, key, "duplicate key (first on line " + std::to_string(c.lines[key]) + ")"});
            continue;
        }
        if (value.empty()) {
            issues.push_back({lineno, key, "empty value"});
            continue;
        }
        c.entries[key] = value;
        c.lines[key] = lineno;
    }
    if (!c.has("schema")) {
        issues.push_back({0, "schema", "missing 'schema = 1'"});
    } else if (c.get("schema") != "1") {
        issues.push_back({c.lines["schema"], "schema", "unsupported schema version '" + c.get("schema") + "'"});
    }
    if (!issues.empty()) {
        throw ConfigError(std::move(issues));
    }
    return c;
}

ProblemConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError({{0, "config", "cannot read " + path.string()}});
    }
    std::stringstream ss;
    ss << in.rdbuf();
    ProblemConfig c = parse_config_text(ss.str(), path.has_parent_path() ? path.parent_path() : ".");
    (void)build_problem(c);
    return c;
}

std::string write_config(const ProblemConfig& config) {
    std::string s = "schema = 1\n";
    for (const auto& [k, v] : config.entries) {
        if (k != "schema") {
            s += k + " = " + v + "\n";
        }
    }
    return s;
}

Problem build_problem(const ProblemConfig& config) {
    Builder b(config);

    // Scalars first so their errors are reported even when the space is broken.
    const auto tau = b.required_number("time.tau");
    if (tau && !(*tau > 0.0)) {
        b.issue("time.tau", "must be positive");
    }
    const auto steps = b.count("time.steps", 512, 1);
    Method method = Method::crank_nicolson;
    try {
        method = parse_method(b.str("time.method", "crank_nicolson"));
    } catch (const Error& e) {
        b.issue("time.method", e.what());
    }
    const double tol = b.number_or("run.tol", 1e-10);
    if (!(tol > 0.0)) {
        b.issue("run.tol", "must be positive");
    }
    const auto max_iter = b.count("run.max_iter", 200, 1);
    std::uint64_t seed = kDefaultSeed;
    if (const auto s = b.count("run.seed", kDefaultSeed, 0)) {
        seed = *s;
    }
    std::optional<double> singular_tol;
    if (b.has("run.singular_tol")) {
        singular_tol = b.number("run.singular_tol");
        if (singular_tol && !(*singular_tol >= 0.0)) {
            b.issue("run.singular_tol", "must be nonnegative");
        }
    }
    std::optional<SweepSpec> sweep;
    if (b.has("sweep.parameter")) {
        SweepSpec sw;
        sw.parameter = b.str("sweep.parameter");
        if (sw.parameter != "phi_scale" && sw.parameter != "tau") {
            b.issue("sweep.parameter", "unknown parameter '" + sw.parameter + "' (phi_scale, tau)");
        }
        sw.min = b.number_or("sweep.min", 0.0);
        sw.max = b.number_or("sweep.max", 1.0);
        if (const auto p = b.count("sweep.points", 11, 2)) {
            sw.points = *p;
        }
        if (!(sw.max > sw.min)) {
            b.issue("sweep.max", "must exceed sweep.min");
        }
        if (sw.parameter == "tau" && !(sw.min > 0.0)) {
            b.issue("sweep.min", "tau sweep must start above 0");
        }
        sweep = sw;
    }

    const bool time_ok = tau && *tau > 0.0 && steps;
    Space space = build_space(b, time_ok ? tau : std::optional<double>(1.0));
    if (!space.triple) {
        throw ConfigError(b.issues);
    }
    const GelfandTriple& triple = *space.triple;
    // A broken time section still lets the remaining sections be validated on a placeholder grid.
    const TimeGrid grid = time_ok ? TimeGrid::uniform(*tau, *steps, method) : TimeGrid::uniform(1.0, 1, method);

    const auto form = build_form(b, space, grid.tau());
    const auto phi = build_boundary(b, triple);
    const auto forcing = build_forcing(b, triple.dim(), grid);
    Vector y0 = Vector::Zero(triple.dim());
    if (b.has("boundary.y0")) {
        if (const auto v = b.vector("boundary.y0", triple.dim())) {
            y0 = *v;
        }
    }
    std::optional<SemilinearSpec> semilinear;
    if (b.has("semilinear.name")) {
        semilinear = build_semilinear(b, triple, grid.tau());
    }
    if (!b.issues.empty() || !form || !phi || !forcing) {
        throw ConfigError(b.issues);
    }
    if (phi->kind() == BoundaryKind::dense && !phi->check_maps_into_v(triple)) {
        b.issue("boundary.matrix", "images are not finite in V");
        throw ConfigError(b.issues);
    }

    Problem p{space.kind, triple, form, operator_family(*form), *phi, y0, grid, *forcing};
    p.semilinear = semilinear;
    p.dirichlet = space.dirichlet;
    p.divergence = space.divergence;
    p.sweep = sweep;
    p.tol = tol;
    p.max_iter = max_iter.value_or(200);
    p.seed = seed;
    p.singular_tol = singular_tol;
    return p;
}

}  // namespace evobc
