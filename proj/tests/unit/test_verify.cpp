#include "evobc/verify.hpp"
#include "evobc/config.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace evobc;

namespace {

constexpr double ln2 = std::numbers::ln2;
// 3^{-1/2} - e^{-1}
constexpr double kWitnessMargin = 0.2094708280181834;

FormFamily scalar_form() { return constant_form(GelfandTriple::identity(1), Matrix::Ones(1, 1)); }
Vector one(double x) { return Vector::Constant(1, x); }

Trajectory sampled(const TimeGrid& g, const std::function<double(double)>& f) {
    Trajectory u{g};
    for (double t : g.nodes()) {
        u.values.push_back(one(f(t)));
    }
    return u;
}

}  // namespace

TEST(CheckReport, EmptyReportFails) {
    CheckReport r;
    r.finish();
    EXPECT_FALSE(r.pass);
}

TEST(CheckReport, PassUsesTolerance) {
    CheckReport r;
    r.tolerance = 1e-3;
    EXPECT_TRUE(r.observe(0.5));
    EXPECT_TRUE(r.observe(-5e-4));
    EXPECT_FALSE(r.observe(0.1));
    r.add_row({"x"});
    r.finish();
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.trials, 3u);
}

TEST(CheckReport, NanCountsAsFailure) {
    CheckReport r;
    r.observe(std::nan(""));
    r.add_row({"x"});
    r.finish();
    EXPECT_FALSE(r.pass);
}

TEST(TrialSeed, DeterministicAndDistinct) {
    EXPECT_EQ(trial_seed(7, 3), trial_seed(7, 3));
    EXPECT_NE(trial_seed(7, 3), trial_seed(7, 4));
    EXPECT_NE(trial_seed(7, 3), trial_seed(8, 3));
}

TEST(RandomCoerciveFamily, IsCoerciveWithEmbeddingAtLeastOne) {
    Rng rng(11);
    for (int k = 0; k < 20; ++k) {
        const auto f = random_coercive_family(rng, 1 + k % 8, 1.0);
        EXPECT_GE(f.form.triple.c_h(), 1.0);
        EXPECT_GT(max_coercivity(f.form, uniform_samples(1.0)), 0.0);
        EXPECT_EQ(f.form.omega, 0.0);
    }
}

TEST(HNormBound, ScalarWitness) {
    const auto r = check_h_norm_bound(scalar_form(), TimeGrid::uniform(1.0, 64, Method::exact_autonomous), 4, 1);
    EXPECT_TRUE(r.pass);
    EXPECT_NEAR(r.worst_margin, kWitnessMargin, 1e-12);
}

TEST(HNormBound, ShortTimeMarginVanishes) {
    const auto r = check_h_norm_bound(scalar_form(), TimeGrid::uniform(1e-6, 4), 2, 1);
    EXPECT_TRUE(r.pass);
    EXPECT_GE(r.worst_margin, 0.0);
    EXPECT_LT(r.worst_margin, 1e-11);
}

TEST(HNormBound, RandomEightDimensionalFamilies) {
    CheckReport worst;
    for (std::size_t i = 0; i < 100; ++i) {
        Rng rng(trial_seed(42, i));
        const double tau = i % 2 ? 1.0 : 0.1;
        const auto f = random_coercive_family(rng, 8, tau);
        const auto r = check_h_norm_bound(f.form, TimeGrid::uniform(tau, 64), 2, trial_seed(43, i));
        ASSERT_GE(r.worst_margin, -1e-9) << "instance " << i;
    }
}

TEST(HNormBound, SuiteReportsReplayOnlyWhenNeeded) {
    const auto r = check_h_norm_bound_suite(5, 4, 32, 3);
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.rows.size(), 5u);
    EXPECT_NE(format_report(r).find("[check h_norm_bound_random]"), std::string::npos);
    EXPECT_EQ(format_report(r).find("replay:"), std::string::npos);
}

TEST(EnergyDecay, DirichletDecreases) {
    const auto m = dirichlet_model(8);
    const auto r = check_energy_decay(m.form, TimeGrid::uniform(0.2, 128), 10, 5);
    EXPECT_TRUE(r.pass);
    EXPECT_GT(r.worst_margin, 0.0);
}

TEST(EnergyDecay, ZeroInitialHasZeroMargin) {
    const auto m = dirichlet_model(4);
    const auto r = check_energy_decay(m.form, TimeGrid::uniform(0.2, 16), std::vector<Vector>{Vector::Zero(4)});
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.worst_margin, 0.0);
}

TEST(EnergyDecay, ShiftedFormRejected) {
    const auto f = constant_form(GelfandTriple::identity(1), Matrix::Constant(1, 1, -1.0));
    ASSERT_GT(f.omega, 0.0);
    EXPECT_THROW(check_energy_decay(f, TimeGrid::uniform(1.0, 8), 2, 1), HypothesisFailed);
}

TEST(IntegrationByParts, ConstantsGiveZero) {
    const TimeGrid g = TimeGrid::uniform(1.0, 16);
    const auto v = sampled(g, [](double) { return 2.0; });
    const auto r = check_integration_by_parts(v, v, GelfandTriple::identity(1));
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.worst_margin, 0.0);
}

TEST(IntegrationByParts, LinearTimesConstantIsExact) {
    const TimeGrid g({0.0, 0.2, 0.3, 0.7, 1.0});
    const auto v = sampled(g, [](double t) { return t; });
    const auto w = sampled(g, [](double) { return 1.0; });
    const auto r = check_integration_by_parts(v, w, GelfandTriple::identity(1));
    EXPECT_TRUE(r.pass);
    EXPECT_NEAR(r.worst_margin, 0.0, 1e-15);
}

TEST(IntegrationByParts, GridMismatch) {
    const auto v = sampled(TimeGrid::uniform(1.0, 4), [](double t) { return t; });
    const auto w = sampled(TimeGrid::uniform(1.0, 8), [](double t) { return t; });
    EXPECT_THROW(check_integration_by_parts(v, w, GelfandTriple::identity(1)), GridMismatch);
}

TEST(IntegrationByParts, SecondOrderUnderRefinement) {
    const auto m = dirichlet_model(4);
    Vector x(4);
    x << 1.0, -0.5, 0.25, 0.1;
    double prev = 0.0;
    // Below ~512 steps the top mode (lambda h > 1) is not yet in the asymptotic regime.
    for (std::size_t steps : {512u, 1024u, 2048u}) {
        const TimeGrid g = TimeGrid::uniform(0.5, steps);
        const auto v = evolve(m.family, x, ForcingTerm::constant(Vector::Ones(4)), g);
        const auto w = evolve_homogeneous(m.family, x.reverse(), g);
        const auto r = check_integration_by_parts(v, w, m.triple());
        EXPECT_TRUE(r.pass);
        const double residual = -r.worst_margin;
        if (prev > 0.0) {
            EXPECT_NEAR(std::log2(prev / residual), 2.0, 0.5);
        }
        prev = residual;
    }
}

TEST(SpaceTimePairing, ConstantPeriodicIsFormIntegral) {
    const auto m = dirichlet_model(3);
    const TimeGrid g = TimeGrid::uniform(0.5, 10);
    Trajectory u{g};
    const Vector x = Vector::Ones(3);
    u.values.assign(11, x);
    EXPECT_NEAR(space_time_pairing(m.form, u), 0.5 * x.dot(m.form.eval(0.0) * x), 1e-10);
}

TEST(MAccretive, DirichletWithContraction) {
    const auto m = dirichlet_model(16);
    const auto r = check_m_accretive(m.form, BoundaryMap::scalar(0.9), TimeGrid::uniform(0.1, 64), 100, 10, 9);
    EXPECT_TRUE(r.pass);
    EXPECT_GE(r.worst_margin, -1e-9);
    EXPECT_EQ(r.trials, 110u);
}

TEST(MAccretive, ZeroMapPasses) {
    const auto m = dirichlet_model(4);
    EXPECT_TRUE(check_m_accretive(m.form, BoundaryMap::zero(), TimeGrid::uniform(0.1, 16), 20, 2, 1).pass);
}

TEST(MAccretive, ExpansiveMapRejected) {
    const auto m = dirichlet_model(4);
    EXPECT_THROW(check_m_accretive(m.form, BoundaryMap::scalar(1.1), TimeGrid::uniform(0.1, 16), 5, 1, 1),
                 HypothesisFailed);
}

TEST(Equivalence, ExactSingularPair) {
    const auto fam = operator_family(scalar_form());
    const TimeGrid g = TimeGrid::uniform(ln2, 32, Method::exact_autonomous);
    const auto r = check_equivalence({{fam, BoundaryMap::scalar(2.0), g, ForcingTerm::constant(one(1.0)), ""}});
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.rows[0][4], "singular");
}

TEST(Equivalence, PeriodicDirichletIsInvertible) {
    const auto m = dirichlet_model(8);
    const auto r = check_equivalence(
        {{m.family, BoundaryMap::identity(), TimeGrid::uniform(0.1, 64), ForcingTerm::constant(Vector::Ones(8)), ""}});
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.rows[0][4], "well_posed");
}

TEST(Equivalence, ConstructedTinySigmaFindsSecondSolution) {
    // Phi = 2 (1 + 1e-14): sigma_min = 1e-14 is below the singular threshold.
    const auto fam = operator_family(scalar_form());
    const TimeGrid g = TimeGrid::uniform(ln2, 32, Method::exact_autonomous);
    const auto r = check_equivalence(
        {{fam, BoundaryMap::scalar(2.0 * (1.0 + 1e-14)), g, ForcingTerm::constant(one(1.0)), ""}});
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.rows[0][6], "true");
}

TEST(Equivalence, HundredRandomInstances) {
    const auto r = check_equivalence(random_equivalence_instances(100, 8, 2024));
    EXPECT_TRUE(r.pass) << format_report(r);
    EXPECT_EQ(r.trials, 100u);
}

TEST(SufficiencyOrdering, FlagsImplyWellPosed) {
    EXPECT_TRUE(check_sufficiency_ordering(50, 6, 17).pass);
}

TEST(HRegularity, DirichletSmoothForcing) {
    const auto m = dirichlet_model(16);
    const auto r = check_h_regularity(m.form, BoundaryMap::zero(), ForcingTerm::constant(Vector::Ones(16)),
                                      TimeGrid::uniform(0.5, 32), 4);
    EXPECT_TRUE(r.pass);
}

TEST(HRegularity, DivergenceFormTimeDependent) {
    DivergenceSpec s;
    s.n_cells = 16;
    s.coeff = affine_t_coefficient(1.0, 0.5);
    const auto m = divergence_form_model(s);
    const auto r = check_h_regularity(m.form, BoundaryMap::scalar(0.5), ForcingTerm::constant(Vector::Ones(15)),
                                      TimeGrid::uniform(1.0, 32), 4);
    EXPECT_TRUE(r.pass);
}

TEST(HRegularity, ZeroDataStaysZero) {
    const auto m = dirichlet_model(4);
    const auto r = check_h_regularity(m.form, BoundaryMap::zero(), ForcingTerm::zero(), TimeGrid::uniform(0.5, 8), 3);
    EXPECT_TRUE(r.pass);
}

TEST(HRegularity, NeedsDecomposition) {
    EXPECT_THROW(check_h_regularity(scalar_form(), BoundaryMap::zero(), ForcingTerm::zero(),
                                    TimeGrid::uniform(1.0, 8), 3),
                 HypothesisFailed);
}

TEST(Continuity, ZeroPerturbationIsExact) {
    const auto fam = operator_family(scalar_form());
    const auto r = check_continuity(fam, BoundaryMap::identity(), ForcingTerm::constant(one(1.0)), ForcingTerm::zero(),
                                    TimeGrid::uniform(ln2, 64), 4);
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.worst_margin, 0.0);
}

TEST(Continuity, HalvingPerturbationHalvesDifference) {
    const auto fam = operator_family(scalar_form());
    const auto r = check_continuity(fam, BoundaryMap::identity(), ForcingTerm::constant(one(1.0)),
                                    ForcingTerm::constant(one(1.0)), TimeGrid::uniform(ln2, 256), 6);
    EXPECT_TRUE(r.pass);
    for (std::size_t k = 1; k < r.rows.size(); ++k) {
        EXPECT_NEAR(std::stod(r.rows[k][4]), 0.5, 0.025);
    }
}

TEST(Continuity, SignAlternationKeepsBound) {
    const auto fam = operator_family(scalar_form());
    const auto delta = ForcingTerm::closure([](double t) { return one(std::cos(3.0 * t)); });
    const auto r = check_continuity(fam, BoundaryMap::scalar(-0.5), ForcingTerm::constant(one(1.0)), delta,
                                    TimeGrid::uniform(1.0, 256), 6, true);
    EXPECT_TRUE(r.pass);
}

TEST(ModelChecks, DecayAndAccretivity) {
    const auto m = dirichlet_model(64);
    EXPECT_TRUE(check_v_norm_decay(m, 0.1, 64, Method::exact_autonomous).pass);
    EXPECT_TRUE(check_singular_value_decay(m, TimeGrid::uniform(0.1, 64, Method::exact_autonomous)).pass);
    DivergenceSpec s;
    s.n_cells = 32;
    EXPECT_TRUE(check_accretivity_example(divergence_form_model(s), 1.0).pass);
}

TEST(SemilinearBound, ScalarSinAffine) {
    const auto f = scalar_form();
    const auto r = check_semilinear_bound(f, BoundaryMap::identity(), sin_affine_nonlinearity(0.25, 0.5, f.triple, ln2),
                                          TimeGrid::uniform(ln2, 256));
    EXPECT_TRUE(r.pass);
}

TEST(DefaultSuite, AllGreenAndDeterministic) {
    const auto a = run_default_suite(kDefaultSeed);
    for (const auto& r : a) {
        EXPECT_TRUE(r.pass) << format_report(r);
    }
    const auto b = run_default_suite(kDefaultSeed);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].worst_margin, b[i].worst_margin) << a[i].name;
    }
}

TEST(Reports, CsvHeaderAndFailingReplay) {
    CheckReport r;
    r.name = "demo";
    r.tolerance = 0.0;
    r.observe(-1.0);
    r.add_row({"1"});
    r.replay = "schema = 1\ntime.tau = 1\n";
    r.finish();
    const auto text = format_report(r);
    EXPECT_NE(text.find("pass = false"), std::string::npos);
    EXPECT_NE(text.find("replay:\n  schema = 1"), std::string::npos);
    EXPECT_EQ(reports_csv({r}).rfind("name,trials,tolerance,worst_margin,pass\n", 0), 0u);
}
