#include "evobc/boundary.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace evobc;

namespace {

constexpr double ln2 = std::numbers::ln2;

// Frozen oracles, computed independently of this library.
// x = 0.5 sin(e^{-1} x + 1 - e^{-1}) by bisection.
constexpr double kNonlinearFixedPoint = 0.34397552973145318;
// (1 + 2 ln 2)^{1/2}
constexpr double kEnergyBoundLn2 = 1.544763529191407;

const GelfandTriple& one_dim() {
    static const GelfandTriple t = GelfandTriple::identity(1);
    return t;
}

FormFamily scalar_form() { return constant_form(one_dim(), Matrix::Ones(1, 1)); }
OperatorFamily scalar_family() { return operator_family(scalar_form()); }
Vector one(double x) { return Vector::Constant(1, x); }

}  // namespace

TEST(BoundaryMap, KindsAndMatrices) {
    const auto& t = one_dim();
    EXPECT_DOUBLE_EQ(BoundaryMap::zero().matrix(t)(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(BoundaryMap::identity().matrix(t)(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(BoundaryMap::scalar(-1.0).matrix(t)(0, 0), -1.0);
    EXPECT_TRUE(BoundaryMap::scalar(2.0).is_linear());
    EXPECT_FALSE(BoundaryMap::nonlinear([](const Vector& x) { return x; }, 1.0).is_linear());
}

TEST(BoundaryMap, RankOneUsesHInnerProduct) {
    Matrix gh(2, 2);
    gh << 2.0, 0.0, 0.0, 1.0;
    const auto t = GelfandTriple::make(gh, 2.0 * gh);
    Vector x0(2), xp(2), x(2);
    x0 << 1.0, 1.0;
    xp << 1.0, 0.0;
    x << 3.0, 5.0;
    const auto phi = BoundaryMap::rank_one(x0, xp);
    // <xprime, x>_H = 2 * 3
    EXPECT_TRUE(phi.apply(x, t).isApprox(6.0 * x0));
    EXPECT_TRUE((phi.matrix(t) * x).isApprox(6.0 * x0));
}

TEST(BoundaryMap, NonlinearHasNoMatrix) {
    const auto phi = BoundaryMap::nonlinear([](const Vector& x) { return x; }, 1.0);
    EXPECT_THROW(phi.matrix(one_dim()), WrongKind);
}

TEST(BoundaryMap, PrecomposedNonlinear) {
    const auto phi = BoundaryMap::nonlinear([](const Vector& x) { return Vector(x.array().sin()); }, 1.0);
    const auto p = phi.precomposed(0.5);
    EXPECT_NEAR(p.apply(one(2.0), one_dim())(0), std::sin(1.0), 1e-15);
    EXPECT_DOUBLE_EQ(p.lipschitz_l(), 0.5);
}

TEST(AssembleBoundarySystem, ZeroMapGivesIdentity) {
    const auto p = propagator_matrix(scalar_family(), TimeGrid::uniform(ln2, 8, Method::exact_autonomous));
    EXPECT_DOUBLE_EQ(assemble_boundary_system(p, BoundaryMap::zero(), one_dim())(0, 0), 1.0);
}

TEST(AssembleBoundarySystem, PeriodicAndSingular) {
    const auto p = propagator_matrix(scalar_family(), TimeGrid::uniform(ln2, 8, Method::exact_autonomous));
    EXPECT_NEAR(assemble_boundary_system(p, BoundaryMap::identity(), one_dim())(0, 0), 0.5, 1e-15);
    EXPECT_NEAR(assemble_boundary_system(p, BoundaryMap::scalar(2.0), one_dim())(0, 0), 0.0, 1e-15);
}

TEST(AssembleBoundarySystem, NonlinearRejected) {
    const auto p = propagator_matrix(scalar_family(), TimeGrid::uniform(ln2, 8));
    const auto phi = BoundaryMap::nonlinear([](const Vector& x) { return x; }, 1.0);
    EXPECT_THROW(assemble_boundary_system(p, phi, one_dim()), WrongKind);
}

TEST(WeightedSvd, RecoversWeightedSingularValues) {
    Matrix g(2, 2);
    g << 4.0, 0.0, 0.0, 1.0;
    Matrix m = Matrix::Zero(2, 2);
    m(1, 0) = 1.0;
    const auto s = weighted_svd(m, g);
    EXPECT_NEAR(s.singular_values(0), 0.5, 1e-14);
    EXPECT_NEAR(s.singular_values(1), 0.0, 1e-14);
    EXPECT_NEAR((m * s.null_direction).norm(), 0.0, 1e-14);
}

TEST(SolveLinearBvp, PeriodicScalarIsConstantOne) {
    const auto u = solve_linear_bvp(scalar_family(), BoundaryMap::identity(), ForcingTerm::constant(one(1.0)),
                                    Vector::Zero(1), TimeGrid::uniform(ln2, 512));
    for (const auto& x : u.values) {
        EXPECT_NEAR(x(0), 1.0, 1e-8);
    }
    EXPECT_LT(*u.residual_bc, 1e-12);
}

TEST(SolveLinearBvp, AntiperiodicScalar) {
    const TimeGrid g = TimeGrid::uniform(ln2, 512, Method::exact_autonomous);
    const auto u = solve_linear_bvp(scalar_family(), BoundaryMap::scalar(-1.0), ForcingTerm::constant(one(1.0)),
                                    Vector::Zero(1), g);
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        EXPECT_NEAR(u.values[i](0), 1.0 - 4.0 / 3.0 * std::exp(-g.node(i)), 1e-12);
    }
    EXPECT_NEAR(u.initial()(0), -1.0 / 3.0, 1e-12);
    EXPECT_NEAR(u.final()(0), 1.0 / 3.0, 1e-12);
}

TEST(SolveLinearBvp, ZeroMapIsInitialValueProblem) {
    const auto fam = scalar_family();
    const TimeGrid g = TimeGrid::uniform(1.0, 64);
    const auto f = ForcingTerm::closure([](double t) { return one(std::sin(t)); });
    const auto u = solve_linear_bvp(fam, BoundaryMap::zero(), f, Vector::Zero(1), g);
    const auto w = duhamel(fam, f, g);
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        EXPECT_NEAR(u.values[i](0), w.values[i](0), 1e-15);
    }
}

TEST(SolveLinearBvp, InhomogeneousBoundaryData) {
    // u' + u = 0, u(0) = u(tau) + y0: x = y0 / (1 - e^{-tau}).
    const TimeGrid g = TimeGrid::uniform(ln2, 16, Method::exact_autonomous);
    const auto u = solve_linear_bvp(scalar_family(), BoundaryMap::identity(), ForcingTerm::zero(), one(0.25), g);
    EXPECT_NEAR(u.initial()(0), 0.5, 1e-14);
}

TEST(SolveLinearBvp, SingularSystemThrowsWithSigma) {
    const TimeGrid g = TimeGrid::uniform(ln2, 16, Method::exact_autonomous);
    try {
        solve_linear_bvp(scalar_family(), BoundaryMap::scalar(2.0), ForcingTerm::constant(one(1.0)),
                         Vector::Zero(1), g);
        FAIL() << "expected NotWellPosed";
    } catch (const NotWellPosed& e) {
        EXPECT_LT(e.sigma_min(), 1e-14);
    }
}

TEST(LinearBoundarySolver, VerdictBands) {
    const TimeGrid g = TimeGrid::uniform(ln2, 16, Method::exact_autonomous);
    EXPECT_EQ(LinearBoundarySolver(scalar_family(), BoundaryMap::identity(), g).verdict(), Verdict::well_posed);
    EXPECT_EQ(LinearBoundarySolver(scalar_family(), BoundaryMap::scalar(2.0), g).verdict(), Verdict::singular);
    // sigma_min = 0.5e-7 lies between 1e-10 and 1e-6 of the scale.
    EXPECT_EQ(LinearBoundarySolver(scalar_family(), BoundaryMap::scalar(2.0 - 1e-7), g).verdict(),
              Verdict::near_singular);
}

TEST(LinearBoundarySolver, ScaleGuardsSingularThreshold) {
    // |Phi| |T| = 1, so the scale is 2.
    const TimeGrid g = TimeGrid::uniform(ln2, 16, Method::exact_autonomous);
    const LinearBoundarySolver s(scalar_family(), BoundaryMap::scalar(2.0), g);
    EXPECT_NEAR(s.scale(), 2.0, 1e-14);
    EXPECT_NEAR(s.singular_tol(), 2e-10, 1e-24);
    const LinearBoundarySolver custom(scalar_family(), BoundaryMap::scalar(2.0), g, 1e-3);
    EXPECT_DOUBLE_EQ(custom.singular_tol(), 1e-3);
}

TEST(Certify, PeriodicScalar) {
    const auto c = certify(scalar_form(), BoundaryMap::identity(), TimeGrid::uniform(ln2, 512));
    EXPECT_NEAR(c.sigma_min, 0.5, 1e-7);
    EXPECT_EQ(c.verdict, Verdict::well_posed);
    EXPECT_TRUE(c.energy.holds);
    EXPECT_NEAR(c.energy.bound, kEnergyBoundLn2, 1e-15);
    EXPECT_TRUE(c.accretive.holds);
    EXPECT_NEAR(c.accretive.bound, 2.0, 1e-14);
}

TEST(Certify, SufficiencyIsNotNecessity) {
    const auto c = certify(scalar_form(), BoundaryMap::scalar(1.9), TimeGrid::uniform(ln2, 512));
    EXPECT_FALSE(c.energy.holds);
    EXPECT_EQ(c.verdict, Verdict::well_posed);
    EXPECT_NEAR(c.sigma_min, 0.05, 1e-6);
}

TEST(Certify, ExactSingularCase) {
    const auto c = certify(scalar_form(), BoundaryMap::scalar(2.0), TimeGrid::uniform(ln2, 64, Method::exact_autonomous));
    EXPECT_EQ(c.verdict, Verdict::singular);
    EXPECT_NEAR(c.sigma_min, 0.0, 1e-15);
}

TEST(Certify, OperatorFamilyHasOnlyAccretiveTest) {
    const auto c = certify(scalar_family(), BoundaryMap::identity(), TimeGrid::uniform(ln2, 64));
    EXPECT_FALSE(c.energy.available);
    EXPECT_FALSE(c.optimized.available);
    EXPECT_TRUE(c.accretive.available);
}

TEST(Certify, FormattedFlagNames) {
    const auto text = format_certificate(certify(scalar_form(), BoundaryMap::identity(), TimeGrid::uniform(ln2, 64)));
    EXPECT_NE(text.find("sufficient_energy.holds = true"), std::string::npos);
    EXPECT_NE(text.find("sufficient_accretive.holds"), std::string::npos);
    EXPECT_NE(text.find("sufficient_optimized.holds"), std::string::npos);
    EXPECT_NE(text.find("verdict = well_posed"), std::string::npos);
}

TEST(DecayBound, KappaSwitchesAtOne) {
    EXPECT_DOUBLE_EQ(decay_constant(2.0), 2.0);
    EXPECT_DOUBLE_EQ(decay_constant(0.5), 0.25);
    EXPECT_NEAR(energy_decay_bound(1.0, 0.0, 1.0, 1.0), 1.0 / std::sqrt(3.0), 1e-15);
}

TEST(SolveNonlinearPhi, ZeroForcingHasZeroFixedPoint) {
    const auto phi = BoundaryMap::nonlinear([](const Vector& x) { return Vector(0.5 * x.array().sin()); }, 0.5);
    const auto r = solve_nonlinear_phi(scalar_family(), phi, ForcingTerm::zero(), TimeGrid::uniform(1.0, 512), 1e-12, 100);
    EXPECT_NEAR(r.x(0), 0.0, 1e-12);
    EXPECT_NEAR(r.q, 0.5 * std::exp(-1.0), 1e-7);
}

TEST(SolveNonlinearPhi, MatchesBisectionOracle) {
    const auto phi = BoundaryMap::nonlinear([](const Vector& x) { return Vector(0.5 * x.array().sin()); }, 0.5);
    const auto r = solve_nonlinear_phi(scalar_family(), phi, ForcingTerm::constant(one(1.0)),
                                       TimeGrid::uniform(1.0, 64, Method::exact_autonomous), 1e-13, 100);
    EXPECT_NEAR(r.x(0), kNonlinearFixedPoint, 1e-8);
    for (std::size_t k = 1; k < r.steps.size(); ++k) {
        if (r.steps[k - 1] > 1e-14) {
            EXPECT_LE(r.steps[k] / r.steps[k - 1], 0.21);
        }
    }
}

TEST(SolveNonlinearPhi, NotContractiveCarriesQ) {
    // L |T| = 1.2 e ... chosen so that q = 1.2 exactly.
    const double l = 1.2 * std::exp(1.0);
    const auto phi = BoundaryMap::nonlinear([l](const Vector& x) { return Vector(l * x.array().sin()); }, l);
    try {
        solve_nonlinear_phi(scalar_family(), phi, ForcingTerm::zero(), TimeGrid::uniform(1.0, 8, Method::exact_autonomous),
                            1e-12, 100);
        FAIL() << "expected NotContractive";
    } catch (const NotContractive& e) {
        EXPECT_NEAR(e.q(), 1.2, 1e-12);
    }
}

TEST(SolveNonlinearPhi, IterationBudgetExhausted) {
    const auto phi = BoundaryMap::nonlinear([](const Vector& x) { return Vector(0.5 * x.array().sin()); }, 0.5);
    EXPECT_THROW(solve_nonlinear_phi(scalar_family(), phi, ForcingTerm::constant(one(1.0)),
                                     TimeGrid::uniform(1.0, 64), 1e-15, 2),
                 NoConvergence);
}

TEST(SolveNonlinearPhi, LinearMapMatchesDirectSolve) {
    const auto phi = BoundaryMap::nonlinear([](const Vector& x) { return Vector(0.5 * x); }, 0.5);
    const TimeGrid g = TimeGrid::uniform(1.0, 128);
    const auto f = ForcingTerm::constant(one(1.0));
    const auto r = solve_nonlinear_phi(scalar_family(), phi, f, g, 1e-14, 200);
    const auto u = solve_linear_bvp(scalar_family(), BoundaryMap::scalar(0.5), f, Vector::Zero(1), g);
    EXPECT_NEAR(r.x(0), u.initial()(0), 1e-12);
}

TEST(RescaleShift, ZeroShiftIsIdentity) {
    const auto fam = scalar_family();
    const auto [g, phi] = rescale_shift(fam, BoundaryMap::identity(), 0.0, ln2);
    EXPECT_DOUBLE_EQ(g.eval(0.3)(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(phi.matrix(one_dim())(0, 0), 1.0);
}

TEST(RescaleShift, ScalarShiftByOne) {
    const auto [g, phi] = rescale_shift(scalar_family(), BoundaryMap::identity(), 1.0, ln2);
    EXPECT_NEAR(g.eval(0.0)(0, 0), 0.0, 1e-15);
    EXPECT_NEAR(phi.matrix(one_dim())(0, 0), 0.5, 1e-15);
}

TEST(RescaleShift, RoundTripMatchesDirectSolve) {
    const auto fam = scalar_family();
    // The shifted forcing e^{0.7 t} is time-dependent, so the CN error needs a fine grid to drop below 1e-9.
    const TimeGrid g = TimeGrid::uniform(ln2, 8192, Method::exact_autonomous);
    const auto f = ForcingTerm::constant(one(1.0));
    const auto direct = solve_linear_bvp(fam, BoundaryMap::identity(), f, Vector::Zero(1), g);
    const auto [sf, sphi] = rescale_shift(fam, BoundaryMap::identity(), 0.7, ln2);
    const auto v = solve_linear_bvp(sf, sphi, rescale_forcing(f, 0.7), Vector::Zero(1), g.with_method(Method::crank_nicolson));
    const auto u = unscale(v, 0.7);
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        EXPECT_NEAR(u.values[i](0), direct.values[i](0), 1e-9);
    }
}

TEST(RescaleShift, NonlinearMapIsPrecomposed) {
    const auto phi = BoundaryMap::nonlinear([](const Vector& x) { return Vector(0.5 * x.array().sin()); }, 0.5);
    const auto [g, p] = rescale_shift(scalar_family(), phi, 1.0, 1.0);
    EXPECT_NEAR(p.apply(one(2.0), one_dim())(0), 0.5 * std::sin(2.0 * std::exp(-1.0)), 1e-15);
}
