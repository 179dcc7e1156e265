#include "evobc/propagator.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace evobc;

namespace {

constexpr double ln2 = std::numbers::ln2;
constexpr double pi = std::numbers::pi;

OperatorFamily scalar_family(double a = 1.0) {
    return constant_operator(GelfandTriple::identity(1), Matrix::Constant(1, 1, a));
}

OperatorFamily affine_family() {
    OperatorFamily f{GelfandTriple::identity(2), [](double t) -> Matrix { return (1.0 + t) * Matrix::Identity(2, 2); }};
    return f;
}

Vector one(double x) { return Vector::Constant(1, x); }

}  // namespace

TEST(TimeGrid, RejectsBadNodes) {
    EXPECT_THROW(TimeGrid({0.0, 0.5, 0.4, 1.0}), InvalidParameter);
    EXPECT_THROW(TimeGrid({0.1, 1.0}), InvalidParameter);
    EXPECT_THROW(TimeGrid::uniform(0.0, 10), InvalidParameter);
    EXPECT_THROW(TimeGrid::uniform(1.0, 0), InvalidParameter);
}

TEST(TimeGrid, RefinedSplitsEveryStep) {
    const TimeGrid g({0.0, 0.25, 1.0});
    const TimeGrid r = g.refined();
    ASSERT_EQ(r.steps(), 4u);
    EXPECT_DOUBLE_EQ(r.node(1), 0.125);
    EXPECT_DOUBLE_EQ(r.node(3), 0.625);
}

TEST(TimeGrid, TrapezoidWeightsSumToTau) {
    const TimeGrid g({0.0, 0.1, 0.5, 2.0});
    double s = 0.0;
    for (double w : g.trapezoid_weights()) {
        s += w;
    }
    EXPECT_NEAR(s, 2.0, 1e-15);
}

TEST(ParseMethod, KnownAndUnknownNames) {
    EXPECT_EQ(parse_method("rk4"), Method::rk4);
    EXPECT_EQ(parse_method("exact_autonomous"), Method::exact_autonomous);
    EXPECT_THROW(parse_method("leapfrog"), InvalidParameter);
}

TEST(EvolveHomogeneous, ScalarDecayCrankNicolson) {
    const std::size_t n = 512;
    const double h = ln2 / n;
    const auto v = evolve_homogeneous(scalar_family(), one(1.0), TimeGrid::uniform(ln2, n));
    // The scheme multiplies by (1 - h/2) / (1 + h/2) each step.
    EXPECT_NEAR(v.final()(0), std::pow((1.0 - h / 2.0) / (1.0 + h / 2.0), n), 1e-14);
    // Leading error tau h^2 e^{-tau} / 12.
    EXPECT_NEAR(v.final()(0), 0.5, 1.05 * ln2 * h * h * 0.5 / 12.0);
}

TEST(EvolveHomogeneous, TimeDependentCoefficient) {
    const auto v = evolve_homogeneous(affine_family(), Vector::Unit(2, 0), TimeGrid::uniform(1.0, 4096));
    EXPECT_NEAR(v.final()(0), 0.22313016014842982, 1e-8);
    EXPECT_NEAR(v.final()(1), 0.0, 1e-15);
}

TEST(EvolveHomogeneous, ZeroInitialStaysZero) {
    const auto v = evolve_homogeneous(affine_family(), Vector::Zero(2), TimeGrid::uniform(1.0, 16));
    for (const auto& x : v.values) {
        EXPECT_EQ(x.norm(), 0.0);
    }
}

TEST(EvolveHomogeneous, AllMethodsAgreeOnScalar) {
    for (Method m : {Method::crank_nicolson, Method::implicit_euler, Method::rk4, Method::exact_autonomous}) {
        const std::size_t steps = m == Method::implicit_euler ? 20000 : 4096;
        const auto v = evolve_homogeneous(scalar_family(), one(1.0), TimeGrid::uniform(ln2, steps, m));
        EXPECT_NEAR(v.final()(0), 0.5, m == Method::implicit_euler ? 1e-5 : 1e-8) << to_string(m);
    }
}

TEST(EvolveHomogeneous, DivergenceIsReported) {
    // Explicit RK4 on a stiff problem with a huge step blows up.
    const auto fam = scalar_family(1e6);
    EXPECT_THROW(evolve_homogeneous(fam, one(1.0), TimeGrid::uniform(2e5, 20, Method::rk4)), IntegrationDiverged);
}

TEST(PropagatorMatrix, ScalarHalf) {
    const auto p = propagator_matrix(scalar_family(), TimeGrid::uniform(ln2, 64, Method::exact_autonomous));
    EXPECT_NEAR(p.matrix(0, 0), 0.5, 1e-15);
    EXPECT_NEAR(p.norm_h, 0.5, 1e-15);
}

TEST(PropagatorMatrix, VNormOfDirichletPair) {
    const Matrix lam = Vector::LinSpaced(2, 1.0, 2.0).cwiseAbs2().asDiagonal() * (pi * pi);
    const auto t = GelfandTriple::make(Matrix::Identity(2, 2), lam);
    const auto p = propagator_matrix(constant_operator(t, lam), TimeGrid::uniform(0.1, 8, Method::exact_autonomous));
    EXPECT_NEAR(p.norm_v, 0.37270783885343794, 1e-14);
}

TEST(PropagatorMatrix, ZeroOperatorIsIdentity) {
    const auto fam = constant_operator(GelfandTriple::identity(3), Matrix::Zero(3, 3));
    const auto p = propagator_matrix(fam, TimeGrid::uniform(1.0, 4));
    EXPECT_TRUE(p.matrix.isApprox(Matrix::Identity(3, 3), 1e-15));
}

TEST(PropagatorMatrix, ExactRejectsTimeDependentFamily) {
    EXPECT_THROW(propagator_matrix(affine_family(), TimeGrid::uniform(1.0, 8, Method::exact_autonomous)),
                 MethodMismatch);
}

TEST(PropagatorMatrix, ErrorEstimateTracksTrueError) {
    const auto p = propagator_matrix(scalar_family(), TimeGrid::uniform(ln2, 32));
    const double err = std::abs(p.matrix(0, 0) - 0.5);
    EXPECT_GT(p.est_error, 0.5 * err);
    EXPECT_LT(p.est_error, 2.0 * err);
}

TEST(PropagatorBetween, ComposesToFullPropagator) {
    const TimeGrid g = TimeGrid::uniform(1.0, 40);
    const auto fam = affine_family();
    const Matrix a = propagator_between(fam, g, 0, 15);
    const Matrix b = propagator_between(fam, g, 15, 40);
    EXPECT_TRUE((b * a).isApprox(propagator_matrix(fam, g).matrix, 1e-13));
}

TEST(Duhamel, ScalarConstantForcing) {
    const auto w = duhamel(scalar_family(), ForcingTerm::constant(one(1.0)), TimeGrid::uniform(ln2, 4096));
    EXPECT_NEAR(w.final()(0), 0.5, 1e-8);
    EXPECT_EQ(w.initial()(0), 0.0);
}

TEST(Duhamel, ZeroForcingGivesZero) {
    const auto w = duhamel(affine_family(), ForcingTerm::zero(), TimeGrid::uniform(1.0, 16));
    for (const auto& x : w.values) {
        EXPECT_EQ(x.norm(), 0.0);
    }
}

TEST(Duhamel, IdentityOperatorVectorForcing) {
    const auto fam = constant_operator(GelfandTriple::identity(2), Matrix::Identity(2, 2));
    Vector c(2);
    c << 2.0, -0.5;
    const double tau = 0.7;
    const auto w = duhamel(fam, ForcingTerm::constant(c), TimeGrid::uniform(tau, 4096));
    EXPECT_LT((w.final() - (1.0 - std::exp(-tau)) * c).norm(), 1e-8);
}

TEST(Duhamel, ExactPathMatchesClosedForm) {
    const auto w = duhamel(scalar_family(), ForcingTerm::constant(one(1.0)),
                           TimeGrid::uniform(ln2, 8, Method::exact_autonomous));
    EXPECT_NEAR(w.final()(0), 0.5, 1e-14);
}

TEST(Duhamel, SampledForcingMustMatchGrid) {
    const TimeGrid g = TimeGrid::uniform(1.0, 4);
    std::vector<Vector> samples(3, one(1.0));
    EXPECT_THROW(duhamel(scalar_family(), ForcingTerm::sampled(samples), g), GridMismatch);
}

TEST(Evolve, CrankNicolsonIsSecondOrder) {
    // u' + u = cos t, u(0) = 1 has u(t) = (cos t + sin t)/2 + e^{-t}/2.
    const auto f = ForcingTerm::closure([](double t) { return one(std::cos(t)); });
    const double exact = 0.5 * (std::cos(1.0) + std::sin(1.0)) + 0.5 * std::exp(-1.0);
    double prev = 0.0;
    for (std::size_t steps : {16u, 32u, 64u, 128u}) {
        const auto u = evolve(scalar_family(), one(1.0), f, TimeGrid::uniform(1.0, steps));
        const double err = std::abs(u.final()(0) - exact);
        if (prev > 0.0) {
            EXPECT_NEAR(prev / err, 4.0, 0.2);
        }
        prev = err;
    }
}

TEST(Evolve, ResidualsAreSmallForSmoothSolution) {
    const auto u = evolve(affine_family(), Vector::Ones(2), ForcingTerm::constant(Vector::Ones(2)),
                          TimeGrid::uniform(1.0, 256));
    EXPECT_LT(u.residual_eq, 1e-4);
    ASSERT_EQ(u.node_residual.size(), 257u);
}

TEST(DifferenceQuotients, ExactForQuadratics) {
    const TimeGrid g({0.0, 0.1, 0.35, 0.5, 1.0});
    std::vector<Vector> u;
    for (double t : g.nodes()) {
        u.push_back(one(t * t - 3.0 * t));
    }
    const auto d = difference_quotients(g, u);
    for (std::size_t i = 0; i < d.size(); ++i) {
        EXPECT_NEAR(d[i](0), 2.0 * g.node(i) - 3.0, 1e-12);
    }
}

TEST(Norms, TrapezoidOfConstant) {
    const TimeGrid g = TimeGrid::uniform(4.0, 10);
    Trajectory u{g};
    u.values.assign(11, one(3.0));
    const auto t = GelfandTriple::identity(1);
    EXPECT_NEAR(l2_norm_h(u, t), 6.0, 1e-14);
    EXPECT_DOUBLE_EQ(sup_norm_h(u, t), 3.0);
}

TEST(ForcingTerm, CombinationsEvaluateNodewise) {
    const TimeGrid g = TimeGrid::uniform(1.0, 2);
    const auto a = ForcingTerm::constant(one(2.0));
    const auto b = ForcingTerm::closure([](double t) { return one(t); });
    const auto c = a.plus(b.scaled(3.0)).modulated([](double t) { return 1.0 + t; });
    EXPECT_NEAR(c.at_node(g, 1, 1)(0), (2.0 + 1.5) * 1.5, 1e-15);
}
