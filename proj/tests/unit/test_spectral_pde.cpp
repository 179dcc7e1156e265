#include "evobc/spectral_pde.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace evobc;

namespace {

constexpr double pi = std::numbers::pi;
// e^{-0.1 pi^2}
constexpr double kDecay01 = 0.37270783885343794;

DivergenceFormModel divergence(std::size_t cells, Coefficient coeff) {
    DivergenceSpec s;
    s.n_cells = cells;
    s.coeff = std::move(coeff);
    return divergence_form_model(s);
}

}  // namespace

TEST(DirichletModel, OneMode) {
    const auto m = dirichlet_model(1);
    EXPECT_NEAR(m.eigenvalues(0), pi * pi, 1e-12);
    EXPECT_NEAR(m.triple().c_h(), pi, 1e-12);
}

TEST(DirichletModel, ThreeModes) {
    const auto m = dirichlet_model(3);
    for (int k = 1; k <= 3; ++k) {
        EXPECT_NEAR(m.eigenvalues(k - 1), k * k * pi * pi, 1e-10);
    }
}

TEST(DirichletModel, LongerInterval) {
    const auto m = dirichlet_model(2, 2.0);
    EXPECT_NEAR(m.eigenvalues(0), pi * pi / 4.0, 1e-12);
    EXPECT_NEAR(m.eigenvalues(1), pi * pi, 1e-12);
}

TEST(DirichletModel, FormConstants) {
    const auto m = dirichlet_model(8);
    EXPECT_DOUBLE_EQ(m.form.alpha, 1.0);
    EXPECT_DOUBLE_EQ(m.form.omega, 0.0);
    EXPECT_TRUE(m.form.autonomous);
    EXPECT_TRUE(m.form.decomposition.has_value());
}

TEST(DirichletModel, InvalidSizes) {
    EXPECT_THROW(dirichlet_model(0), InvalidParameter);
    EXPECT_THROW(dirichlet_model(2, -1.0), InvalidParameter);
}

TEST(VNormDecay, OneModeIsEquality) {
    const auto r = v_norm_decay_check(dirichlet_model(1), 0.1, 64);
    EXPECT_NEAR(r.lhs, kDecay01, 1e-14);
    EXPECT_NEAR(r.rhs, kDecay01, 1e-15);
    EXPECT_TRUE(r.pass);
}

TEST(VNormDecay, SixtyFourModesExact) {
    const auto r = v_norm_decay_check(dirichlet_model(64), 0.1, 64, Method::exact_autonomous);
    EXPECT_NEAR(r.lhs, kDecay01, 1e-8);
    EXPECT_TRUE(r.pass);
}

TEST(VNormDecay, SixtyFourModesCrankNicolson) {
    const auto r = v_norm_decay_check(dirichlet_model(64), 0.1, 1024, Method::crank_nicolson);
    EXPECT_NEAR(r.lhs, kDecay01, 1e-6);
}

TEST(VNormDecay, ZeroTimeIsIdentity) {
    const auto r = v_norm_decay_check(dirichlet_model(4), 0.0, 8);
    EXPECT_DOUBLE_EQ(r.lhs, 1.0);
    EXPECT_DOUBLE_EQ(r.rhs, 1.0);
    EXPECT_TRUE(r.pass);
}

TEST(SingularValueDecay, MatchesExponentials) {
    EXPECT_LT(singular_value_decay_error(dirichlet_model(64), TimeGrid::uniform(0.1, 16, Method::exact_autonomous)), 1e-8);
}

TEST(Coefficients, Registry) {
    EXPECT_DOUBLE_EQ(make_coefficient("constant", {2.0})(0.3, 0.4), 2.0);
    EXPECT_DOUBLE_EQ(make_coefficient("affine_t", {1.0, 0.5})(2.0, 0.4), 2.0);
    EXPECT_NEAR(make_coefficient("oscillating", {2.0, 0.5})(0.0, 0.5), 2.5, 1e-15);
    EXPECT_THROW(make_coefficient("cubic", {1.0}), InvalidParameter);
    EXPECT_THROW(make_coefficient("affine_t", {1.0}), InvalidParameter);
}

TEST(DivergenceForm, TwoCellHandAssembly) {
    const auto m = divergence(2, constant_coefficient(1.0));
    ASSERT_EQ(m.form.dim(), 1);
    // stiffness 1/h + 1/h with h = 1/2; mass 2h/3.
    EXPECT_NEAR(m.form.eval(0.0)(0, 0), 4.0, 1e-14);
    EXPECT_NEAR(m.mass(0, 0), 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(m.triple().gram_v()(0, 0), 13.0 / 3.0, 1e-14);
    EXPECT_TRUE(m.form.autonomous);
}

TEST(DivergenceForm, TwoCellShiftIsTwelve) {
    const auto r = accretivity_example_check(divergence(2, constant_coefficient(1.0)), 1.0);
    EXPECT_NEAR(r.shift, 12.0, 1e-12);
    EXPECT_NEAR(r.lambda1_h, 12.0, 1e-12);
    EXPECT_TRUE(r.pass);
}

TEST(DivergenceForm, LinearTimeScaling) {
    const auto m = divergence(8, affine_t_coefficient(1.0, 0.5));
    const Matrix s0 = m.form.eval(0.0);
    EXPECT_TRUE(m.form.eval(0.6).isApprox(1.3 * s0, 1e-13));
    EXPECT_FALSE(m.form.autonomous);
    ASSERT_TRUE(m.form.lipschitz_l.has_value());
    EXPECT_NEAR(*m.form.lipschitz_l, 0.5 * form_norm_in(s0, m.triple().gram_v()), 1e-10);
}

TEST(DivergenceForm, NegativeCoefficientIsNotElliptic) {
    EXPECT_THROW(divergence(4, constant_coefficient(-1.0)), NotElliptic);
}

TEST(DivergenceForm, LowerBoundEnforced) {
    DivergenceSpec s;
    s.n_cells = 4;
    s.coeff = oscillating_coefficient(1.0, 0.5);
    // cos t reaches -1 inside [0, 4], so the coefficient dips to 0.5.
    s.tau = 4.0;
    s.a_lo = 0.9;
    EXPECT_THROW(divergence_form_model(s), NotElliptic);
    s.a_lo = 0.4;
    EXPECT_NO_THROW(divergence_form_model(s));
}

TEST(DivergenceForm, FirstEigenvalueConverges) {
    const auto r = accretivity_example_check(divergence(64, constant_coefficient(1.0)), 1.0);
    EXPECT_NEAR(r.shift, pi * pi, 0.02 * pi * pi);
    EXPECT_TRUE(r.pass);
}

TEST(DivergenceForm, CoefficientScalesShift) {
    const auto one = accretivity_example_check(divergence(32, constant_coefficient(1.0)), 1.0);
    const auto two = accretivity_example_check(divergence(32, constant_coefficient(2.0)), 2.0);
    EXPECT_NEAR(two.shift, 2.0 * one.lambda1_h, 1e-9);
    EXPECT_TRUE(two.pass);
}

TEST(DivergenceForm, OmegaShiftMovesAccretivity) {
    DivergenceSpec s;
    s.n_cells = 16;
    const double base = accretivity_example_check(divergence_form_model(s), 1.0).shift;
    s.omega_shift = 3.0;
    const double shifted = accretivity_example_check(divergence_form_model(s), 1.0).shift;
    EXPECT_NEAR(shifted - base, 3.0, 1e-9);
}
