#include <gtest/gtest.h>

#include <cmath>

#include "monoreg/analysis.hpp"
#include "monoreg/errors.hpp"
#include "test_util.hpp"

namespace monoreg {
namespace {

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

TEST(RegulationCondition, Example2PublishedValues) {
  const Plant p = testing::example2_plant();
  const Vector yd = vec2(-1, 2);
  const RegulatorDesign design = ida_equilibrium(p, vec2(4, 0), yd);
  Vector expected_x(4);
  expected_x << 2.7809, 0.1184, -0.2779, 0.4877;
  EXPECT_LE((design.x_star - expected_x).cwiseAbs().maxCoeff(), 5e-4);

  const RegulationCondition c = regulation_condition(p, design.x_star, yd, Potential::log_sum_exp());
  EXPECT_NEAR(c.lhs, -9.2810, 5e-4);
  EXPECT_NEAR(c.rhs, -1.8577, 5e-4);
  EXPECT_LT(c.margin, 0.0);

  // 𝒟φ(y_d, −y_d) = −⟨softmax(y_d), y_d⟩ computed by hand.
  const double e1 = std::exp(-1.0), e2 = std::exp(2.0);
  EXPECT_NEAR(c.rhs, -(-e1 + 2 * e2) / (e1 + e2), 1e-14);
}

TEST(RegulationCondition, Example1Polynomial) {
  const Plant p = testing::example1_plant();
  for (double f : {-1.0, 0.0, 0.25, 1.0, 3.0, 5.0, 6.0}) {
    const Vector yd = vec2(1, f);
    const RegulatorDesign design = ida_equilibrium(p, vec2(10, 0), yd);
    const RegulationCondition c = regulation_condition(p, design.x_star, yd, Potential::zero());
    EXPECT_NEAR(c.lhs, -4 - 4 * f + 5.0 / 6.0 * f * f, 1e-10) << "f = " << f;
    EXPECT_EQ(c.rhs, 0.0);
  }
}

TEST(RegulationCondition, Example1Roots) {
  const Plant p = testing::example1_plant();
  auto margin = [&](double f) {
    const Vector yd = vec2(1, f);
    return regulation_condition(p, ida_equilibrium(p, vec2(10, 0), yd).x_star, yd, Potential::zero()).margin;
  };
  EXPECT_GT(margin(-0.85), 0.0);
  EXPECT_LT(margin(-0.848), 0.0);
  EXPECT_LT(margin(5.648), 0.0);
  EXPECT_GT(margin(5.65), 0.0);
}

TEST(Omega, HalfSpaceAgreesWithMembership) {
  std::mt19937 rng(113);
  for (int trial = 0; trial < 30; ++trial) {
    const auto pp = testing::random_passive_plant(rng, 3, 2);
    const Vector yd = testing::random_vector(rng, 2);
    const Potential phi = Potential::log_sum_exp();
    const HalfSpace h = omega_halfspace(pp.plant, phi, yd);
    for (int k = 0; k < 20; ++k) {
      const Vector x = testing::random_vector(rng, 3, 3.0);
      const double slack = h.a.dot(x) - h.b;
      if (std::abs(slack) < 1e-9) continue;
      EXPECT_EQ(omega_membership(pp.plant, phi, yd, x), slack >= 0.0);
    }
  }
}

TEST(Omega, EquilibriumInsideWhenConditionHolds) {
  const Plant p = testing::example2_plant();
  const Vector yd = vec2(-1, 2);
  const Vector xs = ida_equilibrium(p, vec2(4, 0), yd).x_star;
  EXPECT_TRUE(omega_membership(p, Potential::log_sum_exp(), yd, xs));
}

TEST(DissipationMatrix, CongruenceIdentity) {
  std::mt19937 rng(127);
  for (int trial = 0; trial < 30; ++trial) {
    const auto pp = testing::random_passive_plant(rng, 4, 2);
    const Plant& p = pp.plant;
    const Matrix R = dissipation_matrix(p, pp.P);
    Matrix T = Matrix::Identity(6, 6);
    T.bottomLeftCorner(2, 4) = -inverse(p.D) * p.C;
    const Matrix expected = T.transpose() * (-passivity_lmi_matrix(p, pp.P)) * T;
    EXPECT_LE((R - expected).norm(), 1e-10 * expected.norm());
    EXPECT_GT(lambda_min_sym(R), 0.0);
  }
}

TEST(DissipationMatrix, ScalarCase) {
  Plant p;
  p.A = Matrix::Constant(1, 1, -1.0);
  p.Bu = Matrix::Constant(1, 1, 1.0);
  p.Bv = Matrix::Constant(1, 1, 1.0);
  p.C = Matrix::Constant(1, 1, 1.0);
  p.D = Matrix::Constant(1, 1, 2.0);
  const Matrix P = Matrix::Constant(1, 1, 1.0);
  // −LMI = [[2, 0], [0, 4]], T = [[1, 0], [−1/2, 1]]
  // TᵀMT = [[2 + 1, −2], [−2, 4]]
  const Matrix R = dissipation_matrix(p, P);
  EXPECT_NEAR(R(0, 0), 3.0, 1e-15);
  EXPECT_NEAR(R(0, 1), -2.0, 1e-15);
  EXPECT_NEAR(R(1, 0), -2.0, 1e-15);
  EXPECT_NEAR(R(1, 1), 4.0, 1e-15);
}

TEST(DisturbanceBound, EllipsoidInsideOmega) {
  std::mt19937 rng(131);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const auto pp = testing::random_passive_plant(rng, 3, 2);
    const Vector yd = testing::random_vector(rng, 2);
    const Potential phi = Potential::zero();
    const Vector xs = ida_equilibrium(pp.plant, testing::random_vector(rng, 2, 5.0), yd).x_star;
    const RobustnessReport r = disturbance_bound(pp.plant, pp.P, xs, yd, phi);
    if (r.condition.margin >= 0.0) {
      EXPECT_FALSE(r.valid);
      EXPECT_EQ(r.B, 0.0);
      continue;
    }
    ++checked;
    ASSERT_TRUE(r.valid);
    EXPECT_GT(r.delta_max, 0.0);
    // Boundary points x* + sqrt(δ) P^{-1/2} w for unit w lie in Ω_d.
    const EigenResult eig = eig_sym(pp.P);
    const Matrix P_inv_sqrt =
        eig.eigenvectors * eig.eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal() * eig.eigenvectors.transpose();
    const double radius = std::sqrt(r.delta_max * (1 - 1e-9));
    for (int k = 0; k < 200; ++k) {
      const Vector w = testing::random_vector(rng, 3).normalized();
      EXPECT_TRUE(omega_membership(pp.plant, phi, yd, Vector(xs + radius * P_inv_sqrt * w), 1e-12));
    }
    // The tangent point just outside the ellipsoid leaves Ω_d.
    const Vector a = r.omega.a;
    const Vector tangent = xs - std::sqrt(r.delta_max * (1 + 1e-6)) * P_inv_sqrt * (P_inv_sqrt * a).normalized();
    EXPECT_FALSE(omega_membership(pp.plant, phi, yd, tangent));
  }
  EXPECT_GT(checked, 0);
}

TEST(DisturbanceBound, AlphaLimits) {
  const Plant p = testing::example2_plant();
  const Matrix P = testing::example2_P();
  const Vector yd = vec2(-1, 2);
  const Vector xs = ida_equilibrium(p, vec2(4, 0), yd).x_star;
  const RobustnessReport r = disturbance_bound(p, P, xs, yd, Potential::log_sum_exp());
  ASSERT_TRUE(r.valid);
  EXPECT_LE(disturbance_bound_for_alpha(p, P, r.R, r.delta_max, 1e-12), 1e-4);
  EXPECT_EQ(disturbance_bound_for_alpha(p, P, r.R, r.delta_max, r.alpha_sup * 1.01), 0.0);
  EXPECT_GT(r.alpha, 0.0);
  EXPECT_LT(r.alpha, r.alpha_sup);
  EXPECT_GT(r.lambda_min_R_Lambda, 0.0);
  // The chosen α maximises B over a grid.
  for (int k = 1; k < 100; ++k) {
    const double alpha = r.alpha_sup * k / 100.0;
    EXPECT_LE(disturbance_bound_for_alpha(p, P, r.R, r.delta_max, alpha), r.B * (1 + 1e-9));
  }
}

TEST(DisturbanceBound, Example2Regression) {
  const Plant p = testing::example2_plant();
  const Vector yd = vec2(-1, 2);
  const Vector xs = ida_equilibrium(p, vec2(4, 0), yd).x_star;
  const RobustnessReport r = disturbance_bound(p, testing::example2_P(), xs, yd, Potential::log_sum_exp());
  ASSERT_TRUE(r.valid);
  EXPECT_GT(r.B, 0.0);
  EXPECT_TRUE(std::isfinite(r.B));
  // δ_max in closed form.
  const double slack = r.omega.a.dot(xs) - r.omega.b;
  EXPECT_NEAR(r.delta_max, slack * slack / r.omega.a.dot(solve_linear(testing::example2_P(), r.omega.a)),
              1e-12 * r.delta_max);
}

TEST(DisturbanceBound, RejectsIndefiniteP) {
  const Plant p = testing::example2_plant();
  Matrix P = testing::example2_P();
  P(0, 0) = -5;
  EXPECT_THROW(disturbance_bound(p, P, Vector::Zero(4), vec2(-1, 2), Potential::zero()), ContractViolation);
}

}  // namespace
}  // namespace monoreg
