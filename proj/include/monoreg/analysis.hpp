#pragma once

#include "monoreg/convex.hpp"
#include "monoreg/plant.hpp"

namespace monoreg {

/// ⟨D⁻¹(y_d − Cx*), y_d⟩ < 𝒟φ(y_d, −y_d); satisfied iff margin < 0.
struct RegulationCondition {
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // lhs − rhs
};

RegulationCondition regulation_condition(const Plant& plant, const Vector& x_star, const Vector& y_d,
                                         const Potential& phi);

/// Ω_d written as the half-space {x : aᵀx ≥ b}.
struct HalfSpace {
  Vector a;  // CᵀD⁻ᵀy_d
  double b = 0.0;  // y_dᵀD⁻¹y_d − 𝒟φ(y_d, −y_d)
};

HalfSpace omega_halfspace(const Plant& plant, const Potential& phi, const Vector& y_d);

/// ⟨D⁻¹(y_d − Cx), y_d⟩ ≤ 𝒟φ(y_d, −y_d) + tol
bool omega_membership(const Plant& plant, const Potential& phi, const Vector& y_d, const Vector& x,
                      double tol = 0.0);

/// R = Tᵀ(−LMI(P))T with T = [[I, 0], [−D⁻¹C, I]], assembled block by block.
Matrix dissipation_matrix(const Plant& plant, const Matrix& P);

struct RobustnessReport {
  RegulationCondition condition;
  HalfSpace omega;
  Matrix R;
  double lambda_min_R = 0.0;
  double alpha_sup = 0.0;  // R − diag(αI, 0) ≻ 0 for α < alpha_sup
  double alpha = 0.0;      // Λ = αI
  Matrix R_Lambda;
  double lambda_min_R_Lambda = 0.0;
  double lambda_min_P = 0.0;
  double lambda_max_P = 0.0;
  double lambda_max_BvPLinvPBv = 0.0;  // λ_max(B_vᵀPΛ⁻¹PB_v)
  double delta_max = 0.0;  // largest δ with {(x−x*)ᵀP(x−x*) ≤ δ} ⊂ Ω_d
  double B = 0.0;          // admissible bound on ‖ν‖
  bool valid = false;
};

/// Builds the full report; `valid` is false (and B = 0) when the regulation
/// condition fails or R_Λ cannot be made positive definite.
/// Throws ContractViolation for an asymmetric or indefinite P.
RobustnessReport disturbance_bound(const Plant& plant, const Matrix& P, const Vector& x_star,
                                   const Vector& y_d, const Potential& phi);

/// B for a given α (0 when R_Λ is not positive definite).
double disturbance_bound_for_alpha(const Plant& plant, const Matrix& P, const Matrix& R, double delta,
                                   double alpha);

}  // namespace monoreg
