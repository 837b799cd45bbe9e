#pragma once

#include <optional>

#include "monoreg/convex.hpp"

namespace monoreg {

/// β(ε), the factor (1 + εL)/β(ε) of the fixed-point map f∘g, and the end
/// of the interval (0, epsilon_max) on which that factor stays below 1.
struct ContractionReport {
  double beta = 1.0;
  double factor = 1.0;
  double epsilon_max = 0.0;  // +inf when every ε > 0 works, 0 when none does
};

/// β(ε) = sqrt(1 + ε λ_min(D⁻¹ + D⁻ᵀ) + ε² λ_min(D⁻ᵀD⁻¹)).
/// Throws ContractViolation unless D is positive definite, L ≥ 0, ε ≥ 0.
ContractionReport contraction_factor(const Matrix& D, double L, double epsilon);

/// ũ = (y − Proj_S(y))/ε + ∇φ(y).
class RegularizedController {
 public:
  /// Throws ContractViolation unless epsilon > 0 and the set and potential
  /// dimensions agree.
  RegularizedController(double epsilon, ConvexSet set, Potential phi);

  double epsilon() const { return epsilon_; }
  const ConvexSet& set() const { return set_; }
  const Potential& phi() const { return phi_; }

  /// Replace S by conv{0, y_d}; used for time-varying references.
  void retarget(const Vector& y_d);

  bool operator==(const RegularizedController& other) const;

 private:
  double epsilon_;
  ConvexSet set_;
  Potential phi_;
};

/// Depends only on the measured output, ε, S and φ.
Vector control_value(const RegularizedController& ctrl, const Vector& y);

/// Controller paired with a plant feedthrough D: (I + εD⁻¹) is factored once
/// and the contraction report is computed once. With `require_contraction`
/// the constructor throws RegularizationInvalid unless the factor is < 1.
class OutputLoop {
 public:
  OutputLoop(RegularizedController ctrl, const Matrix& D, bool require_contraction = false);

  const RegularizedController& controller() const { return ctrl_; }
  void retarget(const Vector& y_d) { ctrl_.retarget(y_d); }

  const Matrix& Dinv() const { return dinv_; }
  const ContractionReport& contraction() const { return report_; }
  bool certified() const { return report_.factor < 1.0; }

  /// I + εD⁻¹
  const Matrix& lhs() const { return lhs_; }
  Vector solve_lhs(const Vector& rhs) const { return lhs_lu_.solve(rhs); }

  /// (f∘g)(y) = (I + εD⁻¹)⁻¹[Proj_S(y) − ε∇φ(y) + εD⁻¹cx]
  Vector fixed_point_map(const Vector& y, const Vector& cx) const;

 private:
  RegularizedController ctrl_;
  Matrix dinv_;
  Matrix lhs_;
  Eigen::PartialPivLU<Matrix> lhs_lu_;
  ContractionReport report_;
};

struct ClosedLoopOutput {
  Vector y;
  Vector u;  // control_value at y
  int iterations = 0;
  double residual = 0.0;  // ‖y − (f∘g)(y)‖
};

inline constexpr int kFixedPointMaxIterations = 500;

/// Fixed point y = (f∘g)(y) for the measured cx = Cx. Newton steps on the
/// semismooth residual (I + εD⁻¹)y − Proj_S(y) + ε∇φ(y) − εD⁻¹cx with a
/// Picard fallback. Stops when ‖y − (f∘g)(y)‖ ≤ tol·max(1, ‖y‖); throws
/// ConvergenceFailure after kFixedPointMaxIterations iterations.
ClosedLoopOutput closed_loop_output(const OutputLoop& loop, const Vector& cx,
                                    const std::optional<Vector>& y_init = std::nullopt,
                                    double tol = 1e-12);

/// Stand-alone form: throws RegularizationInvalid unless the contraction
/// factor for (D, L, ε) is below 1.
ClosedLoopOutput closed_loop_output(const RegularizedController& ctrl, const Matrix& D,
                                    const Vector& cx, const std::optional<Vector>& y_init = std::nullopt,
                                    double tol = 1e-12);

}  // namespace monoreg
