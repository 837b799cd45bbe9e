#pragma once

#include <optional>

#include "monoreg/convex.hpp"
#include "monoreg/plant.hpp"

namespace monoreg {

/// Find y ∈ S with ⟨Dinv·y − g, σ − y⟩ + φ(σ) − φ(y) ≥ 0 for all σ ∈ S.
/// For the closed loop, Dinv = D⁻¹ and g = D⁻¹Cx.
struct HviProblem {
  Matrix Dinv;
  Vector g;
  ConvexSet set;
  Potential phi;
};

struct HviSolution {
  Vector y;
  int iterations = 0;
  double residual = 0.0;  // hvi_residual at y
};

struct HviOptions {
  double tol = 1e-10;
  int max_iterations = 50000;
  /// Starting iterate; defaults to Proj_S(Dinv⁻¹ g).
  std::optional<Vector> initial;
};

/// Forward-backward iteration y ← Proj_S(y − τ(Dinv·y − g + ∇φ(y))) with
/// τ = λ_min(sym Dinv) / (‖Dinv‖ + L)².
/// Throws ContractViolation when Dinv is not positive definite and
/// ConvergenceFailure when the budget runs out.
HviSolution solve_hvi(const HviProblem& problem, const HviOptions& options = {});

/// sup_σ [⟨g − Dinv·y, σ − y⟩ + φ(y) − φ(σ)]. The supremum is taken exactly
/// over a segment (concave 1-D maximisation) and over the vertices for
/// boxes and hulls. Zero at the solution.
double hvi_residual(const HviProblem& problem, const Vector& y);

struct EquivalentControl {
  Vector u;
  Vector y;
  int iterations = 0;
};

/// Exact (non-implementable) control u = D⁻¹(Cx − y) with y from solve_hvi.
EquivalentControl equivalent_control(const Plant& plant, const Vector& x, const ConvexSet& set,
                                     const Potential& phi, const HviOptions& options = {});

}  // namespace monoreg
