#include "monoreg/controller.hpp"

#include <cmath>
#include <limits>

#include "monoreg/errors.hpp"

namespace monoreg {

ContractionReport contraction_factor(const Matrix& D, double L, double epsilon) {
  require_square(D, "contraction_factor D");
  if (!is_positive_definite(D)) throw ContractViolation("contraction_factor: D is not positive definite");
  if (!(L >= 0.0) || !std::isfinite(L)) throw ContractViolation("contraction_factor: L must be >= 0");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw ContractViolation("contraction_factor: epsilon must be >= 0");
  }

  const Matrix dinv = inverse(D);
  const double a = lambda_min_sym(Matrix(dinv + dinv.transpose()));
  const double b = lambda_min_sym(Matrix(dinv.transpose() * dinv));

  ContractionReport report;
  report.beta = std::sqrt(1.0 + epsilon * a + epsilon * epsilon * b);
  report.factor = (1.0 + epsilon * L) / report.beta;

  // factor² < 1  <=>  ε (L² − b) < a − 2L
  const double slope = a - 2.0 * L;
  const double curvature = L * L - b;
  const double inf = std::numeric_limits<double>::infinity();
  if (slope > 0.0) {
    report.epsilon_max = curvature <= 0.0 ? inf : slope / curvature;
  } else if (slope == 0.0) {
    report.epsilon_max = curvature < 0.0 ? inf : 0.0;
  } else {
    report.epsilon_max = 0.0;
  }
  return report;
}

RegularizedController::RegularizedController(double epsilon, ConvexSet set, Potential phi)
    : epsilon_(epsilon), set_(std::move(set)), phi_(std::move(phi)) {
  if (!(epsilon_ > 0.0) || !std::isfinite(epsilon_)) {
    throw ContractViolation("RegularizedController: epsilon must be > 0");
  }
  if (const auto* q = std::get_if<QuadraticPotential>(&phi_.form())) {
    if (q->Q.rows() != set_.dim()) {
      throw ContractViolation("RegularizedController: potential and set dimensions differ");
    }
  }
}

void RegularizedController::retarget(const Vector& y_d) {
  require_size(y_d, set_.dim(), "retarget y_d");
  set_ = ConvexSet::segment(y_d);
}

bool RegularizedController::operator==(const RegularizedController& other) const {
  return epsilon_ == other.epsilon_ && set_ == other.set_ && phi_ == other.phi_;
}

Vector control_value(const RegularizedController& ctrl, const Vector& y) {
  require_size(y, ctrl.set().dim(), "control_value y");
  return (y - project(ctrl.set(), y)) / ctrl.epsilon() + potential_grad(ctrl.phi(), y);
}

OutputLoop::OutputLoop(RegularizedController ctrl, const Matrix& D, bool require_contraction)
    : ctrl_(std::move(ctrl)) {
  require_shape(D, ctrl_.set().dim(), ctrl_.set().dim(), "OutputLoop D");
  dinv_ = inverse(D);
  if (!is_positive_definite(dinv_)) {
    throw RegularizationInvalid("OutputLoop: D^-1 has no positive definite symmetric part");
  }
  report_ = contraction_factor(D, ctrl_.phi().lipschitz_grad(), ctrl_.epsilon());
  if (require_contraction && !certified()) {
    throw RegularizationInvalid("OutputLoop: contraction factor " + std::to_string(report_.factor) +
                                " >= 1 for epsilon " + std::to_string(ctrl_.epsilon()));
  }
  const auto m = D.rows();
  lhs_ = Matrix::Identity(m, m) + ctrl_.epsilon() * dinv_;
  lhs_lu_.compute(lhs_);
}

Vector OutputLoop::fixed_point_map(const Vector& y, const Vector& cx) const {
  const double eps = ctrl_.epsilon();
  return solve_lhs(project(ctrl_.set(), y) - eps * potential_grad(ctrl_.phi(), y) + eps * (dinv_ * cx));
}

ClosedLoopOutput closed_loop_output(const OutputLoop& loop, const Vector& cx,
                                    const std::optional<Vector>& y_init, double tol) {
  const RegularizedController& ctrl = loop.controller();
  const auto m = ctrl.set().dim();
  require_size(cx, m, "closed_loop_output cx");
  if (!(tol > 0.0)) throw ContractViolation("closed_loop_output: tol must be > 0");
  if (!cx.allFinite()) throw ContractViolation("closed_loop_output: non-finite cx");

  const double eps = ctrl.epsilon();
  const Vector forcing = eps * (loop.Dinv() * cx);

  // G(y) = (I + εD⁻¹)y − Proj_S(y) + ε∇φ(y) − εD⁻¹cx; y − (f∘g)(y) = (I + εD⁻¹)⁻¹G(y).
  auto residual_map = [&](const Vector& y) -> Vector {
    return loop.lhs() * y - project(ctrl.set(), y) + eps * potential_grad(ctrl.phi(), y) - forcing;
  };

  Vector y;
  if (y_init) {
    require_size(*y_init, m, "closed_loop_output y_init");
    y = *y_init;
  } else {
    y = project(ctrl.set(), cx);
  }

  double residual = std::numeric_limits<double>::infinity();
  for (int it = 0; it <= kFixedPointMaxIterations; ++it) {
    const ProjectionWithJacobian proj = project_with_jacobian(ctrl.set(), y);
    const Vector G = loop.lhs() * y - proj.point + eps * potential_grad(ctrl.phi(), y) - forcing;
    residual = loop.solve_lhs(G).norm();
    if (residual <= tol * std::max(1.0, y.norm())) {
      return {y, control_value(ctrl, y), it, residual};
    }
    if (it == kFixedPointMaxIterations) break;

    const Matrix jac = loop.lhs() - proj.jacobian + eps * potential_hessian(ctrl.phi(), y);
    const Vector dy = jac.partialPivLu().solve(Vector(-G));
    const double merit = G.norm();
    bool accepted = false;
    if (dy.allFinite()) {
      double t = 1.0;
      for (int k = 0; k < 30; ++k, t *= 0.5) {
        const Vector trial = y + t * dy;
        if (residual_map(trial).norm() <= (1.0 - 1e-4 * t) * merit) {
          y = trial;
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) y = loop.fixed_point_map(y, cx);
  }
  throw ConvergenceFailure("closed_loop_output: fixed-point iteration did not converge", residual,
                           kFixedPointMaxIterations);
}

ClosedLoopOutput closed_loop_output(const RegularizedController& ctrl, const Matrix& D,
                                    const Vector& cx, const std::optional<Vector>& y_init, double tol) {
  const OutputLoop loop(ctrl, D, true);
  return closed_loop_output(loop, cx, y_init, tol);
}

}  // namespace monoreg
