#include "monoreg/analysis.hpp"

#include <cmath>
#include <limits>

#include "monoreg/errors.hpp"

namespace monoreg {

namespace {

void check_dims(const Plant& plant, const Vector& y_d) {
  plant.validate();
  require_size(y_d, plant.m(), "analysis y_d");
}

}  // namespace

RegulationCondition regulation_condition(const Plant& plant, const Vector& x_star, const Vector& y_d,
                                         const Potential& phi) {
  check_dims(plant, y_d);
  require_size(x_star, plant.n(), "regulation_condition x_star");
  RegulationCondition cond;
  cond.lhs = solve_linear(plant.D, Vector(y_d - plant.C * x_star)).dot(y_d);
  cond.rhs = directional_derivative(phi, y_d, -y_d);
  cond.margin = cond.lhs - cond.rhs;
  return cond;
}

HalfSpace omega_halfspace(const Plant& plant, const Potential& phi, const Vector& y_d) {
  check_dims(plant, y_d);
  HalfSpace h;
  // D⁻ᵀy_d
  const Vector w = solve_linear(Matrix(plant.D.transpose()), y_d);
  h.a = plant.C.transpose() * w;
  h.b = w.dot(y_d) - directional_derivative(phi, y_d, -y_d);
  return h;
}

bool omega_membership(const Plant& plant, const Potential& phi, const Vector& y_d, const Vector& x,
                      double tol) {
  require_size(x, plant.n(), "omega_membership x");
  const HalfSpace h = omega_halfspace(plant, phi, y_d);
  return h.a.dot(x) >= h.b - tol;
}

Matrix dissipation_matrix(const Plant& plant, const Matrix& P) {
  plant.validate();
  const auto n = plant.n();
  const auto m = plant.m();
  require_shape(P, n, n, "dissipation_matrix P");
  if (!is_symmetric(P)) throw ContractViolation("dissipation_matrix: P is not symmetric");

  const Matrix dinv_c = solve_linear(plant.D, plant.C);  // D⁻¹C
  const Matrix pbu = P * plant.Bu;

  Matrix R(n + m, n + m);
  R.topLeftCorner(n, n) = -(plant.A.transpose() * P + P * plant.A - dinv_c.transpose() * pbu.transpose() -
                            pbu * dinv_c);
  R.topRightCorner(n, m) = -(pbu + dinv_c.transpose() * plant.D);
  R.bottomLeftCorner(m, n) = -(pbu.transpose() + plant.D.transpose() * dinv_c);
  R.bottomRightCorner(m, m) = plant.D + plant.D.transpose();
  return R;
}

double disturbance_bound_for_alpha(const Plant& plant, const Matrix& P, const Matrix& R, double delta,
                                   double alpha) {
  if (!(alpha > 0.0) || !(delta > 0.0)) return 0.0;
  const auto n = plant.n();
  Matrix r_lambda = sym_part(R);
  r_lambda.topLeftCorner(n, n) -= alpha * Matrix::Identity(n, n);
  const double lmin = lambda_min_sym(r_lambda);
  if (!(lmin > 0.0)) return 0.0;
  const Matrix pbv = P * plant.Bv;
  const double coupling = lambda_max_sym(Matrix(pbv.transpose() * pbv)) / alpha;
  if (!(coupling > 0.0)) return std::numeric_limits<double>::infinity();
  return std::sqrt(delta * lmin / (2.0 * lambda_max_sym(P) * coupling));
}

RobustnessReport disturbance_bound(const Plant& plant, const Matrix& P, const Vector& x_star,
                                   const Vector& y_d, const Potential& phi) {
  check_dims(plant, y_d);
  require_shape(P, plant.n(), plant.n(), "disturbance_bound P");
  if (!is_symmetric(P)) throw ContractViolation("disturbance_bound: P is not symmetric");
  const EigenResult p_eig = eig_sym(P);
  if (!(p_eig.min() > 0.0)) throw ContractViolation("disturbance_bound: P is not positive definite");

  const auto n = plant.n();
  const auto m = plant.m();
  RobustnessReport report;
  report.condition = regulation_condition(plant, x_star, y_d, phi);
  report.omega = omega_halfspace(plant, phi, y_d);
  report.lambda_min_P = p_eig.min();
  report.lambda_max_P = p_eig.max();

  report.R = dissipation_matrix(plant, P);
  const Matrix R = sym_part(report.R);
  report.lambda_min_R = lambda_min_sym(R);

  // R − diag(αI, 0) ≻ 0 iff R22 ≻ 0 and α < λ_min(R11 − R12 R22⁻¹ R21).
  const Matrix R22 = R.bottomRightCorner(m, m);
  if (is_positive_definite(R22)) {
    const Matrix schur = R.topLeftCorner(n, n) -
                         R.topRightCorner(n, m) * solve_linear(R22, Matrix(R.bottomLeftCorner(m, n)));
    report.alpha_sup = std::max(0.0, lambda_min_sym(sym_part(schur)) * (1.0 - 1e-6));
  }

  // δ_max = (aᵀx* − b)² / (aᵀP⁻¹a) when x* lies strictly inside Ω_d.
  const double slack = report.omega.a.dot(x_star) - report.omega.b;
  const Vector pinv_a = solve_linear(P, report.omega.a);
  const double a_norm2 = report.omega.a.dot(pinv_a);
  if (slack > 0.0 && a_norm2 > 0.0) {
    report.delta_max = slack * slack / a_norm2;
  } else if (slack > 0.0) {
    // a = 0 with positive slack: Ω_d is the whole space.
    report.delta_max = std::numeric_limits<double>::infinity();
  }

  if (report.alpha_sup > 0.0 && report.delta_max > 0.0 && std::isfinite(report.delta_max)) {
    // log B is concave in α (sum of log α and the concave log λ_min(R_Λ)),
    // so golden-section search finds the maximiser.
    auto objective = [&](double alpha) {
      return disturbance_bound_for_alpha(plant, P, R, report.delta_max, alpha);
    };
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = 0.0;
    double hi = report.alpha_sup;
    double x1 = hi - ratio * (hi - lo);
    double x2 = lo + ratio * (hi - lo);
    double f1 = objective(x1);
    double f2 = objective(x2);
    for (int it = 0; it < 200 && hi - lo > 1e-12 * report.alpha_sup; ++it) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + ratio * (hi - lo);
        f2 = objective(x2);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - ratio * (hi - lo);
        f1 = objective(x1);
      }
    }
    report.alpha = f1 >= f2 ? x1 : x2;
  }

  if (report.alpha > 0.0) {
    report.R_Lambda = R;
    report.R_Lambda.topLeftCorner(n, n) -= report.alpha * Matrix::Identity(n, n);
    report.lambda_min_R_Lambda = lambda_min_sym(report.R_Lambda);
    const Matrix pbv = P * plant.Bv;
    report.lambda_max_BvPLinvPBv = lambda_max_sym(Matrix(pbv.transpose() * pbv)) / report.alpha;
    report.B = disturbance_bound_for_alpha(plant, P, R, report.delta_max, report.alpha);
  } else {
    report.R_Lambda = R;
    report.lambda_min_R_Lambda = report.lambda_min_R;
  }

  report.valid = report.condition.margin < 0.0 && report.lambda_min_R_Lambda > 0.0 && report.alpha > 0.0 &&
                 report.delta_max > 0.0 && report.B > 0.0;
  if (!report.valid) report.B = 0.0;
  return report;
}

}  // namespace monoreg
