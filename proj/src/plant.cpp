#include "monoreg/plant.hpp"

#include <limits>

#include "monoreg/errors.hpp"

namespace monoreg {

void Plant::validate() const {
  require_square(A, "plant.A");
  require_square(D, "plant.D");
  const auto nx = n();
  const auto nu = m();
  require_shape(Bu, nx, nu, "plant.Bu");
  require_shape(Bv, nx, nu, "plant.Bv");
  require_shape(C, nu, nx, "plant.C");
  for (const Matrix* mat : {&A, &Bu, &Bv, &C, &D}) {
    if (!all_finite(*mat)) throw ContractViolation("plant: non-finite matrix entry");
  }
}

bool Plant::operator==(const Plant& other) const {
  auto same = [](const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
  };
  return same(A, other.A) && same(Bu, other.Bu) && same(Bv, other.Bv) && same(C, other.C) &&
         same(D, other.D);
}

Matrix passivity_lmi_matrix(const Plant& plant, const Matrix& P) {
  plant.validate();
  const auto n = plant.n();
  const auto m = plant.m();
  require_shape(P, n, n, "passivity_lmi_matrix P");

  Matrix block(n + m, n + m);
  block.topLeftCorner(n, n) = P * plant.A + plant.A.transpose() * P;
  block.topRightCorner(n, m) = P * plant.Bu - plant.C.transpose();
  block.bottomLeftCorner(m, n) = block.topRightCorner(n, m).transpose();
  block.bottomRightCorner(m, m) = -(plant.D + plant.D.transpose());
  return sym_part(block);
}

StorageCertificate verify_passivity(const Plant& plant, const Matrix& P, double tol) {
  require_shape(P, plant.n(), plant.n(), "verify_passivity P");
  if (!is_symmetric(P)) throw ContractViolation("verify_passivity: P is not symmetric");

  StorageCertificate cert;
  cert.P = sym_part(P);
  cert.lmi_max_eig = lambda_max_sym(passivity_lmi_matrix(plant, cert.P));
  cert.p_min_eig = lambda_min_sym(cert.P);
  cert.valid = cert.lmi_max_eig < -tol && cert.p_min_eig > tol;
  return cert;
}

std::string to_string(StorageSearchStatus status) {
  switch (status) {
    case StorageSearchStatus::found:
      return "found";
    case StorageSearchStatus::infeasible:
      return "infeasible";
    case StorageSearchStatus::unknown:
      return "unknown";
  }
  return "unknown";
}

PHForm ph_decomposition(const Plant& plant, const Matrix& P) {
  plant.validate();
  require_shape(P, plant.n(), plant.n(), "ph_decomposition P");
  if (!is_symmetric(P)) throw ContractViolation("ph_decomposition: P is not symmetric");

  PHForm form;
  // F = A P⁻¹  <=>  Fᵀ = P⁻¹ Aᵀ (P symmetric)
  form.F = solve_linear(P, Matrix(plant.A.transpose())).transpose();
  form.J = 0.5 * (form.F - form.F.transpose());
  form.R = -0.5 * (form.F + form.F.transpose());
  return form;
}

Vector unforced_equilibrium(const Plant& plant, const Vector& v_plus) {
  plant.validate();
  require_size(v_plus, plant.m(), "unforced_equilibrium v_plus");
  return solve_linear(plant.A, Vector(-plant.Bv * v_plus));
}

RegulatorDesign ida_equilibrium(const Plant& plant, const Vector& v_plus, const Vector& y_d) {
  plant.validate();
  require_size(v_plus, plant.m(), "ida_equilibrium v_plus");
  require_size(y_d, plant.m(), "ida_equilibrium y_d");

  RegulatorDesign design;
  design.y_d = y_d;
  design.v_plus = v_plus;
  try {
    design.x_bar = unforced_equilibrium(plant, v_plus);
  } catch (const SingularMatrix&) {
    // x* does not need x̄; flag it instead of failing the design.
    design.x_bar = Vector::Constant(plant.n(), std::numeric_limits<double>::quiet_NaN());
  }

  try {
    // (A − B_u D⁻¹ C) x* = −B_u D⁻¹ y_d − B_v v⁺
    const Matrix dinv_c = solve_linear(plant.D, plant.C);
    const Vector dinv_yd = solve_linear(plant.D, y_d);
    const Matrix closed = plant.A - plant.Bu * dinv_c;
    design.x_star = solve_linear(closed, Vector(-plant.Bu * dinv_yd - plant.Bv * v_plus));
    design.u_bar = solve_linear(plant.D, Vector(plant.C * design.x_star - y_d));
  } catch (const SingularMatrix& e) {
    throw NoAdmissibleEquilibrium(std::string("ida_equilibrium: ") + e.what());
  }
  return design;
}

double quadratic_storage(const Matrix& P, const Vector& x, const Vector& centre) {
  const Vector e = x - centre;
  return e.dot(P * e);
}

}  // namespace monoreg
