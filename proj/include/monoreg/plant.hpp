#pragma once

#include <optional>
#include <string>

#include "monoreg/numerics.hpp"

namespace monoreg {

/// Linear plant
///   ẋ  = A x + B_u u₁ + B_v v
///   y₁ = C x + D u₁
/// with n states and m conjugated port variables. The regulating controller is
/// attached through the power-preserving interconnection u₁ = −u, y₁ = y.
struct Plant {
  Matrix A;   // n×n
  Matrix Bu;  // n×m
  Matrix Bv;  // n×m
  Matrix C;   // m×n
  Matrix D;   // m×m

  Eigen::Index n() const { return A.rows(); }
  Eigen::Index m() const { return D.rows(); }

  /// Throws ContractViolation on inconsistent shapes or non-finite entries.
  void validate() const;

  bool operator==(const Plant& other) const;
};

/// Outcome of a passivity check for a given storage matrix P.
struct StorageCertificate {
  Matrix P;
  double lmi_max_eig = 0.0;  // λ_max of the passivity block matrix
  double p_min_eig = 0.0;    // λ_min(P)
  bool valid = false;
};

/// Interconnection/dissipation split F = A P⁻¹ = J − R.
struct PHForm {
  Matrix F;
  Matrix J;
  Matrix R;
};

/// Equilibria of the regulation design. H₁ and H₂ are quadratic storages
/// centred at x_bar and x_star.
struct RegulatorDesign {
  Vector y_d;
  Vector v_plus;
  Vector x_bar;   // 0 = A x̄ + B_v v⁺
  Vector x_star;  // 0 = A x* − B_u D⁻¹(C x* − y_d) + B_v v⁺
  Vector u_bar;   // D⁻¹(C x* − y_d)
};

/// Symmetric (n+m)×(n+m) block [[PA+AᵀP, PB_u−Cᵀ], [B_uᵀP−C, −(D+Dᵀ)]].
Matrix passivity_lmi_matrix(const Plant& plant, const Matrix& P);

/// Valid iff λ_max(LMI block) < −tol and λ_min(P) > tol.
StorageCertificate verify_passivity(const Plant& plant, const Matrix& P, double tol = 0.0);

enum class StorageSearchStatus {
  found,
  infeasible,  // proven: D + Dᵀ is not positive definite
  unknown,     // iteration budget exhausted without a certificate
};

struct StorageSearchResult {
  StorageSearchStatus status = StorageSearchStatus::unknown;
  std::optional<StorageCertificate> certificate;
  int iterations = 0;
};

struct StorageSearchOptions {
  double gamma = 1e-3;
  int max_iterations = 5000;
};

/// Searches for some P satisfying the strict passivity LMI. Any returned
/// certificate passes `verify_passivity` with tol = 0.
StorageSearchResult find_storage_matrix(const Plant& plant, const StorageSearchOptions& options = {});

std::string to_string(StorageSearchStatus status);

PHForm ph_decomposition(const Plant& plant, const Matrix& P);

/// x̄ with A x̄ + B_v v⁺ = 0. Throws SingularMatrix when A is singular.
Vector unforced_equilibrium(const Plant& plant, const Vector& v_plus);

/// Solves the IDA equilibrium as one linear system in x*, then recovers ū.
/// Throws NoAdmissibleEquilibrium when A − B_u D⁻¹ C (or D) is singular.
RegulatorDesign ida_equilibrium(const Plant& plant, const Vector& v_plus, const Vector& y_d);

/// (x − c)ᵀ P (x − c)
double quadratic_storage(const Matrix& P, const Vector& x, const Vector& centre);

}  // namespace monoreg
