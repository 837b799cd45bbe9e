#pragma once

#include <Eigen/Dense>

namespace monoreg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Symmetric eigendecomposition. Eigenvalues ascending; eigenvectors are the
/// matching orthonormal columns.
struct EigenResult {
  Vector eigenvalues;
  Matrix eigenvectors;

  double min() const { return eigenvalues(0); }
  double max() const { return eigenvalues(eigenvalues.size() - 1); }
};

/// Relative tolerance used by `eig_sym` to accept a matrix as symmetric.
inline constexpr double kSymmetryTolerance = 1e-10;

// Throws ContractViolation for non-square or asymmetric input.
EigenResult eig_sym(const Matrix& m);

// Partial-pivot LU. Throws SingularMatrix when a pivot falls below
// 1e-12 times the largest row norm of `m`.
Vector solve_linear(const Matrix& m, const Vector& b);
Matrix solve_linear(const Matrix& m, const Matrix& b);

Matrix inverse(const Matrix& m);

/// (M + Mᵀ) / 2
Matrix sym_part(const Matrix& m);

/// True iff λ_min((M + Mᵀ)/2) > tol, i.e. wᵀMw > 0 for w ≠ 0 when tol = 0.
bool is_positive_definite(const Matrix& m, double tol = 0.0);

bool is_symmetric(const Matrix& m, double rel_tol = kSymmetryTolerance);
bool all_finite(const Matrix& m);

double lambda_min_sym(const Matrix& m);
double lambda_max_sym(const Matrix& m);

/// Spectral norm.
double norm2(const Matrix& m);

// Shape guards used across the library; they throw ContractViolation with
// `what` in the message.
void require_square(const Matrix& m, const char* what);
void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                   const char* what);
void require_size(const Vector& v, Eigen::Index size, const char* what);

}  // namespace monoreg
