#include "monoreg/numerics.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "monoreg/errors.hpp"

namespace monoreg {

namespace {

std::string shape_str(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

}  // namespace

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw ContractViolation(std::string(what) + ": expected a non-empty square matrix, got " +
                            shape_str(m));
  }
}

void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream os;
    os << what << ": expected " << rows << "x" << cols << ", got " << shape_str(m);
    throw ContractViolation(os.str());
  }
}

void require_size(const Vector& v, Eigen::Index size, const char* what) {
  if (v.size() != size) {
    std::ostringstream os;
    os << what << ": expected length " << size << ", got " << v.size();
    throw ContractViolation(os.str());
  }
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

bool is_symmetric(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

Matrix sym_part(const Matrix& m) { return 0.5 * (m + m.transpose()); }

EigenResult eig_sym(const Matrix& m) {
  require_square(m, "eig_sym");
  if (!all_finite(m)) throw ContractViolation("eig_sym: non-finite entries");
  if (!is_symmetric(m)) throw ContractViolation("eig_sym: matrix is not symmetric");
  // Solve on the exact symmetric part so that rounding asymmetry cannot leak in.
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym_part(m));
  if (solver.info() != Eigen::Success) {
    throw ConvergenceFailure("eig_sym: eigensolver did not converge", 0.0, 0);
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

double lambda_min_sym(const Matrix& m) { return eig_sym(m).min(); }
double lambda_max_sym(const Matrix& m) { return eig_sym(m).max(); }

double norm2(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

bool is_positive_definite(const Matrix& m, double tol) {
  require_square(m, "is_positive_definite");
  return lambda_min_sym(sym_part(m)) > tol;
}

namespace {

Eigen::PartialPivLU<Matrix> checked_lu(const Matrix& m) {
  require_square(m, "solve_linear");
  const double row_scale = m.rowwise().norm().maxCoeff();
  Eigen::PartialPivLU<Matrix> lu(m);
  const double threshold = 1e-12 * row_scale;
  const auto pivots = lu.matrixLU().diagonal().cwiseAbs();
  if (row_scale == 0.0 || pivots.minCoeff() <= threshold) {
    throw SingularMatrix("solve_linear: matrix is singular to working precision");
  }
  return lu;
}

}  // namespace

Vector solve_linear(const Matrix& m, const Vector& b) {
  require_size(b, m.rows(), "solve_linear rhs");
  return checked_lu(m).solve(b);
}

Matrix solve_linear(const Matrix& m, const Matrix& b) {
  if (b.rows() != m.rows()) throw ContractViolation("solve_linear: rhs row mismatch");
  return checked_lu(m).solve(b);
}

Matrix inverse(const Matrix& m) {
  return solve_linear(m, Matrix(Matrix::Identity(m.rows(), m.cols())));
}

}  // namespace monoreg
