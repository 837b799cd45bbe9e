#pragma once

#include <string>
#include <variant>
#include <vector>

#include "monoreg/numerics.hpp"

namespace monoreg {

/// Membership tolerance (absolute) used when no explicit tolerance is given.
inline constexpr double kMembershipTolerance = 1e-9;

/// conv{first, second}. The regulation set conv{0, y_d} has first = 0.
struct Segment {
  Vector first;
  Vector second;
};

struct Box {
  Vector lower;
  Vector upper;
};

/// Convex hull of finitely many points.
struct Hull {
  std::vector<Vector> vertices;
};

/// Closed convex set S ⊂ Rᵐ. Its indicator ψ_S is represented by membership
/// only; it is never evaluated as +∞.
class ConvexSet {
 public:
  using Shape = std::variant<Segment, Box, Hull>;

  /// conv{0, y_d}
  static ConvexSet segment(const Vector& y_d);
  static ConvexSet segment(const Vector& first, const Vector& second);
  static ConvexSet box(const Vector& lower, const Vector& upper);
  static ConvexSet hull(std::vector<Vector> vertices);

  Eigen::Index dim() const;
  const Shape& shape() const { return shape_; }

  /// Extreme points (box corners are enumerated, so keep m small).
  std::vector<Vector> vertices() const;

  bool contains(const Vector& y, double tol = kMembershipTolerance) const;

  /// max_{σ ∈ S} ⟨u, σ⟩
  double support(const Vector& u) const;

  bool operator==(const ConvexSet& other) const;

 private:
  explicit ConvexSet(Shape shape) : shape_(std::move(shape)) {}
  Shape shape_;
};

/// Euclidean projection onto S.
Vector project(const ConvexSet& set, const Vector& z);

/// argmin_{σ ∈ S} (z − σ)ᵀ M (z − σ) for symmetric positive definite M.
/// Throws ContractViolation when M is not symmetric positive definite.
Vector project_weighted(const ConvexSet& set, const Vector& z, const Matrix& M);

/// Euclidean projection together with an element of its generalized
/// Jacobian at z (an orthogonal projector onto the active face directions).
struct ProjectionWithJacobian {
  Vector point;
  Matrix jacobian;
};
ProjectionWithJacobian project_with_jacobian(const ConvexSet& set, const Vector& z);

double distance(const ConvexSet& set, const Vector& z);

/// u ∈ N_S(y): y ∈ S (to tol) and ⟨u, σ − y⟩ ≤ tol for every σ ∈ S.
bool normal_cone_contains(const ConvexSet& set, const Vector& y, const Vector& u,
                          double tol = kMembershipTolerance);

struct ZeroPotential {};
/// φ(y) = log Σ exp(yᵢ)
struct LogSumExp {};
/// φ(y) = ½ yᵀ Q y, Q symmetric positive semidefinite.
struct QuadraticPotential {
  Matrix Q;
};

/// Smooth convex part φ of Φ = φ + ψ_S.
class Potential {
 public:
  using Form = std::variant<ZeroPotential, LogSumExp, QuadraticPotential>;

  static Potential zero() { return Potential(ZeroPotential{}, 0.0); }
  static Potential log_sum_exp() { return Potential(LogSumExp{}, 1.0); }
  /// Throws ContractViolation unless Q is symmetric positive semidefinite.
  static Potential quadratic(const Matrix& Q);

  const Form& form() const { return form_; }
  /// Lipschitz constant of ∇φ: 0, 1 (softmax bound) or λ_max(Q).
  double lipschitz_grad() const { return lipschitz_; }
  std::string name() const;

  bool operator==(const Potential& other) const;

 private:
  Potential(Form form, double lipschitz) : form_(std::move(form)), lipschitz_(lipschitz) {}
  Form form_;
  double lipschitz_;
};

double potential_value(const Potential& phi, const Vector& y);
Vector potential_grad(const Potential& phi, const Vector& y);
Matrix potential_hessian(const Potential& phi, const Vector& y);

/// 𝒟φ(y₀, d) = inf_{ρ>0} (φ(y₀ + ρd) − φ(y₀))/ρ, which is ⟨∇φ(y₀), d⟩ for
/// every supported (smooth) variant.
double directional_derivative(const Potential& phi, const Vector& y0, const Vector& d);

}  // namespace monoreg
