#include "monoreg/convex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "monoreg/errors.hpp"

namespace monoreg {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool same_vector(const Vector& a, const Vector& b) { return a.size() == b.size() && a == b; }

// Number of vertex subsets of size 1..max_size, saturating at `cap`.
std::size_t subset_count(std::size_t k, std::size_t max_size, std::size_t cap) {
  std::size_t total = 0;
  double binom = 1.0;
  for (std::size_t s = 1; s <= max_size && s <= k; ++s) {
    binom = binom * static_cast<double>(k - s + 1) / static_cast<double>(s);
    total += static_cast<std::size_t>(binom + 0.5);
    if (total > cap) return cap + 1;
  }
  return total;
}

// Result of projecting onto the hull of a vertex subset: the point, the
// affine directions of the active face (columns) and the squared distance in
// the transformed metric.
struct FaceCandidate {
  Vector point;
  Matrix directions;
  double dist2 = std::numeric_limits<double>::infinity();
};

// Exact projection onto conv{v_i} in the metric ‖Lᵀ·‖ (M = L Lᵀ). The optimum
// lies in the relative interior of a simplex spanned by at most m+1 affinely
// independent vertices, on whose affine hull it is the orthogonal projection;
// every such candidate with non-negative barycentric weights is feasible, so
// the closest candidate is the projection.
FaceCandidate project_hull_enumerate(const std::vector<Vector>& vertices, const Vector& z,
                                     const Matrix& Lt) {
  const auto m = z.size();
  const std::size_t k = vertices.size();
  const std::size_t max_size = std::min<std::size_t>(k, static_cast<std::size_t>(m) + 1);
  const Vector tz = Lt * z;
  std::vector<Vector> w;
  w.reserve(k);
  for (const auto& v : vertices) w.push_back(Lt * v);

  FaceCandidate best;
  std::vector<std::size_t> idx;
  for (std::size_t size = 1; size <= max_size; ++size) {
    idx.resize(size);
    for (std::size_t i = 0; i < size; ++i) idx[i] = i;
    while (true) {
      const Vector& w0 = w[idx[0]];
      Matrix E(m, static_cast<Eigen::Index>(size - 1));
      for (std::size_t j = 1; j < size; ++j) E.col(static_cast<Eigen::Index>(j - 1)) = w[idx[j]] - w0;

      bool usable = true;
      Vector c = Vector::Zero(static_cast<Eigen::Index>(size - 1));
      if (size > 1) {
        Eigen::ColPivHouseholderQR<Matrix> qr(E);
        qr.setThreshold(1e-12);
        if (qr.rank() < static_cast<Eigen::Index>(size - 1)) {
          usable = false;
        } else {
          c = qr.solve(Vector(tz - w0));
          const double first = 1.0 - c.sum();
          usable = first >= -1e-12 && (c.size() == 0 || c.minCoeff() >= -1e-12);
        }
      }
      if (usable) {
        const Vector tp = w0 + E * c;
        const double d2 = (tz - tp).squaredNorm();
        if (d2 < best.dist2) {
          Vector p = vertices[idx[0]];
          Matrix dirs(m, static_cast<Eigen::Index>(size - 1));
          for (std::size_t j = 1; j < size; ++j) {
            p += c(static_cast<Eigen::Index>(j - 1)) * (vertices[idx[j]] - vertices[idx[0]]);
            dirs.col(static_cast<Eigen::Index>(j - 1)) = vertices[idx[j]] - vertices[idx[0]];
          }
          best.point = p;
          best.directions = dirs;
          best.dist2 = d2;
        }
      }

      // Next combination in lexicographic order.
      std::size_t pos = size;
      while (pos > 0 && idx[pos - 1] == k - size + pos - 1) --pos;
      if (pos == 0) break;
      ++idx[pos - 1];
      for (std::size_t j = pos; j < size; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return best;
}

// Euclidean projection onto the probability simplex.
Vector project_simplex(const Vector& v) {
  Vector u = v;
  std::sort(u.data(), u.data() + u.size(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    cumsum += u(i);
    const double t = (cumsum - 1.0) / static_cast<double>(i + 1);
    if (u(i) - t > 0.0) theta = t;
  }
  return (v.array() - theta).max(0.0).matrix();
}

// Fallback for large hulls: accelerated projected gradient on the weights.
Vector project_hull_weights(const std::vector<Vector>& vertices, const Vector& z,
                            const Matrix& M) {
  const auto k = static_cast<Eigen::Index>(vertices.size());
  Matrix V(z.size(), k);
  for (Eigen::Index i = 0; i < k; ++i) V.col(i) = vertices[static_cast<std::size_t>(i)];
  const Matrix H = V.transpose() * M * V;
  const Vector g0 = V.transpose() * M * z;
  const double lip = std::max(lambda_max_sym(H), 1e-300);
  Vector w = Vector::Constant(k, 1.0 / static_cast<double>(k));
  Vector w_prev = w;
  double t = 1.0;
  for (int it = 0; it < 10000; ++it) {
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const Vector yk = w + ((t - 1.0) / t_next) * (w - w_prev);
    w_prev = w;
    w = project_simplex(yk - (H * yk - g0) / lip);
    t = t_next;
    if ((w - w_prev).norm() <= 1e-12) break;
  }
  return V * w;
}

Vector project_box_weighted(const Box& box, const Vector& z, const Matrix& M) {
  const Matrix off = M - Matrix(M.diagonal().asDiagonal());
  if (off.cwiseAbs().maxCoeff() == 0.0) return z.cwiseMax(box.lower).cwiseMin(box.upper);

  const double step = 1.0 / lambda_max_sym(M);
  Vector x = z.cwiseMax(box.lower).cwiseMin(box.upper);
  const double scale = std::max(1.0, z.cwiseAbs().maxCoeff());
  for (int it = 0; it < 200000; ++it) {
    const Vector next = (x - step * (M * (x - z))).cwiseMax(box.lower).cwiseMin(box.upper);
    const double change = (next - x).norm();
    x = next;
    if (change <= 1e-15 * scale) return x;
  }
  throw ConvergenceFailure("project_weighted: box projection did not converge", 0.0, 200000);
}

void require_spd(const Matrix& M, Eigen::Index m) {
  require_shape(M, m, m, "project_weighted metric");
  if (!is_symmetric(M) || !is_positive_definite(M)) {
    throw ContractViolation("project_weighted: metric must be symmetric positive definite");
  }
}

constexpr std::size_t kMaxHullSubsets = 20000;

}  // namespace

// ---------------------------------------------------------------------------
// ConvexSet

ConvexSet ConvexSet::segment(const Vector& y_d) { return segment(Vector::Zero(y_d.size()), y_d); }

ConvexSet ConvexSet::segment(const Vector& first, const Vector& second) {
  require_size(second, first.size(), "segment endpoint");
  if (first.size() == 0) throw ContractViolation("segment: empty dimension");
  if (!first.allFinite() || !second.allFinite()) throw ContractViolation("segment: non-finite endpoint");
  return ConvexSet(Segment{first, second});
}

ConvexSet ConvexSet::box(const Vector& lower, const Vector& upper) {
  require_size(upper, lower.size(), "box upper");
  if (lower.size() == 0) throw ContractViolation("box: empty dimension");
  if ((lower.array() > upper.array()).any()) {
    throw ContractViolation("box: lower bound exceeds upper bound");
  }
  return ConvexSet(Box{lower, upper});
}

ConvexSet ConvexSet::hull(std::vector<Vector> vertices) {
  if (vertices.empty()) throw ContractViolation("hull: no vertices");
  const auto m = vertices.front().size();
  if (m == 0) throw ContractViolation("hull: empty dimension");
  for (const auto& v : vertices) {
    require_size(v, m, "hull vertex");
    if (!v.allFinite()) throw ContractViolation("hull: non-finite vertex");
  }
  return ConvexSet(Hull{std::move(vertices)});
}

Eigen::Index ConvexSet::dim() const {
  return std::visit(overloaded{[](const Segment& s) { return s.first.size(); },
                               [](const Box& b) { return b.lower.size(); },
                               [](const Hull& h) { return h.vertices.front().size(); }},
                    shape_);
}

std::vector<Vector> ConvexSet::vertices() const {
  return std::visit(
      overloaded{[](const Segment& s) { return std::vector<Vector>{s.first, s.second}; },
                 [](const Box& b) {
                   const auto m = b.lower.size();
                   std::vector<Vector> corners;
                   const std::size_t count = std::size_t{1} << m;
                   corners.reserve(count);
                   for (std::size_t mask = 0; mask < count; ++mask) {
                     Vector c(m);
                     for (Eigen::Index i = 0; i < m; ++i) {
                       c(i) = (mask >> i) & 1U ? b.upper(i) : b.lower(i);
                     }
                     corners.push_back(std::move(c));
                   }
                   return corners;
                 },
                 [](const Hull& h) { return h.vertices; }},
      shape_);
}

bool ConvexSet::contains(const Vector& y, double tol) const {
  require_size(y, dim(), "contains");
  if (const auto* b = std::get_if<Box>(&shape_)) {
    return (y.array() >= b->lower.array() - tol).all() && (y.array() <= b->upper.array() + tol).all();
  }
  return distance(*this, y) <= tol;
}

double ConvexSet::support(const Vector& u) const {
  require_size(u, dim(), "support");
  return std::visit(overloaded{[&](const Segment& s) { return std::max(u.dot(s.first), u.dot(s.second)); },
                               [&](const Box& b) {
                                 double total = 0.0;
                                 for (Eigen::Index i = 0; i < u.size(); ++i) {
                                   total += std::max(u(i) * b.lower(i), u(i) * b.upper(i));
                                 }
                                 return total;
                               },
                               [&](const Hull& h) {
                                 double best = -std::numeric_limits<double>::infinity();
                                 for (const auto& v : h.vertices) best = std::max(best, u.dot(v));
                                 return best;
                               }},
                    shape_);
}

bool ConvexSet::operator==(const ConvexSet& other) const {
  if (shape_.index() != other.shape_.index()) return false;
  return std::visit(
      overloaded{[&](const Segment& s) {
                   const auto& o = std::get<Segment>(other.shape_);
                   return same_vector(s.first, o.first) && same_vector(s.second, o.second);
                 },
                 [&](const Box& b) {
                   const auto& o = std::get<Box>(other.shape_);
                   return same_vector(b.lower, o.lower) && same_vector(b.upper, o.upper);
                 },
                 [&](const Hull& h) {
                   const auto& o = std::get<Hull>(other.shape_);
                   if (h.vertices.size() != o.vertices.size()) return false;
                   for (std::size_t i = 0; i < h.vertices.size(); ++i) {
                     if (!same_vector(h.vertices[i], o.vertices[i])) return false;
                   }
                   return true;
                 }},
      shape_);
}

// ---------------------------------------------------------------------------
// Projections

ProjectionWithJacobian project_with_jacobian(const ConvexSet& set, const Vector& z) {
  const auto m = set.dim();
  require_size(z, m, "project");
  return std::visit(
      overloaded{
          [&](const Segment& s) -> ProjectionWithJacobian {
            const Vector d = s.second - s.first;
            const double dd = d.squaredNorm();
            if (dd == 0.0) return {s.first, Matrix::Zero(m, m)};
            const double t = d.dot(z - s.first) / dd;
            if (t <= 0.0) return {s.first, Matrix::Zero(m, m)};
            if (t >= 1.0) return {s.second, Matrix::Zero(m, m)};
            return {s.first + t * d, d * d.transpose() / dd};
          },
          [&](const Box& b) -> ProjectionWithJacobian {
            Vector p = z.cwiseMax(b.lower).cwiseMin(b.upper);
            Vector free(m);
            for (Eigen::Index i = 0; i < m; ++i) {
              free(i) = (z(i) > b.lower(i) && z(i) < b.upper(i)) ? 1.0 : 0.0;
            }
            return {p, Matrix(free.asDiagonal())};
          },
          [&](const Hull& h) -> ProjectionWithJacobian {
            const std::size_t max_size = static_cast<std::size_t>(m) + 1;
            if (subset_count(h.vertices.size(), max_size, kMaxHullSubsets) > kMaxHullSubsets) {
              // Face information is unavailable on this path; the identity is
              // a valid Newton model away from the boundary.
              return {project_hull_weights(h.vertices, z, Matrix::Identity(m, m)), Matrix::Identity(m, m)};
            }
            FaceCandidate face = project_hull_enumerate(h.vertices, z, Matrix::Identity(m, m));
            Matrix jac = Matrix::Zero(m, m);
            if (face.directions.cols() > 0) {
              Eigen::ColPivHouseholderQR<Matrix> qr(face.directions);
              const Matrix Q = qr.householderQ() * Matrix::Identity(m, qr.rank());
              jac = Q * Q.transpose();
            }
            return {face.point, jac};
          }},
      set.shape());
}

Vector project(const ConvexSet& set, const Vector& z) {
  if (const auto* b = std::get_if<Box>(&set.shape())) {
    require_size(z, set.dim(), "project");
    return z.cwiseMax(b->lower).cwiseMin(b->upper);
  }
  return project_with_jacobian(set, z).point;
}

Vector project_weighted(const ConvexSet& set, const Vector& z, const Matrix& M) {
  const auto m = set.dim();
  require_size(z, m, "project_weighted");
  require_spd(M, m);
  return std::visit(
      overloaded{[&](const Segment& s) -> Vector {
                   const Vector d = s.second - s.first;
                   const double dd = d.dot(M * d);
                   if (dd == 0.0) return s.first;
                   const double t = std::clamp(d.dot(M * (z - s.first)) / dd, 0.0, 1.0);
                   return s.first + t * d;
                 },
                 [&](const Box& b) -> Vector { return project_box_weighted(b, z, M); },
                 [&](const Hull& h) -> Vector {
                   const Matrix Msym = sym_part(M);
                   if (subset_count(h.vertices.size(), static_cast<std::size_t>(m) + 1, kMaxHullSubsets) >
                       kMaxHullSubsets) {
                     return project_hull_weights(h.vertices, z, Msym);
                   }
                   const Matrix Lt = Eigen::LLT<Matrix>(Msym).matrixU();
                   return project_hull_enumerate(h.vertices, z, Lt).point;
                 }},
      set.shape());
}

double distance(const ConvexSet& set, const Vector& z) { return (z - project(set, z)).norm(); }

bool normal_cone_contains(const ConvexSet& set, const Vector& y, const Vector& u, double tol) {
  require_size(u, set.dim(), "normal_cone_contains u");
  if (!set.contains(y, tol)) return false;
  return set.support(u) - u.dot(y) <= tol;
}

// ---------------------------------------------------------------------------
// Potentials

Potential Potential::quadratic(const Matrix& Q) {
  require_square(Q, "quadratic potential Q");
  if (!is_symmetric(Q)) throw ContractViolation("quadratic potential: Q is not symmetric");
  const EigenResult eig = eig_sym(Q);
  if (eig.min() < -1e-12 * std::max(1.0, std::abs(eig.max()))) {
    throw ContractViolation("quadratic potential: Q is not positive semidefinite");
  }
  return Potential(QuadraticPotential{sym_part(Q)}, std::max(eig.max(), 0.0));
}

std::string Potential::name() const {
  return std::visit(overloaded{[](const ZeroPotential&) { return std::string("zero"); },
                               [](const LogSumExp&) { return std::string("log_sum_exp"); },
                               [](const QuadraticPotential&) { return std::string("quadratic"); }},
                    form_);
}

bool Potential::operator==(const Potential& other) const {
  if (form_.index() != other.form_.index()) return false;
  if (const auto* q = std::get_if<QuadraticPotential>(&form_)) {
    const auto& o = std::get<QuadraticPotential>(other.form_);
    return q->Q.rows() == o.Q.rows() && q->Q.cols() == o.Q.cols() && q->Q == o.Q;
  }
  return true;
}

namespace {

Vector softmax(const Vector& y) {
  const double shift = y.maxCoeff();
  const Vector e = (y.array() - shift).exp().matrix();
  return e / e.sum();
}

}  // namespace

double potential_value(const Potential& phi, const Vector& y) {
  return std::visit(overloaded{[](const ZeroPotential&) { return 0.0; },
                               [&](const LogSumExp&) {
                                 const double shift = y.maxCoeff();
                                 return shift + std::log((y.array() - shift).exp().sum());
                               },
                               [&](const QuadraticPotential& q) {
                                 require_size(y, q.Q.rows(), "potential_value");
                                 return 0.5 * y.dot(q.Q * y);
                               }},
                    phi.form());
}

Vector potential_grad(const Potential& phi, const Vector& y) {
  return std::visit(overloaded{[&](const ZeroPotential&) -> Vector { return Vector::Zero(y.size()); },
                               [&](const LogSumExp&) -> Vector { return softmax(y); },
                               [&](const QuadraticPotential& q) -> Vector {
                                 require_size(y, q.Q.rows(), "potential_grad");
                                 return q.Q * y;
                               }},
                    phi.form());
}

Matrix potential_hessian(const Potential& phi, const Vector& y) {
  const auto m = y.size();
  return std::visit(overloaded{[&](const ZeroPotential&) -> Matrix { return Matrix::Zero(m, m); },
                               [&](const LogSumExp&) -> Matrix {
                                 const Vector p = softmax(y);
                                 return Matrix(p.asDiagonal()) - p * p.transpose();
                               },
                               [&](const QuadraticPotential& q) -> Matrix { return q.Q; }},
                    phi.form());
}

double directional_derivative(const Potential& phi, const Vector& y0, const Vector& d) {
  require_size(d, y0.size(), "directional_derivative");
  return potential_grad(phi, y0).dot(d);
}

}  // namespace monoreg
