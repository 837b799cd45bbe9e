#include "monoreg/hvi.hpp"

#include <cmath>
#include <limits>

#include "monoreg/errors.hpp"

namespace monoreg {

namespace {

void check_problem(const HviProblem& problem) {
  const auto m = problem.set.dim();
  require_shape(problem.Dinv, m, m, "hvi Dinv");
  require_size(problem.g, m, "hvi g");
  if (!all_finite(problem.Dinv) || !problem.g.allFinite()) {
    throw ContractViolation("solve_hvi: non-finite data");
  }
}

// Maximise a concave function on [0, 1] by golden-section search.
template <class F>
double maximise_concave_unit(F&& f) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = 0.0;
  double hi = 1.0;
  double x1 = hi - r * (hi - lo);
  double x2 = lo + r * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + r * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - r * (hi - lo);
      f1 = f(x1);
    }
  }
  return std::max({f(0.0), f(1.0), f1, f2});
}

}  // namespace

double hvi_residual(const HviProblem& problem, const Vector& y) {
  check_problem(problem);
  require_size(y, problem.set.dim(), "hvi_residual y");
  const Vector w = problem.g - problem.Dinv * y;
  const double phi_y = potential_value(problem.phi, y);
  auto gap_at = [&](const Vector& sigma) {
    return w.dot(sigma - y) + phi_y - potential_value(problem.phi, sigma);
  };

  if (const auto* s = std::get_if<Segment>(&problem.set.shape())) {
    if (std::holds_alternative<ZeroPotential>(problem.phi.form())) {
      return std::max(gap_at(s->first), gap_at(s->second));
    }
    const Vector d = s->second - s->first;
    return maximise_concave_unit([&](double t) { return gap_at(s->first + t * d); });
  }
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& v : problem.set.vertices()) best = std::max(best, gap_at(v));
  return best;
}

HviSolution solve_hvi(const HviProblem& problem, const HviOptions& options) {
  check_problem(problem);
  if (!(options.tol > 0.0)) throw ContractViolation("solve_hvi: tol must be > 0");
  const double mu = lambda_min_sym(sym_part(problem.Dinv));
  if (!(mu > 0.0)) throw ContractViolation("solve_hvi: Dinv is not positive definite");

  const double lip = norm2(problem.Dinv) + problem.phi.lipschitz_grad();
  const double tau = mu / (lip * lip);
  // Contraction modulus of the forward step for a μ-strongly monotone,
  // lip-Lipschitz operator with this step.
  const double q = std::sqrt(std::max(0.0, 1.0 - mu * mu / (lip * lip)));

  Vector y;
  if (options.initial) {
    require_size(*options.initial, problem.set.dim(), "solve_hvi initial");
    y = project(problem.set, *options.initial);
  } else {
    y = project(problem.set, solve_linear(problem.Dinv, problem.g));
  }

  double step = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= options.max_iterations; ++it) {
    const Vector forward = problem.Dinv * y - problem.g + potential_grad(problem.phi, y);
    const Vector next = project(problem.set, Vector(y - tau * forward));
    step = (next - y).norm();
    y = next;
    const double floor = 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, y.norm());
    if (step <= std::max((1.0 - q) * options.tol, floor)) {
      return {y, it, hvi_residual(problem, y)};
    }
  }
  throw ConvergenceFailure("solve_hvi: iteration budget exhausted", step, options.max_iterations);
}

EquivalentControl equivalent_control(const Plant& plant, const Vector& x, const ConvexSet& set,
                                     const Potential& phi, const HviOptions& options) {
  plant.validate();
  require_size(x, plant.n(), "equivalent_control x");
  if (set.dim() != plant.m()) throw ContractViolation("equivalent_control: set dimension != m");

  const Vector cx = plant.C * x;
  HviProblem problem{inverse(plant.D), Vector(), set, phi};
  problem.g = problem.Dinv * cx;

  HviOptions opts = options;
  if (!opts.initial) opts.initial = cx;
  const HviSolution sol = solve_hvi(problem, opts);
  return {solve_linear(plant.D, Vector(cx - sol.y)), sol.y, sol.iterations};
}

}  // namespace monoreg
