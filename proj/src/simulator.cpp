#include "monoreg/simulator.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "monoreg/analysis.hpp"
#include "monoreg/errors.hpp"

namespace monoreg {

namespace {

// x*(y_d) for fixed v⁺; nullopt when the closed-loop matrix is singular.
class EquilibriumMap {
 public:
  EquilibriumMap(const Plant& plant, const Vector& v_plus)
      : plant_(plant), bv_v_(plant.Bv * v_plus), closed_(plant.A - plant.Bu * solve_linear(plant.D, plant.C)) {}

  std::optional<Vector> operator()(const Vector& y_d) const {
    try {
      return solve_linear(closed_, Vector(-plant_.Bu * solve_linear(plant_.D, y_d) - bv_v_));
    } catch (const SingularMatrix&) {
      return std::nullopt;
    }
  }

 private:
  const Plant& plant_;
  Vector bv_v_;
  Matrix closed_;
};

bool same_matrix(const Matrix& a, const Matrix& b) { return a.rows() == b.rows() && a.cols() == b.cols() && a == b; }

}  // namespace

std::string to_string(ControlMode mode) {
  return mode == ControlMode::regularized ? "regularized" : "equivalent";
}

void Scenario::validate() const {
  plant.validate();
  const auto n = plant.n();
  const auto m = plant.m();
  if (controller.set().dim() != m) throw ContractViolation("scenario: controller set dimension != m");
  if (reference.dim() != m) throw ContractViolation("scenario: reference dimension != m");
  if (disturbance.dim() != m) throw ContractViolation("scenario: disturbance dimension != m");
  reference.validate();
  disturbance.validate();
  if (P) {
    require_shape(*P, n, n, "scenario storage P");
    if (!is_symmetric(*P)) throw ContractViolation("scenario: storage P is not symmetric");
  }
  require_size(sim.x0, n, "scenario x0");
  if (!sim.x0.allFinite()) throw ContractViolation("scenario: non-finite x0");
  if (!std::isfinite(sim.t0) || !std::isfinite(sim.tf) || !(sim.tf > sim.t0)) {
    throw ContractViolation("scenario: tf must exceed t0");
  }
  if (!(sim.dt > 0.0)) throw ContractViolation("scenario: dt must be > 0");
  if (sim.dt > (sim.tf - sim.t0) / 10.0 * (1.0 + 1e-12)) {
    throw ContractViolation("scenario: dt must be <= (tf - t0)/10");
  }
  if (sim.sample_every < 1) throw ContractViolation("scenario: sample_every must be >= 1");
  if (!(analysis.gamma > 0.0) || analysis.storage_max_iterations <= 0 || !(analysis.fixed_point_tol > 0.0) ||
      !(analysis.hvi_tol > 0.0)) {
    throw ContractViolation("scenario: analysis settings must be positive");
  }
}

bool Scenario::operator==(const Scenario& o) const {
  const bool same_p = P.has_value() == o.P.has_value() && (!P || same_matrix(*P, *o.P));
  return name == o.name && description == o.description && plant == o.plant && same_p &&
         controller == o.controller && set_tracks_reference == o.set_tracks_reference &&
         require_contraction == o.require_contraction && reference == o.reference &&
         disturbance == o.disturbance && sim.x0.size() == o.sim.x0.size() && sim.x0 == o.sim.x0 &&
         sim.t0 == o.sim.t0 && sim.tf == o.sim.tf && sim.dt == o.sim.dt && sim.sample_every == o.sim.sample_every &&
         analysis.gamma == o.analysis.gamma && analysis.storage_max_iterations == o.analysis.storage_max_iterations &&
         analysis.fixed_point_tol == o.analysis.fixed_point_tol && analysis.hvi_tol == o.analysis.hvi_tol &&
         mode == o.mode;
}

RhsEvaluation closed_loop_rhs(const Plant& plant, const OutputLoop& loop, const Vector& x, double t,
                              const SignalSpec& disturbance, std::optional<Vector>* warm, double tol) {
  const Vector cx = plant.C * x;
  const ClosedLoopOutput out = closed_loop_output(loop, cx, warm ? *warm : std::optional<Vector>(), tol);
  if (warm) *warm = out.y;
  RhsEvaluation eval;
  eval.y = out.y;
  eval.u = out.u;
  eval.v = signal_eval(disturbance, t);
  eval.dx = plant.A * x - plant.Bu * eval.u + plant.Bv * eval.v;
  eval.iterations = out.iterations;
  return eval;
}

std::optional<double> reach_time(const std::vector<Sample>& samples) {
  const std::size_t count = samples.size();
  if (count == 0 || !samples.back().omega_member) return std::nullopt;
  std::size_t start = count - 1;
  while (start > 0) {
    const std::size_t prev = start - 1;
    if (samples[prev].omega_member) {
      start = prev;
    } else if (prev > 0 && samples[prev - 1].omega_member) {
      // Isolated miss between two members.
      start = prev - 1;
    } else {
      break;
    }
  }
  return samples[start].t;
}

double max_tracking_error(const Trajectory& trajectory, double from) {
  double worst = 0.0;
  for (const Sample& s : trajectory.samples) {
    if (s.t >= from) worst = std::max(worst, (s.y - s.y_d).norm());
  }
  return worst;
}

Trajectory integrate(const Scenario& scenario, const ProgressCallback& progress) {
  scenario.validate();
  const Plant& plant = scenario.plant;
  const SimSettings& sim = scenario.sim;
  OutputLoop loop(scenario.controller, plant.D, scenario.require_contraction);
  Trajectory traj;
  traj.contraction = loop.contraction();
  traj.contraction_certified = loop.certified();

  const Vector v_plus = scenario.disturbance.constant;
  const EquilibriumMap x_star_of(plant, v_plus);
  const Potential& phi = scenario.controller.phi();
  const bool constant_reference = scenario.reference.is_constant();
  const Vector y_d0 = signal_eval(scenario.reference, sim.t0);
  const std::optional<Vector> x_star0 = x_star_of(y_d0);
  const HalfSpace omega0 = omega_halfspace(plant, phi, y_d0);

  if (scenario.set_tracks_reference) loop.retarget(y_d0);
  std::optional<Vector> warm;
  HviOptions hvi_options;
  hvi_options.tol = scenario.analysis.hvi_tol;

  // Output and control at (t, x); the set follows the reference if asked to.
  auto evaluate = [&](double t, const Vector& x) -> RhsEvaluation {
    if (!x.allFinite()) throw IntegrationAbort("state became non-finite", t);
    if (scenario.set_tracks_reference && !constant_reference) loop.retarget(signal_eval(scenario.reference, t));
    try {
      if (scenario.mode == ControlMode::regularized) {
        return closed_loop_rhs(plant, loop, x, t, scenario.disturbance, &warm, scenario.analysis.fixed_point_tol);
      }
      hvi_options.initial = warm;
      const EquivalentControl eq = equivalent_control(plant, x, loop.controller().set(), phi, hvi_options);
      warm = eq.y;
      RhsEvaluation eval;
      eval.y = eq.y;
      eval.u = eq.u;
      eval.v = signal_eval(scenario.disturbance, t);
      eval.dx = plant.A * x - plant.Bu * eval.u + plant.Bv * eval.v;
      eval.iterations = eq.iterations;
      return eval;
    } catch (const ConvergenceFailure& e) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", t);
      throw IntegrationAbort(std::string("output solve failed at t = ") + buf + ": " + e.what(), t);
    }
  };

  auto record = [&](double t, const Vector& x, const RhsEvaluation& eval) {
    Sample s;
    s.t = t;
    s.x = x;
    s.y = eval.y;
    s.u = eval.u;
    s.v = eval.v;
    s.y_d = constant_reference ? y_d0 : signal_eval(scenario.reference, t);
    s.supply = eval.u.dot(eval.y);
    s.dist_S = distance(loop.controller().set(), eval.y);
    if (scenario.P) {
      const std::optional<Vector> xs = constant_reference ? x_star0 : x_star_of(s.y_d);
      s.H2 = xs ? quadratic_storage(*scenario.P, x, *xs) : std::numeric_limits<double>::quiet_NaN();
    } else {
      s.H2 = std::numeric_limits<double>::quiet_NaN();
    }
    if (constant_reference) {
      s.omega_member = omega0.a.dot(x) >= omega0.b;
    } else {
      s.omega_member = omega_membership(plant, phi, s.y_d, x);
    }
    traj.samples.push_back(std::move(s));
  };

  const double span = sim.tf - sim.t0;
  const auto steps = static_cast<long>(std::ceil(span / sim.dt - 1e-9));
  traj.samples.reserve(static_cast<std::size_t>(steps / sim.sample_every + 2));

  Vector x = sim.x0;
  double t = sim.t0;
  RhsEvaluation k1 = evaluate(t, x);
  double prev_supply = k1.u.dot(k1.y);

  for (long k = 0; k < steps; ++k) {
    if (k % sim.sample_every == 0) record(t, x, k1);
    traj.max_control_norm = std::max(traj.max_control_norm, k1.u.norm());
    traj.max_fixed_point_iterations = std::max(traj.max_fixed_point_iterations, k1.iterations);

    const double t_next = (k + 1 == steps) ? sim.tf : sim.t0 + static_cast<double>(k + 1) * sim.dt;
    const double h = t_next - t;
    const RhsEvaluation k2 = evaluate(t + 0.5 * h, x + 0.5 * h * k1.dx);
    const RhsEvaluation k3 = evaluate(t + 0.5 * h, x + 0.5 * h * k2.dx);
    const RhsEvaluation k4 = evaluate(t_next, x + h * k3.dx);
    traj.max_fixed_point_iterations =
        std::max({traj.max_fixed_point_iterations, k2.iterations, k3.iterations, k4.iterations});
    x += (h / 6.0) * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
    t = t_next;
    if (!x.allFinite()) throw IntegrationAbort("state became non-finite", t);

    k1 = evaluate(t, x);
    const double supply = k1.u.dot(k1.y);
    traj.supply_integral += 0.5 * h * (prev_supply + supply);
    prev_supply = supply;
    if (progress) progress(t);
  }
  record(t, x, k1);
  traj.max_control_norm = std::max(traj.max_control_norm, k1.u.norm());
  traj.reach_time = reach_time(traj.samples);
  return traj;
}

void write_csv(const Trajectory& trajectory, std::ostream& out) {
  if (trajectory.samples.empty()) return;
  const Sample& first = trajectory.samples.front();
  out << "t";
  for (Eigen::Index i = 0; i < first.x.size(); ++i) out << ",x" << i;
  for (Eigen::Index i = 0; i < first.y.size(); ++i) out << ",y" << i;
  for (Eigen::Index i = 0; i < first.u.size(); ++i) out << ",u" << i;
  for (Eigen::Index i = 0; i < first.v.size(); ++i) out << ",v" << i;
  out << ",H2,supply,distS,inOmega\n";

  char buf[32];
  auto put = [&](double value) {
    std::snprintf(buf, sizeof buf, "%.17g", value);
    out << buf;
  };
  for (const Sample& s : trajectory.samples) {
    put(s.t);
    for (const Vector* vec : {&s.x, &s.y, &s.u, &s.v}) {
      for (Eigen::Index i = 0; i < vec->size(); ++i) {
        out << ',';
        put((*vec)(i));
      }
    }
    out << ',';
    put(s.H2);
    out << ',';
    put(s.supply);
    out << ',';
    put(s.dist_S);
    out << ',' << (s.omega_member ? 1 : 0) << '\n';
  }
}

}  // namespace monoreg
