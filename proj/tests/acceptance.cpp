// Acceptance runner: one [PASS]/[FAIL] line per criterion, exit status 1 if
// any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "monoreg/analysis.hpp"
#include "monoreg/controller.hpp"
#include "monoreg/hvi.hpp"
#include "monoreg/scenario.hpp"
#include "monoreg/simulator.hpp"
#include "test_util.hpp"

namespace {

using namespace monoreg;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string format(const char* fmt, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, a, b, c, d);
  return buf;
}

std::string scenario_path(const char* name) { return std::string(MONOREG_SCENARIO_DIR) + "/" + name; }

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

// Runs `body` a few times and reports the fastest wall time in milliseconds.
template <class F>
double best_time_ms(F&& body, int repeats) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    body();
    const auto stop = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(stop - start).count());
  }
  return best;
}

// Example runs are shared by several criteria and computed on first use.
const Trajectory& example_run(int which) {
  if (which == 1) {
    static const Trajectory one = integrate(load_scenario(scenario_path("example1.json")));
    return one;
  }
  static const Trajectory two = integrate(load_scenario(scenario_path("example2.json")));
  return two;
}

Outcome ac1() {
  const Plant p = testing::example2_plant();
  Vector x_star;
  const double ms = best_time_ms([&] { x_star = ida_equilibrium(p, vec({4, 0}), vec({-1, 2})).x_star; }, 20);
  const double err = (x_star - vec({2.7809, 0.1184, -0.2779, 0.4877})).cwiseAbs().maxCoeff();
  return {err <= 5e-4 && ms < 1.0, format("max component error %.2e, %.3f ms", err, ms)};
}

Outcome ac2() {
  const Plant p = testing::example2_plant();
  const Vector yd = vec({-1, 2});
  RegulationCondition c;
  const double ms = best_time_ms(
      [&] {
        const Vector xs = ida_equilibrium(p, vec({4, 0}), yd).x_star;
        c = regulation_condition(p, xs, yd, Potential::log_sum_exp());
      },
      20);
  const bool ok = std::abs(c.lhs + 9.2810) <= 1e-3 && std::abs(c.rhs + 1.8577) <= 1e-4 && ms < 1.0;
  return {ok, format("lhs %.5f, Dphi %.5f, %.3f ms", c.lhs, c.rhs, ms)};
}

Outcome ac3() {
  const StorageCertificate cert = verify_passivity(testing::example2_plant(), testing::example2_P());
  Vector eig = eig_sym(testing::example2_P()).eigenvalues;
  std::sort(eig.data(), eig.data() + eig.size());
  const double err = (eig - vec({0.2296, 1.5399, 2.7431, 5.6889})).cwiseAbs().maxCoeff();
  return {cert.valid && cert.lmi_max_eig < 0.0 && err <= 1e-3,
          format("LMI lambda_max %.4e, eigenvalue error %.2e", cert.lmi_max_eig, err)};
}

Outcome ac4() {
  const Plant p = testing::example1_plant();
  auto lhs = [&](double f) {
    const Vector yd = vec({1, f});
    return regulation_condition(p, ida_equilibrium(p, vec({10, 0}), yd).x_star, yd, Potential::zero()).lhs;
  };
  double worst = 0.0;
  for (double f : {-1.0, 0.0, 1.0, 3.0, 5.0, 6.0}) worst = std::max(worst, std::abs(lhs(f) - (-4 - 4 * f + 5.0 / 6.0 * f * f)));
  auto root = [&](double lo, double hi) {
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      ((lhs(lo) < 0) == (lhs(mid) < 0) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  const double r1 = root(-2.0, 0.0);
  const double r2 = root(4.0, 7.0);
  const bool ok = worst <= 1e-6 && std::abs(r1 + 0.849) <= 2e-3 && std::abs(r2 - 5.649) <= 2e-3;
  return {ok, format("max poly error %.2e, roots %.4f and %.4f", worst, r1, r2)};
}

Outcome ac5() {
  double ms = 0.0;
  const Trajectory* traj = nullptr;
  ms = best_time_ms([&] { traj = &example_run(2); }, 1);
  if (!traj->reach_time) return {false, "no reach time"};
  double worst = 0.0;
  for (const Sample& s : traj->samples) {
    if (s.t > *traj->reach_time) worst = std::max(worst, (s.y - s.y_d).norm());
  }
  return {worst <= 0.01 && ms < 60000.0,
          format("reach time %.4f s, max error after reach %.2e, %.1f s", *traj->reach_time, worst, ms / 1000.0)};
}

Outcome ac6() {
  const Scenario s = load_scenario(scenario_path("example1.json"));
  const Trajectory& traj = example_run(1);
  const std::vector<double> jumps = discontinuities(s.reference, s.sim.t0, s.sim.tf);
  const double guard = 2 * s.sim.dt;
  int total = 0;
  int within = 0;
  for (const Sample& sample : traj.samples) {
    if (sample.t <= 2.0) continue;
    const bool near_jump = std::any_of(jumps.begin(), jumps.end(), [&](double tj) { return std::abs(sample.t - tj) <= guard; });
    if (near_jump) continue;
    ++total;
    if (std::abs(sample.y(0) - sample.y_d(0)) <= 0.02 && std::abs(sample.y(1) - sample.y_d(1)) <= 0.02) ++within;
  }
  const double fraction = total ? static_cast<double>(within) / total : 0.0;
  return {fraction >= 0.99, format("%.2f%% of %.0f samples within 0.02", 100 * fraction, total)};
}

Outcome ac7() {
  std::mt19937 rng(20240607);
  std::uniform_int_distribution<int> n_dist(1, 6), m_dist(1, 3);
  double worst_oracle = 0.0;
  double worst_projection = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = n_dist(rng);
    const int m = m_dist(rng);
    auto pp = testing::random_passive_plant(rng, n, m);
    const bool zero = trial % 2 == 0;
    if (zero) pp.plant.D = sym_part(pp.plant.D);
    const Potential phi = zero ? Potential::zero() : Potential::log_sum_exp();
    const Vector yd = testing::random_vector(rng, m, 2.0);
    const Vector x = testing::random_vector(rng, n, 2.0);
    const Matrix Dinv = inverse(pp.plant.D);
    const HviProblem problem{Dinv, Vector(Dinv * pp.plant.C * x), ConvexSet::segment(yd), phi};
    const Vector y = solve_hvi(problem).y;

    const double s = yd.dot(Dinv * yd);
    const double gy = problem.g.dot(yd);
    const double lambda = testing::golden_section_min(
        [&](double t) { return 0.5 * s * t * t - gy * t + potential_value(phi, Vector(t * yd)); }, 0.0, 1.0);
    worst_oracle = std::max(worst_oracle, (y - lambda * yd).norm());
    if (zero) {
      worst_projection = std::max(worst_projection, (y - project_weighted(problem.set, pp.plant.C * x, Dinv)).norm());
    }
  }
  return {worst_oracle <= 1e-6 && worst_projection <= 1e-8,
          format("max oracle gap %.2e, max projection gap %.2e", worst_oracle, worst_projection)};
}

Outcome ac8() {
  std::mt19937 rng(8);
  int worst_iterations = 0;
  double worst_factor = 0.0;
  double worst_residual = 0.0;
  bool zero_exact = true;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index m = 1 + trial % 3;
    const Matrix D = testing::random_pd(rng, m, 0.5);
    const Matrix Dinv = inverse(D);
    const double a = lambda_min_sym(Matrix(Dinv + Dinv.transpose()));
    const double L = std::uniform_real_distribution<double>(0.0, 0.99)(rng) * a / 2;
    zero_exact = zero_exact && contraction_factor(D, L, 0.0).factor == 1.0;
    const double eps_max = contraction_factor(D, L, 1.0).epsilon_max;
    const double top = std::isinf(eps_max) ? 1e3 : eps_max;
    // Quadratic potential with λ_max(Q) = L.
    const Matrix Q = L * Matrix::Identity(m, m);
    const Potential phi = L > 0 ? Potential::quadratic(Q) : Potential::zero();
    for (double fraction : {1e-6, 1e-3, 0.1, 0.5, 0.999}) {
      const double eps = fraction * top;
      const ContractionReport report = contraction_factor(D, L, eps);
      worst_factor = std::max(worst_factor, report.factor);
      const RegularizedController ctrl(eps, ConvexSet::segment(testing::random_vector(rng, m)), phi);
      const OutputLoop loop(ctrl, D, true);
      const Vector cx = testing::random_vector(rng, m, 3.0);
      const ClosedLoopOutput out = closed_loop_output(loop, cx, std::nullopt, 1e-12);
      worst_iterations = std::max(worst_iterations, out.iterations);
      worst_residual = std::max(worst_residual, out.residual / std::max(1.0, out.y.norm()));
    }
  }
  const bool ok = zero_exact && worst_factor < 1.0 && worst_iterations <= kFixedPointMaxIterations && worst_residual <= 1e-12;
  return {ok, format("max factor %.6f, max iterations %.0f, max residual %.2e, factor(0) == 1: %.0f", worst_factor,
                     worst_iterations, worst_residual, zero_exact ? 1.0 : 0.0)};
}

Outcome ac9() {
  std::mt19937 rng(9);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 2 + trial % 5;
    const Eigen::Index m = 1 + trial % 3;
    const auto pp = testing::random_passive_plant(rng, n, m);
    const Matrix R = dissipation_matrix(pp.plant, pp.P);
    Matrix T = Matrix::Identity(n + m, n + m);
    T.bottomLeftCorner(m, n) = -inverse(pp.plant.D) * pp.plant.C;
    const Matrix expected = T.transpose() * (-passivity_lmi_matrix(pp.plant, pp.P)) * T;
    worst = std::max(worst, (R - expected).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-10, format("max entry difference %.2e", worst)};
}

Outcome ac10() {
  const double s1 = example_run(1).supply_integral;
  const double s2 = example_run(2).supply_integral;
  return {s1 >= -1e-6 && s2 >= -1e-6, format("example 1: %.6g, example 2: %.6g", s1, s2)};
}

Outcome ac11() {
  Scenario s = load_scenario(scenario_path("example2.json"));
  const Vector yd = s.reference.constant;
  const Vector xs = ida_equilibrium(s.plant, s.disturbance.constant, yd).x_star;
  const RobustnessReport report = disturbance_bound(s.plant, *s.P, xs, yd, s.controller.phi());
  if (!report.valid) return {false, "analysis report is not valid"};
  // ‖ν‖ ≤ sqrt(Σ amplitude²) for the sine and the [0, A) sawtooth.
  double bound = 0.0;
  for (const auto& c : s.disturbance.components) bound += c.amplitude * c.amplitude;
  bound = std::sqrt(bound);
  for (auto& c : s.disturbance.components) c.amplitude *= report.B / bound;
  s.sim.sample_every = 1;
  const Trajectory traj = integrate(s);
  int outside = 0;
  double worst_increase = -1e300;
  for (std::size_t k = 0; k + 1 < traj.samples.size(); ++k) {
    if (traj.samples[k].H2 <= report.delta_max) continue;
    ++outside;
    worst_increase = std::max(worst_increase, traj.samples[k + 1].H2 - traj.samples[k].H2);
  }
  return {outside > 0 && worst_increase <= 1e-9,
          format("B %.4g, delta_max %.4g, %.0f steps outside, max step increase %.2e", report.B, report.delta_max,
                 outside, worst_increase)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"AC1 example 2 equilibrium", ac1},
      {"AC2 example 2 regulation condition", ac2},
      {"AC3 example 2 storage certificate", ac3},
      {"AC4 example 1 condition polynomial", ac4},
      {"AC5 example 2 closed-loop regulation", ac5},
      {"AC6 example 1 tracking", ac6},
      {"AC7 oracle equivalence", ac7},
      {"AC8 contraction property suite", ac8},
      {"AC9 congruence identity", ac9},
      {"AC10 passivity ledger", ac10},
      {"AC11 dissipation monotonicity", ac11},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome outcome;
    const auto start = std::chrono::steady_clock::now();
    try {
      outcome = check();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %s: %s (%.2f s)\n", outcome.pass ? "PASS" : "FAIL", name, outcome.detail.c_str(), seconds);
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
