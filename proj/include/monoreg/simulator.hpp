#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "monoreg/controller.hpp"
#include "monoreg/hvi.hpp"
#include "monoreg/plant.hpp"
#include "monoreg/signals.hpp"

namespace monoreg {

enum class ControlMode {
  regularized,  // ũ from the fixed point of f∘g
  equivalent,   // oracle: exact control from the hemivariational inequality
};

struct SimSettings {
  Vector x0;
  double t0 = 0.0;
  double tf = 10.0;
  double dt = 1e-4;
  int sample_every = 1;  // record every k-th step (the final state is always recorded)
};

struct AnalysisSettings {
  double gamma = 1e-3;               // strictness margin for the storage search
  int storage_max_iterations = 5000;
  double fixed_point_tol = 1e-12;
  double hvi_tol = 1e-10;
};

struct Scenario {
  std::string name;
  std::string description;
  Plant plant;
  std::optional<Matrix> P;
  RegularizedController controller;
  /// When true, S(t) = conv{0, y_d(t)} follows the reference; otherwise the
  /// controller's set is used as given.
  bool set_tracks_reference = true;
  bool require_contraction = false;
  SignalSpec reference;    // y_d(t)
  SignalSpec disturbance;  // v(t); its constant part is v⁺
  SimSettings sim;
  AnalysisSettings analysis;
  ControlMode mode = ControlMode::regularized;

  /// Throws ContractViolation on inconsistent dimensions or time settings.
  void validate() const;
  bool operator==(const Scenario& other) const;
};

std::string to_string(ControlMode mode);

struct Sample {
  double t = 0.0;
  Vector x;
  Vector y;
  Vector u;
  Vector v;
  Vector y_d;
  double H2 = 0.0;      // (x − x*)ᵀP(x − x*); NaN without P
  double supply = 0.0;  // ⟨u, y⟩
  double dist_S = 0.0;  // distance from y to S(t)
  bool omega_member = false;
};

struct Trajectory {
  std::vector<Sample> samples;
  std::optional<double> reach_time;
  double supply_integral = 0.0;  // trapezoidal ∫⟨u, y⟩dt over every step
  double max_control_norm = 0.0; // over every step
  int max_fixed_point_iterations = 0;
  bool contraction_certified = false;
  ContractionReport contraction;
};

/// State derivative and the port signals it was computed from.
struct RhsEvaluation {
  Vector dx;
  Vector y;
  Vector u;
  Vector v;
  int iterations = 0;
};

/// ẋ = Ax − B_u u + B_v v(t) with u from the regularized controller.
/// `warm` is the previous output, updated in place.
RhsEvaluation closed_loop_rhs(const Plant& plant, const OutputLoop& loop, const Vector& x, double t,
                              const SignalSpec& disturbance, std::optional<Vector>* warm = nullptr,
                              double tol = 1e-12);

/// Reach time from membership flags: start of the final run of `true`
/// values, where a single `false` sample between two `true` samples does
/// not break the run.
std::optional<double> reach_time(const std::vector<Sample>& samples);

/// max ‖y − y_d‖ over the samples with t ≥ from; 0 when there are none.
double max_tracking_error(const Trajectory& trajectory, double from);

using ProgressCallback = std::function<void(double t)>;

/// Fixed-step classical RK4. Throws IntegrationAbort (with the failing time)
/// when the state becomes non-finite or the output solve fails, and
/// RegularizationInvalid when strict contraction is requested and fails.
Trajectory integrate(const Scenario& scenario, const ProgressCallback& progress = {});

/// CSV: t, x0.., y0.., u0.., v0.., H2, supply, distS, inOmega with 17
/// significant digits.
void write_csv(const Trajectory& trajectory, std::ostream& out);

}  // namespace monoreg
