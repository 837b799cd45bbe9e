#pragma once

#include <string>
#include <vector>

#include "monoreg/numerics.hpp"

namespace monoreg {

enum class Waveform {
  sine,                 // A sin(2π(f t + phase))
  sawtooth,             // A frac(f t + phase), rising ramp
  square_sign_sin,      // A sign(sin(2π(f t + phase)))
  product_sine_square,  // A sin(2π(f t + phase)) sign(sin(2π f_sq t))
};

std::string to_string(Waveform w);
/// Throws ContractViolation for an unknown name.
Waveform waveform_from_string(const std::string& name);

struct WaveComponent {
  Eigen::Index channel = 0;
  Waveform waveform = Waveform::sine;
  double amplitude = 0.0;
  double frequency_hz = 1.0;
  double phase = 0.0;  // cycles
  double offset = 0.0;
  double square_frequency_hz = 0.5;  // product_sine_square only

  bool operator==(const WaveComponent&) const = default;
};

/// v(t) = constant + Σ components. Used for disturbances and references.
struct SignalSpec {
  Vector constant;
  std::vector<WaveComponent> components;

  Eigen::Index dim() const { return constant.size(); }
  bool is_constant() const { return components.empty(); }
  /// Throws ContractViolation on channel, amplitude or frequency errors.
  void validate() const;

  bool operator==(const SignalSpec& other) const;
};

double waveform_value(const WaveComponent& c, double t);

Vector signal_eval(const SignalSpec& spec, double t);

/// Alias matching the disturbance use of a signal.
inline Vector disturbance_eval(const SignalSpec& spec, double t) { return signal_eval(spec, t); }

/// Times in [t0, t1] at which some sawtooth component jumps.
std::vector<double> discontinuities(const SignalSpec& spec, double t0, double t1);

}  // namespace monoreg
