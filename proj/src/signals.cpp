#include "monoreg/signals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "monoreg/errors.hpp"

namespace monoreg {

namespace {

double sign(double x) { return static_cast<double>((x > 0.0) - (x < 0.0)); }

}  // namespace

std::string to_string(Waveform w) {
  switch (w) {
    case Waveform::sine:
      return "sine";
    case Waveform::sawtooth:
      return "sawtooth";
    case Waveform::square_sign_sin:
      return "square_sign_sin";
    case Waveform::product_sine_square:
      return "product_sine_square";
  }
  return "sine";
}

Waveform waveform_from_string(const std::string& name) {
  for (Waveform w : {Waveform::sine, Waveform::sawtooth, Waveform::square_sign_sin,
                     Waveform::product_sine_square}) {
    if (to_string(w) == name) return w;
  }
  throw ContractViolation("unknown waveform '" + name + "'");
}

void SignalSpec::validate() const {
  if (!constant.allFinite()) throw ContractViolation("signal: non-finite constant");
  for (const auto& c : components) {
    if (c.channel < 0 || c.channel >= constant.size()) {
      throw ContractViolation("signal: channel " + std::to_string(c.channel) + " out of range");
    }
    if (!(c.amplitude >= 0.0) || !std::isfinite(c.amplitude)) {
      throw ContractViolation("signal: amplitude must be >= 0");
    }
    if (!(c.frequency_hz > 0.0) || !std::isfinite(c.frequency_hz)) {
      throw ContractViolation("signal: frequency must be > 0");
    }
    if (c.waveform == Waveform::product_sine_square && !(c.square_frequency_hz > 0.0)) {
      throw ContractViolation("signal: square frequency must be > 0");
    }
    if (!std::isfinite(c.phase) || !std::isfinite(c.offset)) {
      throw ContractViolation("signal: non-finite phase or offset");
    }
  }
}

bool SignalSpec::operator==(const SignalSpec& other) const {
  return constant.size() == other.constant.size() && constant == other.constant &&
         components == other.components;
}

double waveform_value(const WaveComponent& c, double t) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double cycles = c.frequency_hz * t + c.phase;
  double value = 0.0;
  switch (c.waveform) {
    case Waveform::sine:
      value = std::sin(two_pi * cycles);
      break;
    case Waveform::sawtooth:
      value = cycles - std::floor(cycles);
      break;
    case Waveform::square_sign_sin:
      value = sign(std::sin(two_pi * cycles));
      break;
    case Waveform::product_sine_square:
      value = std::sin(two_pi * cycles) * sign(std::sin(two_pi * c.square_frequency_hz * t));
      break;
  }
  return c.amplitude * value + c.offset;
}

Vector signal_eval(const SignalSpec& spec, double t) {
  Vector v = spec.constant;
  for (const auto& c : spec.components) v(c.channel) += waveform_value(c, t);
  return v;
}

std::vector<double> discontinuities(const SignalSpec& spec, double t0, double t1) {
  std::vector<double> times;
  for (const auto& c : spec.components) {
    if (c.waveform != Waveform::sawtooth) continue;
    // Jumps where f t + phase is an integer.
    const double first = std::ceil(c.frequency_hz * t0 + c.phase);
    for (double k = first;; k += 1.0) {
      const double t = (k - c.phase) / c.frequency_hz;
      if (t > t1) break;
      if (t >= t0) times.push_back(t);
    }
  }
  std::sort(times.begin(), times.end());
  return times;
}

}  // namespace monoreg
