#pragma once

#include <stdexcept>
#include <string>

namespace monoreg {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on shapes, symmetry or sign was not met by the caller.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

/// An iterative method ran out of budget. `residual` is the last value seen.
class ConvergenceFailure : public Error {
 public:
  ConvergenceFailure(const std::string& what, double residual, int iterations)
      : Error(what), residual_(residual), iterations_(iterations) {}

  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// The IDA equilibrium equation has no unique solution.
class NoAdmissibleEquilibrium : public Error {
 public:
  using Error::Error;
};

/// The regularized fixed-point map is not certified contractive and the
/// caller asked for certification.
class RegularizationInvalid : public Error {
 public:
  using Error::Error;
};

/// A closed-loop run stopped early. `time` is the failing instant.
class IntegrationAbort : public Error {
 public:
  IntegrationAbort(const std::string& what, double time)
      : Error(what), time_(time) {}

  double time() const { return time_; }

 private:
  double time_;
};

/// Scenario file could not be parsed or failed schema validation.
class ScenarioError : public Error {
 public:
  using Error::Error;
};

}  // namespace monoreg
