#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "monoreg/scenario.hpp"

namespace monoreg::cli {

enum ExitCode : int {
  kOk = 0,
  kConditionFailure = 1,
  kInputError = 2,
  kIoError = 3,
  kNumericalAbort = 4,
};

struct CommandOptions {
  std::string scenario_path;
  std::string out;  // "-" is standard output
  bool plot = false;
  std::vector<double> epsilons;
  bool force = false;
  bool json = false;
};

int cmd_check(const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_analyze(const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_simulate(const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_sweep(const CommandOptions& options, std::ostream& out, std::ostream& err);

/// Parses `monoreg <check|analyze|simulate|sweep> <scenario.json> [flags]`
/// and dispatches. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Result of the checks shared by all commands.
struct CheckReport {
  Json json;
  bool ok = false;
  std::optional<Matrix> P;  // certificate used (given or found)
};

CheckReport check_scenario(const Scenario& scenario);

}  // namespace monoreg::cli
