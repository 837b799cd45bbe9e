#include "monoreg/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "monoreg/analysis.hpp"
#include "monoreg/errors.hpp"
#include "monoreg/plot_script.hpp"

namespace monoreg::cli {

namespace {

constexpr int kReferenceSamples = 2001;

// JSON has no inf/nan; write them as strings so reports stay parseable.
Json num(double x) {
  if (x == 0.0) return 0.0;
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void print_text(const Json& j, std::ostream& out, const std::string& prefix = "") {
  if (j.is_object()) {
    for (const auto& item : j.items()) {
      print_text(item.value(), out, prefix.empty() ? item.key() : prefix + "." + item.key());
    }
    return;
  }
  out << prefix << ": ";
  if (j.is_number_float()) {
    out << fmt(j.get<double>());
  } else if (j.is_string()) {
    out << j.get<std::string>();
  } else {
    out << j.dump();
  }
  out << "\n";
}

void emit(const Json& j, bool as_json, std::ostream& out) {
  if (as_json) {
    out << j.dump(2) << "\n";
  } else {
    print_text(j, out);
  }
}

Json condition_json(const RegulationCondition& c) {
  return Json{{"lhs", num(c.lhs)}, {"rhs", num(c.rhs)}, {"margin", num(c.margin)}, {"satisfied", c.margin < 0.0}};
}

Json contraction_json(const ContractionReport& r, double epsilon, double L) {
  return Json{{"epsilon", num(epsilon)},       {"lipschitz_grad", num(L)},   {"beta", num(r.beta)},
              {"factor", num(r.factor)},       {"epsilon_max", num(r.epsilon_max)},
              {"certified", r.factor < 1.0}};
}

// Loads the scenario or reports an input error.
std::optional<Scenario> load(const CommandOptions& options, std::ostream& err) {
  try {
    return load_scenario(options.scenario_path);
  } catch (const ScenarioError& e) {
    err << "error: " << e.what() << "\n";
    return std::nullopt;
  }
}

std::string replace_extension(const std::string& path, const std::string& ext) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) return path.substr(0, dot) + ext;
  return path + ext;
}

Scenario with_certificate(Scenario scenario, const CheckReport& check) {
  if (!scenario.P && check.P) scenario.P = check.P;
  return scenario;
}

Json trajectory_summary(const Scenario& scenario, const Trajectory& traj) {
  const Sample& last = traj.samples.back();
  Json j;
  j["samples"] = traj.samples.size();
  j["reach_time"] = traj.reach_time ? num(*traj.reach_time) : Json(nullptr);
  j["max_error_after_reach"] = traj.reach_time ? num(max_tracking_error(traj, *traj.reach_time)) : Json(nullptr);
  j["final_error"] = num((last.y - last.y_d).norm());
  j["supply_integral"] = num(traj.supply_integral);
  j["max_control_norm"] = num(traj.max_control_norm);
  j["max_fixed_point_iterations"] = traj.max_fixed_point_iterations;
  j["contraction_certified"] = traj.contraction_certified;
  j["mode"] = to_string(scenario.mode);
  return j;
}

}  // namespace

CheckReport check_scenario(const Scenario& scenario) {
  const Plant& plant = scenario.plant;
  const Potential& phi = scenario.controller.phi();
  CheckReport report;
  Json& j = report.json;
  Json failures = Json::array();

  j["command"] = "check";
  j["scenario"] = scenario.name;

  // Passivity certificate: the scenario's P, or one found by the search.
  Json pj;
  pj["D_positive_definite"] = is_positive_definite(plant.D);
  std::optional<StorageCertificate> cert;
  if (scenario.P) {
    pj["source"] = "scenario";
    cert = verify_passivity(plant, *scenario.P, 0.0);
  } else {
    StorageSearchOptions opts;
    opts.gamma = scenario.analysis.gamma;
    opts.max_iterations = scenario.analysis.storage_max_iterations;
    const StorageSearchResult found = find_storage_matrix(plant, opts);
    pj["source"] = "search";
    pj["search_status"] = to_string(found.status);
    pj["search_iterations"] = found.iterations;
    cert = found.certificate;
  }
  if (cert) {
    pj["lmi_max_eig"] = num(cert->lmi_max_eig);
    pj["p_min_eig"] = num(cert->p_min_eig);
    pj["valid"] = cert->valid;
    if (cert->valid) report.P = cert->P;
  } else {
    pj["valid"] = false;
  }
  j["passivity"] = pj;
  if (!report.P) failures.push_back("passivity");

  // Equilibrium and the regulation condition at the initial reference.
  const Vector v_plus = scenario.disturbance.constant;
  const Vector y_d0 = signal_eval(scenario.reference, scenario.sim.t0);
  try {
    const RegulatorDesign design = ida_equilibrium(plant, v_plus, y_d0);
    Json ej;
    ej["y_d"] = vector_to_json(y_d0);
    ej["v_plus"] = vector_to_json(v_plus);
    if (design.x_bar.allFinite()) {
      ej["x_bar"] = vector_to_json(design.x_bar);
    } else {
      ej["x_bar"] = nullptr;
    }
    ej["x_star"] = vector_to_json(design.x_star);
    ej["u_bar"] = vector_to_json(design.u_bar);
    ej["output_residual"] = num((plant.C * design.x_star - plant.D * design.u_bar - y_d0).norm());
    j["equilibrium"] = ej;

    Json cj = condition_json(regulation_condition(plant, design.x_star, y_d0, phi));
    bool satisfied = cj["satisfied"].get<bool>();
    if (!scenario.reference.is_constant()) {
      // The reference moves; the condition has to hold along all of it.
      double worst_margin = -std::numeric_limits<double>::infinity();
      double worst_t = scenario.sim.t0;
      const double span = scenario.sim.tf - scenario.sim.t0;
      for (int k = 0; k < kReferenceSamples; ++k) {
        const double t = scenario.sim.t0 + span * k / (kReferenceSamples - 1);
        const Vector y_d = signal_eval(scenario.reference, t);
        const RegulatorDesign dk = ida_equilibrium(plant, v_plus, y_d);
        const double margin = regulation_condition(plant, dk.x_star, y_d, phi).margin;
        if (margin > worst_margin) {
          worst_margin = margin;
          worst_t = t;
        }
      }
      cj["reference_samples"] = kReferenceSamples;
      cj["worst_margin"] = num(worst_margin);
      cj["worst_time"] = num(worst_t);
      satisfied = worst_margin < 0.0;
      cj["satisfied"] = satisfied;
    }
    j["regulation_condition"] = cj;
    if (!satisfied) failures.push_back("regulation_condition");
  } catch (const NoAdmissibleEquilibrium& e) {
    j["equilibrium"] = Json{{"error", e.what()}};
    failures.push_back("equilibrium");
  }

  const ContractionReport contraction =
      contraction_factor(plant.D, phi.lipschitz_grad(), scenario.controller.epsilon());
  Json kj = contraction_json(contraction, scenario.controller.epsilon(), phi.lipschitz_grad());
  kj["required"] = scenario.require_contraction;
  j["contraction"] = kj;
  if (scenario.require_contraction && !(contraction.factor < 1.0)) failures.push_back("contraction");

  report.ok = failures.empty();
  j["ok"] = report.ok;
  j["failures"] = failures;
  return report;
}

int cmd_check(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  const auto scenario = load(options, err);
  if (!scenario) return kInputError;
  try {
    const CheckReport report = check_scenario(*scenario);
    emit(report.json, options.json, out);
    return report.ok ? kOk : kConditionFailure;
  } catch (const ContractViolation& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kNumericalAbort;
  }
}

int cmd_analyze(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  const auto scenario = load(options, err);
  if (!scenario) return kInputError;
  try {
    const CheckReport check = check_scenario(*scenario);
    if (!check.ok) {
      emit(check.json, options.json, out);
      err << "error: check failed; no bound computed\n";
      return kConditionFailure;
    }
    const Vector y_d0 = signal_eval(scenario->reference, scenario->sim.t0);
    const RegulatorDesign design = ida_equilibrium(scenario->plant, scenario->disturbance.constant, y_d0);
    const RobustnessReport r =
        disturbance_bound(scenario->plant, *check.P, design.x_star, y_d0, scenario->controller.phi());

    Json j;
    j["command"] = "analyze";
    j["scenario"] = scenario->name;
    j["storage_source"] = check.json["passivity"]["source"];
    j["y_d"] = vector_to_json(y_d0);
    j["x_star"] = vector_to_json(design.x_star);
    j["regulation_condition"] = condition_json(r.condition);
    j["omega_margin"] = num(r.condition.margin);
    j["omega"] = Json{{"a", vector_to_json(r.omega.a)}, {"b", num(r.omega.b)}};
    j["lambda_min_P"] = num(r.lambda_min_P);
    j["lambda_max_P"] = num(r.lambda_max_P);
    j["lambda_min_R"] = num(r.lambda_min_R);
    j["alpha_sup"] = num(r.alpha_sup);
    j["alpha"] = num(r.alpha);
    j["lambda_min_R_Lambda"] = num(r.lambda_min_R_Lambda);
    j["lambda_max_BvPLinvPBv"] = num(r.lambda_max_BvPLinvPBv);
    j["delta_max"] = num(r.delta_max);
    j["B"] = num(r.B);
    j["valid"] = r.valid;
    if (options.json) {
      j["R"] = matrix_to_json(r.R);
      j["R_Lambda"] = matrix_to_json(r.R_Lambda);
      j["P"] = matrix_to_json(*check.P);
    }
    emit(j, options.json, out);
    return r.valid ? kOk : kConditionFailure;
  } catch (const ContractViolation& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kNumericalAbort;
  }
}

int cmd_simulate(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  const auto scenario = load(options, err);
  if (!scenario) return kInputError;
  const std::string out_path = options.out.empty() ? "-" : options.out;
  if (options.plot && out_path == "-") {
    err << "error: --plot needs --out PATH\n";
    return kInputError;
  }
  try {
    const CheckReport check = check_scenario(*scenario);
    if (!check.ok && !options.force) {
      emit(check.json, options.json, err);
      err << "error: check failed (use --force to simulate anyway)\n";
      return kConditionFailure;
    }
    const Scenario run = with_certificate(*scenario, check);
    const Trajectory traj = integrate(run);

    if (out_path == "-") {
      write_csv(traj, out);
    } else {
      std::ofstream file(out_path);
      if (!file) {
        err << "error: cannot write '" << out_path << "'\n";
        return kIoError;
      }
      write_csv(traj, file);
      file.close();
      if (!file) {
        err << "error: failed writing '" << out_path << "'\n";
        return kIoError;
      }
    }
    if (options.plot) {
      const std::string script_path = replace_extension(out_path, ".gp");
      std::ofstream script(script_path);
      if (!script) {
        err << "error: cannot write '" << script_path << "'\n";
        return kIoError;
      }
      script << plot_script(out_path, run.plant.n(), run.plant.m(), run.name, replace_extension(out_path, ".png"));
      if (!script) return kIoError;
    }
    emit(trajectory_summary(run, traj), options.json, out_path == "-" ? err : out);
    return kOk;
  } catch (const IntegrationAbort& e) {
    err << "error: integration aborted at t = " << fmt(e.time()) << ": " << e.what() << "\n";
    return kNumericalAbort;
  } catch (const RegularizationInvalid& e) {
    err << "error: " << e.what() << "\n";
    return kConditionFailure;
  } catch (const ContractViolation& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kNumericalAbort;
  }
}

int cmd_sweep(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  if (options.epsilons.empty()) {
    err << "error: sweep needs a non-empty --epsilon list\n";
    return kInputError;
  }
  for (double e : options.epsilons) {
    if (!(e > 0.0) || !std::isfinite(e)) {
      err << "error: every epsilon must be > 0\n";
      return kInputError;
    }
  }
  const auto scenario = load(options, err);
  if (!scenario) return kInputError;

  struct Row {
    double epsilon = 0.0;
    ContractionReport contraction;
    std::string status = "ok";
    std::optional<double> reach;
    double max_error = std::numeric_limits<double>::quiet_NaN();
    double max_u = std::numeric_limits<double>::quiet_NaN();
    double supply = std::numeric_limits<double>::quiet_NaN();
  };

  try {
    const CheckReport check = check_scenario(*scenario);
    if (!check.ok && !options.force) {
      emit(check.json, options.json, err);
      err << "error: check failed (use --force to sweep anyway)\n";
      return kConditionFailure;
    }
    const Scenario base = with_certificate(*scenario, check);
    const double L = base.controller.phi().lipschitz_grad();

    auto run_one = [&base, L](double epsilon) {
      Row row;
      row.epsilon = epsilon;
      row.contraction = contraction_factor(base.plant.D, L, epsilon);
      Scenario s = base;
      s.controller = RegularizedController(epsilon, base.controller.set(), base.controller.phi());
      s.require_contraction = false;
      try {
        const Trajectory traj = integrate(s);
        row.reach = traj.reach_time;
        if (row.reach) row.max_error = max_tracking_error(traj, *row.reach);
        row.max_u = traj.max_control_norm;
        row.supply = traj.supply_integral;
      } catch (const Error&) {
        row.status = "abort";
      }
      if (row.status == "ok" && !(row.contraction.factor < 1.0)) row.status = "contraction_invalid";
      return row;
    };

    // Independent runs; rows are collected in input order.
    std::vector<std::future<Row>> jobs;
    jobs.reserve(options.epsilons.size());
    for (double e : options.epsilons) jobs.push_back(std::async(std::launch::async, run_one, e));
    std::vector<Row> rows;
    for (auto& job : jobs) rows.push_back(job.get());

    std::ofstream file;
    std::ostream* sink = &out;
    if (!options.out.empty() && options.out != "-") {
      file.open(options.out);
      if (!file) {
        err << "error: cannot write '" << options.out << "'\n";
        return kIoError;
      }
      sink = &file;
    }
    *sink << "epsilon,beta,factor,epsilon_max,certified,status,reach_time,max_error_after_reach,max_control_norm,"
             "supply_integral\n";
    bool aborted = false;
    for (const Row& r : rows) {
      aborted = aborted || r.status == "abort";
      *sink << fmt(r.epsilon) << ',' << fmt(r.contraction.beta) << ',' << fmt(r.contraction.factor) << ','
            << fmt(r.contraction.epsilon_max) << ',' << (r.contraction.factor < 1.0 ? 1 : 0) << ',' << r.status << ','
            << (r.reach ? fmt(*r.reach) : "nan") << ',' << fmt(r.max_error) << ',' << fmt(r.max_u) << ','
            << fmt(r.supply) << '\n';
    }
    if (file.is_open()) {
      file.close();
      if (!file) return kIoError;
    }
    return aborted ? kNumericalAbort : kOk;
  } catch (const ContractViolation& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kNumericalAbort;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multivalued passivity-based output regulation", "monoreg"};
  std::string command;
  CommandOptions options;
  options.out = "-";
  std::string epsilon_list;
  bool epsilon_given = false;

  app.add_option("command", command, "check | analyze | simulate | sweep")
      ->required()
      ->check(CLI::IsMember({"check", "analyze", "simulate", "sweep"}));
  app.add_option("scenario", options.scenario_path, "Scenario JSON file")->required();
  app.add_option("--out", options.out, "Output path ('-' for standard output)");
  app.add_flag("--plot", options.plot, "Also write a gnuplot script next to --out");
  app.add_option("--epsilon", epsilon_list, "Comma-separated epsilon values for sweep")
      ->each([&](const std::string&) { epsilon_given = true; });
  app.add_flag("--force", options.force, "Simulate even if the checks fail");
  app.add_flag("--json", options.json, "Machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  if (epsilon_given) {
    std::stringstream ss(epsilon_list);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      try {
        std::size_t used = 0;
        const double value = std::stod(item, &used);
        if (used != item.size()) throw std::invalid_argument(item);
        options.epsilons.push_back(value);
      } catch (const std::exception&) {
        err << "error: invalid epsilon '" << item << "'\n";
        return kInputError;
      }
    }
  }

  if (command == "check") return cmd_check(options, out, err);
  if (command == "analyze") return cmd_analyze(options, out, err);
  if (command == "simulate") return cmd_simulate(options, out, err);
  return cmd_sweep(options, out, err);
}

}  // namespace monoreg::cli
