#include "monoreg/scenario.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include "monoreg/errors.hpp"

namespace monoreg {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ScenarioError(where + ": " + what);
}

const Json& require(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) fail(where, std::string("missing key '") + key + "'");
  return obj.at(key);
}

void reject_unknown(const Json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) known = known || item.key() == key;
    if (!known) fail(where, "unknown key '" + item.key() + "'");
  }
}

double number(const Json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

double number_or(const Json& obj, const char* key, double fallback, const std::string& where) {
  return obj.contains(key) ? number(obj.at(key), where + "." + key) : fallback;
}

Vector parse_vector(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a non-empty array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], where);
  return v;
}

Matrix parse_matrix(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a non-empty array of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty()) fail(where, "rows must be non-empty arrays");
  const std::size_t cols = j[0].size();
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) fail(where, "matrix is not rectangular");
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = number(j[r][c], where);
    }
  }
  return m;
}

bool boolean_or(const Json& obj, const char* key, bool fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_boolean()) fail(where + "." + key, "expected a boolean");
  return obj.at(key).get<bool>();
}

std::string string_or(const Json& obj, const char* key, const std::string& fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_string()) fail(where + "." + key, "expected a string");
  return obj.at(key).get<std::string>();
}

SignalSpec parse_signal(const Json& j, const std::string& where) {
  reject_unknown(j, {"constant", "components"}, where);
  SignalSpec spec;
  spec.constant = parse_vector(require(j, "constant", where), where + ".constant");
  if (j.contains("components")) {
    const Json& list = j.at("components");
    if (!list.is_array()) fail(where + ".components", "expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string at = where + ".components[" + std::to_string(i) + "]";
      const Json& c = list[i];
      reject_unknown(c, {"channel", "waveform", "amplitude", "frequency_hz", "phase", "offset", "square_frequency_hz"},
                     at);
      WaveComponent w;
      const Json& channel = require(c, "channel", at);
      if (!channel.is_number_integer()) fail(at + ".channel", "expected an integer");
      w.channel = channel.get<Eigen::Index>();
      const Json& wave = require(c, "waveform", at);
      if (!wave.is_string()) fail(at + ".waveform", "expected a string");
      try {
        w.waveform = waveform_from_string(wave.get<std::string>());
      } catch (const ContractViolation& e) {
        fail(at + ".waveform", e.what());
      }
      w.amplitude = number(require(c, "amplitude", at), at + ".amplitude");
      w.frequency_hz = number(require(c, "frequency_hz", at), at + ".frequency_hz");
      w.phase = number_or(c, "phase", 0.0, at);
      w.offset = number_or(c, "offset", 0.0, at);
      w.square_frequency_hz = number_or(c, "square_frequency_hz", 0.5, at);
      spec.components.push_back(w);
    }
  }
  return spec;
}

Potential parse_potential(const Json& j, const std::string& where) {
  reject_unknown(j, {"type", "Q"}, where);
  const std::string type = string_or(j, "type", "", where);
  if (type == "zero") return Potential::zero();
  if (type == "log_sum_exp") return Potential::log_sum_exp();
  if (type == "quadratic") return Potential::quadratic(parse_matrix(require(j, "Q", where), where + ".Q"));
  fail(where + ".type", "expected zero, log_sum_exp or quadratic");
}

// Returns the set and whether it follows the reference.
std::pair<ConvexSet, bool> parse_set(const Json& j, const Vector& y_d0, const std::string& where) {
  reject_unknown(j, {"type", "first", "second", "lower", "upper", "vertices"}, where);
  const std::string type = string_or(j, "type", "", where);
  if (type == "segment") {
    if (!j.contains("first") && !j.contains("second")) return {ConvexSet::segment(y_d0), true};
    return {ConvexSet::segment(parse_vector(require(j, "first", where), where + ".first"),
                               parse_vector(require(j, "second", where), where + ".second")),
            false};
  }
  if (type == "box") {
    return {ConvexSet::box(parse_vector(require(j, "lower", where), where + ".lower"),
                           parse_vector(require(j, "upper", where), where + ".upper")),
            false};
  }
  if (type == "hull") {
    const Json& list = require(j, "vertices", where);
    if (!list.is_array() || list.empty()) fail(where + ".vertices", "expected a non-empty array");
    std::vector<Vector> vertices;
    for (const auto& v : list) vertices.push_back(parse_vector(v, where + ".vertices"));
    return {ConvexSet::hull(std::move(vertices)), false};
  }
  fail(where + ".type", "expected segment, box or hull");
}

Json signal_to_json(const SignalSpec& spec) {
  Json j;
  j["constant"] = vector_to_json(spec.constant);
  Json list = Json::array();
  for (const auto& c : spec.components) {
    Json w;
    w["channel"] = c.channel;
    w["waveform"] = to_string(c.waveform);
    w["amplitude"] = c.amplitude;
    w["frequency_hz"] = c.frequency_hz;
    w["phase"] = c.phase;
    w["offset"] = c.offset;
    w["square_frequency_hz"] = c.square_frequency_hz;
    list.push_back(std::move(w));
  }
  j["components"] = std::move(list);
  return j;
}

Json set_to_json(const ConvexSet& set, bool tracks) {
  Json j;
  if (const auto* s = std::get_if<Segment>(&set.shape())) {
    j["type"] = "segment";
    if (!tracks) {
      j["first"] = vector_to_json(s->first);
      j["second"] = vector_to_json(s->second);
    }
  } else if (const auto* b = std::get_if<Box>(&set.shape())) {
    j["type"] = "box";
    j["lower"] = vector_to_json(b->lower);
    j["upper"] = vector_to_json(b->upper);
  } else {
    j["type"] = "hull";
    Json list = Json::array();
    for (const auto& v : std::get<Hull>(set.shape()).vertices) list.push_back(vector_to_json(v));
    j["vertices"] = std::move(list);
  }
  return j;
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector_to_json(const Vector& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Scenario scenario_from_json(const Json& doc) {
  reject_unknown(doc, {"name", "description", "plant", "storage", "controller", "reference", "disturbance", "sim",
                       "analysis"},
                 "scenario");
  try {
    const Json& pj = require(doc, "plant", "scenario");
    reject_unknown(pj, {"A", "Bu", "Bv", "C", "D"}, "plant");
    Plant plant{parse_matrix(require(pj, "A", "plant"), "plant.A"), parse_matrix(require(pj, "Bu", "plant"), "plant.Bu"),
                parse_matrix(require(pj, "Bv", "plant"), "plant.Bv"), parse_matrix(require(pj, "C", "plant"), "plant.C"),
                parse_matrix(require(pj, "D", "plant"), "plant.D")};
    plant.validate();

    std::optional<Matrix> P;
    if (doc.contains("storage")) {
      const Json& sj = doc.at("storage");
      reject_unknown(sj, {"P"}, "storage");
      if (sj.contains("P")) P = parse_matrix(sj.at("P"), "storage.P");
    }

    SignalSpec reference = parse_signal(require(doc, "reference", "scenario"), "reference");
    SignalSpec disturbance = parse_signal(require(doc, "disturbance", "scenario"), "disturbance");
    reference.validate();

    const Json& cj = require(doc, "controller", "scenario");
    reject_unknown(cj, {"epsilon", "potential", "set", "require_contraction", "mode"}, "controller");
    const double epsilon = number(require(cj, "epsilon", "controller"), "controller.epsilon");
    Potential phi = cj.contains("potential") ? parse_potential(cj.at("potential"), "controller.potential")
                                             : Potential::zero();
    const Json default_set = Json{{"type", "segment"}};
    auto [set, tracks] = parse_set(cj.contains("set") ? cj.at("set") : default_set,
                                   signal_eval(reference, 0.0), "controller.set");
    const bool strict = boolean_or(cj, "require_contraction", false, "controller");
    const std::string mode_name = string_or(cj, "mode", "regularized", "controller");
    ControlMode mode = ControlMode::regularized;
    if (mode_name == "equivalent") {
      mode = ControlMode::equivalent;
    } else if (mode_name != "regularized") {
      fail("controller.mode", "expected regularized or equivalent");
    }

    const Json& simj = require(doc, "sim", "scenario");
    reject_unknown(simj, {"x0", "t0", "tf", "dt", "sample_every"}, "sim");
    SimSettings sim;
    sim.x0 = parse_vector(require(simj, "x0", "sim"), "sim.x0");
    sim.t0 = number_or(simj, "t0", 0.0, "sim");
    sim.tf = number(require(simj, "tf", "sim"), "sim.tf");
    sim.dt = number_or(simj, "dt", 1e-4, "sim");
    if (simj.contains("sample_every")) {
      if (!simj.at("sample_every").is_number_integer()) fail("sim.sample_every", "expected an integer");
      sim.sample_every = simj.at("sample_every").get<int>();
    }

    AnalysisSettings analysis;
    if (doc.contains("analysis")) {
      const Json& aj = doc.at("analysis");
      reject_unknown(aj, {"gamma", "storage_max_iterations", "fixed_point_tol", "hvi_tol"}, "analysis");
      analysis.gamma = number_or(aj, "gamma", analysis.gamma, "analysis");
      if (aj.contains("storage_max_iterations")) {
        if (!aj.at("storage_max_iterations").is_number_integer()) {
          fail("analysis.storage_max_iterations", "expected an integer");
        }
        analysis.storage_max_iterations = aj.at("storage_max_iterations").get<int>();
      }
      analysis.fixed_point_tol = number_or(aj, "fixed_point_tol", analysis.fixed_point_tol, "analysis");
      analysis.hvi_tol = number_or(aj, "hvi_tol", analysis.hvi_tol, "analysis");
    }

    Scenario scenario{string_or(doc, "name", "", "scenario"),
                      string_or(doc, "description", "", "scenario"),
                      std::move(plant),
                      std::move(P),
                      RegularizedController(epsilon, std::move(set), std::move(phi)),
                      tracks,
                      strict,
                      std::move(reference),
                      std::move(disturbance),
                      std::move(sim),
                      analysis,
                      mode};
    scenario.validate();
    return scenario;
  } catch (const ContractViolation& e) {
    throw ScenarioError(std::string("invalid scenario: ") + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ScenarioError(std::string("invalid scenario: ") + e.what());
  }
}

Json scenario_to_json(const Scenario& s) {
  Json doc;
  doc["name"] = s.name;
  doc["description"] = s.description;
  doc["plant"] = Json{{"A", matrix_to_json(s.plant.A)},
                      {"Bu", matrix_to_json(s.plant.Bu)},
                      {"Bv", matrix_to_json(s.plant.Bv)},
                      {"C", matrix_to_json(s.plant.C)},
                      {"D", matrix_to_json(s.plant.D)}};
  if (s.P) doc["storage"] = Json{{"P", matrix_to_json(*s.P)}};

  Json potential;
  potential["type"] = s.controller.phi().name();
  if (const auto* q = std::get_if<QuadraticPotential>(&s.controller.phi().form())) {
    potential["Q"] = matrix_to_json(q->Q);
  }
  doc["controller"] = Json{{"epsilon", s.controller.epsilon()},
                           {"potential", potential},
                           {"set", set_to_json(s.controller.set(), s.set_tracks_reference)},
                           {"require_contraction", s.require_contraction},
                           {"mode", to_string(s.mode)}};
  doc["reference"] = signal_to_json(s.reference);
  doc["disturbance"] = signal_to_json(s.disturbance);
  doc["sim"] = Json{{"x0", vector_to_json(s.sim.x0)},
                    {"t0", s.sim.t0},
                    {"tf", s.sim.tf},
                    {"dt", s.sim.dt},
                    {"sample_every", s.sim.sample_every}};
  doc["analysis"] = Json{{"gamma", s.analysis.gamma},
                         {"storage_max_iterations", s.analysis.storage_max_iterations},
                         {"fixed_point_tol", s.analysis.fixed_point_tol},
                         {"hvi_tol", s.analysis.hvi_tol}};
  return doc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file '" + path + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError("malformed JSON in '" + path + "': " + e.what());
  }
  return scenario_from_json(doc);
}

}  // namespace monoreg
