#pragma once

#include <string>

#include <json.hpp>

#include "monoreg/simulator.hpp"

namespace monoreg {

using Json = nlohmann::ordered_json;

/// Throws ScenarioError on schema violations and inconsistent dimensions.
Scenario scenario_from_json(const Json& doc);
Json scenario_to_json(const Scenario& scenario);

/// Throws ScenarioError when the file cannot be read or parsed.
Scenario load_scenario(const std::string& path);

Json matrix_to_json(const Matrix& m);
Json vector_to_json(const Vector& v);

}  // namespace monoreg
