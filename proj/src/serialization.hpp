#pragma once

// Internal JSON converters shared between modules; the public headers expose
// text- and file-based entry points only.

#include <json.hpp>

#include "qfcusum/datagen.hpp"

namespace qfcusum {

nlohmann::json scenario_to_json(const ScenarioSpec& spec);
ScenarioSpec scenario_from_json(const nlohmann::json& j);

}  // namespace qfcusum
