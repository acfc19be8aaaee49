#pragma once

// Shared JSON conversion helpers, private to the library. ordered_json
// keeps key order stable so emitted documents are byte-reproducible.

#include <json.hpp>

#include "epitrack/population.hpp"

namespace epitrack::detail {

using ojson = nlohmann::ordered_json;

ojson population_to_json(const PopulationSpec& spec);
PopulationSpec population_from_json_obj(const ojson& j);

ojson policy_to_json(const TestPolicy& policy);
TestPolicy policy_from_json_obj(const ojson& j);

}  // namespace epitrack::detail
