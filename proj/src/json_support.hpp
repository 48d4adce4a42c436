#pragma once

// Internal glue between core types and the JSON scenario format. Not installed.

#include <json.hpp>

#include "branched/interval_set.hpp"

namespace branched {

IntervalSet interval_set_from_json(const nlohmann::json& j);

}  // namespace branched
