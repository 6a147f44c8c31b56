#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "mlitune/harness.hpp"

namespace mlitune {

/// Reads and validates a JSON scenario. Omitted optional keys take their
/// defaults; unknown keys are rejected. Errors are ScenarioError with the
/// offending key and, where it can be located, the line.
Scenario parse_scenario(const std::filesystem::path& path);

/// Same as parse_scenario on an in-memory document. `source` names it in
/// diagnostics.
Scenario parse_scenario_text(std::string_view text, std::string_view source = "<scenario>");

/// Canonical document with every key spelled out.
std::string scenario_to_json(const Scenario& scenario, int indent = 2);

}  // namespace mlitune
