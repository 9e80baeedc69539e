#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "circpolicy/model.hpp"

namespace circpolicy {

/// Parses a JSON scenario. Throws ParseError (with line and column) for
/// malformed text and ValidationError listing every problem, each prefixed by
/// its field path, for well-formed text describing an invalid scenario.
Scenario parse_scenario(std::string_view text);

/// Reads and parses a scenario file. Throws Error when it cannot be read.
Scenario load_scenario(const std::filesystem::path& path);

/// Pretty-printed JSON. Currency amounts are exact decimal strings, so
/// parse_scenario(scenario_to_json(s)) == s.
std::string scenario_to_json(const Scenario& scenario);

/// Writes scenario_to_json atomically.
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

}  // namespace circpolicy
