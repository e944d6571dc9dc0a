#pragma once

// Line-oriented scenario files:
//
//   # comment
//   [system]            single section
//   h = 5.0
//   [[governor]]        one list item per occurrence
//   id = G1
//
// Unknown sections and keys are errors. See docs/config.md for the key table.

#include "lfcsim/scenario.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace lfcsim {

/// Parses and validates scenario text. Throws ConfigError with a
/// "line N [section] key" location.
Scenario parse_scenario(std::string_view text);

/// Reads and parses a scenario file. Throws ConfigError when unreadable.
Scenario load_scenario(const std::filesystem::path& path);

/// Writes every resolved parameter; parse_scenario(serialize_scenario(s)) == s.
std::string serialize_scenario(const Scenario& s);

/// Grid syntax: "a,b,c" or "start:step:stop" (inclusive). Throws
/// InvalidArgument on malformed input.
std::vector<double> parse_grid(std::string_view text);

/// Fixed 17-significant-digit text ("%.17g"); reads back bit-exact.
std::string format_double(double v);

} // namespace lfcsim
