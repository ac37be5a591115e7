#pragma once

#include <string>

#include "json.hpp"

namespace bes {

/// Parse a TOML document into a JSON value. Covers the slice of TOML that
/// declarative run configs use: tables, arrays of tables, dotted keys,
/// basic/literal strings, integers, floats, booleans, arrays (multi-line),
/// and inline tables. Dates and multi-line strings are rejected with a
/// location-bearing ParseError.
nlohmann::ordered_json toml_to_json(const std::string &text);

} // namespace bes
