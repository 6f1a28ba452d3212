#pragma once

#include <nlohmann/json.hpp>

#include <string>

namespace delayrc {

// Sectioned key-value config format. Grammar:
//   file     := line*
//   line     := header | binding | blank
//   header   := '[' dotted.path ']'          (opens a nested section)
//   binding  := key '=' value                (into the current section)
//   value    := 'true' | 'false' | integer | real | quoted string
//             | bare string | '[' value (',' value)* ']'
//   comment  := '#' to end of line, anywhere outside quotes
// Keys and section paths are [A-Za-z0-9_.-]. Parsed into a JSON tree;
// write_config_text is the exact inverse (round-trip tested).
nlohmann::json parse_config_text(const std::string& text);

std::string write_config_text(const nlohmann::json& config);

/// Reads either a config file in the text format above or a JSON run
/// manifest (whose resolved "config" object is extracted), so any command
/// can be replayed directly from its manifest.
nlohmann::json load_config_file(const std::string& path);

}  // namespace delayrc
