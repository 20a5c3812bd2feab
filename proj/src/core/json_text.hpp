#pragma once

#include <json.hpp>
#include <string>

namespace innervsense {

// Serializes JSON, replacing invalid UTF-8 in strings with U+FFFD instead of
// throwing. Device text and operator labels arrive unchecked.
inline std::string json_text(const nlohmann::json& j, int indent = -1) {
  return j.dump(indent, ' ', false, nlohmann::json::error_handler_t::replace);
}

}  // namespace innervsense
