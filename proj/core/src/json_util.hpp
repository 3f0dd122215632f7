#pragma once

// Private helpers shared by the JSON-backed file formats.

#include <string>
#include <vector>

#include "json.hpp"
#include "hyper/types.hpp"

namespace hyper::detail {

using nlohmann::json;

inline json points_to_json(const std::vector<Vec2>& points) {
  json arr = json::array();
  for (const auto& p : points) arr.push_back({p.x(), p.y()});
  return arr;
}

inline std::vector<Vec2> points_from_json(const json& arr, const char* field) {
  if (!arr.is_array()) throw std::invalid_argument(std::string(field) + " is not an array");
  std::vector<Vec2> out;
  out.reserve(arr.size());
  for (const auto& p : arr) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw std::invalid_argument(std::string(field) + " contains a non-[x, y] entry");
    }
    out.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  return out;
}

/// Parses a JSON object; returns a null json (discarded) on failure.
inline json parse_object_or_null(const std::string& text) {
  if (text.empty()) return json();
  json j = json::parse(text, nullptr, false);
  return j.is_discarded() ? json() : j;
}

}  // namespace hyper::detail
