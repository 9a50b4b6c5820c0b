#pragma once

#include "json.hpp"

#include "hwave/diagnostics_t.hpp"
#include "hwave/errors.hpp"

namespace hwave {

// Grid1D as {"start", "step", "count", "boundary"}; parsing also accepts
// {"half_width", "step"} for a closed symmetric grid.
nlohmann::ordered_json to_json(const Grid1D& g);
Grid1D grid_from_json(const nlohmann::json& j);

nlohmann::ordered_json to_json(const TruncationPolicy& p);
// Missing fields keep their defaults.
TruncationPolicy truncation_from_json(const nlohmann::json& j, TruncationPolicy base = {});

nlohmann::ordered_json to_json(const IndexWindow& w);
IndexWindow window_from_json(const nlohmann::json& j, IndexWindow base = {});

nlohmann::ordered_json to_json(const DiagnosticCurve& c);
nlohmann::ordered_json to_json(const ConditionReport& r);

// Throws ConfigError naming the key when j[key] is missing or mistyped.
template <class T>
T get_as(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("missing or invalid field '") + key + "'");
  }
}

}  // namespace hwave
