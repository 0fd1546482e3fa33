#pragma once

// JSON (de)serialization of the per-stage parameter blocks. Every field is
// optional and falls back to the struct default; unknown keys are rejected
// with ConfigError.

#include <initializer_list>
#include <string_view>

#include <fmt/format.h>

#include "json.hpp"
#include "skelanon/anonymizer.hpp"
#include "skelanon/evaluator.hpp"
#include "skelanon/fusion.hpp"
#include "skelanon/head_infer.hpp"
#include "skelanon/tracker.hpp"

namespace skelanon
{

/// Throws ConfigError naming `section` if `j` is not an object or holds a key
/// outside `allowed`.
void check_keys(const nlohmann::json& j, std::string_view section,
                std::initializer_list<std::string_view> allowed);

/// Copies j[key] into `out` when present; wrong types raise ConfigError.
template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out, std::string_view section)
{
  auto it = j.find(key);
  if (it == j.end()) {
    return;
  }
  try {
    out = it->template get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(fmt::format("{}.{}: wrong type ({})", section, key, it->dump()));
  }
}

HeadInferenceParams head_params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const HeadInferenceParams& p);

FusionConfig fusion_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FusionConfig& c);

TrackerConfig tracker_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrackerConfig& c);

EvalConfig eval_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EvalConfig& c);

AnonymizeConfig anonymize_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AnonymizeConfig& c);

}  // namespace skelanon
