#include "skelanon/config.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace skelanon
{

using nlohmann::json;

void check_keys(const json& j, std::string_view section,
                std::initializer_list<std::string_view> allowed)
{
  if (!j.is_object()) {
    throw ConfigError(fmt::format("{}: expected an object", section));
  }
  for (const auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(fmt::format("{}: unknown key \"{}\"", section, key));
    }
  }
}

HeadInferenceParams head_params_from_json(const json& j)
{
  constexpr std::string_view s = "head_inference";
  check_keys(j, s,
             {"width_ratio", "height_ratio", "neck_ratio", "min_keypoint_confidence",
              "min_facial_keypoints"});
  HeadInferenceParams p;
  read_field(j, "width_ratio", p.width_ratio, s);
  read_field(j, "height_ratio", p.height_ratio, s);
  read_field(j, "neck_ratio", p.neck_ratio, s);
  read_field(j, "min_keypoint_confidence", p.min_keypoint_confidence, s);
  read_field(j, "min_facial_keypoints", p.min_facial_keypoints, s);
  p.validate();
  return p;
}

json to_json(const HeadInferenceParams& p)
{
  return json{{"width_ratio", p.width_ratio},
              {"height_ratio", p.height_ratio},
              {"neck_ratio", p.neck_ratio},
              {"min_keypoint_confidence", p.min_keypoint_confidence},
              {"min_facial_keypoints", p.min_facial_keypoints}};
}

FusionConfig fusion_from_json(const json& j)
{
  constexpr std::string_view s = "fusion";
  check_keys(j, s, {"strategy", "gamma"});
  FusionConfig c;
  std::string strategy(to_string(c.strategy));
  read_field(j, "strategy", strategy, s);
  const auto parsed = parse_fusion_strategy(strategy);
  if (!parsed) {
    throw ConfigError(fmt::format("fusion.strategy: unknown strategy \"{}\"", strategy));
  }
  c.strategy = *parsed;
  read_field(j, "gamma", c.gamma, s);
  c.validate();
  return c;
}

json to_json(const FusionConfig& c)
{
  return json{{"strategy", std::string(to_string(c.strategy))}, {"gamma", c.gamma}};
}

TrackerConfig tracker_from_json(const json& j)
{
  constexpr std::string_view s = "tracker";
  check_keys(j, s,
             {"max_age", "min_hits", "gate_dist", "process_noise", "measurement_noise",
              "initial_velocity_variance"});
  TrackerConfig c;
  read_field(j, "max_age", c.max_age, s);
  read_field(j, "min_hits", c.min_hits, s);
  read_field(j, "gate_dist", c.gate_dist, s);
  read_field(j, "process_noise", c.process_noise, s);
  read_field(j, "measurement_noise", c.measurement_noise, s);
  read_field(j, "initial_velocity_variance", c.initial_velocity_variance, s);
  c.validate();
  return c;
}

json to_json(const TrackerConfig& c)
{
  return json{{"max_age", c.max_age},
              {"min_hits", c.min_hits},
              {"gate_dist", c.gate_dist},
              {"process_noise", c.process_noise},
              {"measurement_noise", c.measurement_noise},
              {"initial_velocity_variance", c.initial_velocity_variance}};
}

EvalConfig eval_from_json(const json& j)
{
  constexpr std::string_view s = "evaluation";
  check_keys(j, s, {"alpha", "beta", "size_filter"});
  EvalConfig c;
  read_field(j, "alpha", c.alpha, s);
  read_field(j, "beta", c.beta, s);
  if (auto it = j.find("size_filter"); it != j.end() && !it->is_null()) {
    double v = 0.0;
    read_field(j, "size_filter", v, s);
    c.size_filter = v;
  }
  c.validate();
  return c;
}

json to_json(const EvalConfig& c)
{
  return json{{"alpha", c.alpha},
              {"beta", c.beta},
              {"size_filter", c.size_filter ? json(*c.size_filter) : json(nullptr)}};
}

AnonymizeConfig anonymize_from_json(const json& j)
{
  constexpr std::string_view s = "anonymize";
  check_keys(j, s, {"method", "blur_sigma_ratio", "pixel_blocks", "margin_ratio"});
  AnonymizeConfig c;
  std::string method(to_string(c.method));
  read_field(j, "method", method, s);
  const auto parsed = parse_anonymize_method(method);
  if (!parsed) {
    throw ConfigError(fmt::format("anonymize.method: unknown method \"{}\"", method));
  }
  c.method = *parsed;
  read_field(j, "blur_sigma_ratio", c.blur_sigma_ratio, s);
  read_field(j, "pixel_blocks", c.pixel_blocks, s);
  read_field(j, "margin_ratio", c.margin_ratio, s);
  c.validate();
  return c;
}

json to_json(const AnonymizeConfig& c)
{
  return json{{"method", std::string(to_string(c.method))},
              {"blur_sigma_ratio", c.blur_sigma_ratio},
              {"pixel_blocks", c.pixel_blocks},
              {"margin_ratio", c.margin_ratio}};
}

}  // namespace skelanon
