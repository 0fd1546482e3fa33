///////////////////////////////////////////////////////////////////////////////
// synth.hpp: synthetic pedestrian scenes with known ground truth
//
// Pedestrians are stick figures whose keypoints are laid out with the same
// body proportions the head inference uses, so a noise-free pose reproduces
// its head label exactly. Each pedestrian yields, per frame:
//   - a head label (when its head is at least label_min_px tall),
//   - a face label when front-facing,
//   - a pose (noisy keypoints, facial keypoints possibly dropped when
//     back-facing),
//   - a face detection when front-facing and the head is at least
//     drop_below_px tall.
// The tally records which channel could see each pedestrian.
///////////////////////////////////////////////////////////////////////////////

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "json.hpp"
#include "skelanon/formats.hpp"
#include "skelanon/head_infer.hpp"

namespace skelanon
{

/// An explicitly placed pedestrian.
struct Actor
{
  Point head_center;  // at frame 0
  double vx{0.0};     // px/frame
  double vy{0.0};
  double head_px_start{40.0};  // head height at the first and last frame
  double head_px_end{40.0};
  bool front_facing{true};
  double bob_phase{0.0};
};

struct FaceDetectorModel
{
  double drop_below_px{40.0};  // heads smaller than this get no face detection
  double jitter_px{0.0};       // std-dev of per-coordinate box noise
  double confidence_min{0.5};
  double confidence_max{0.9};
};

struct PoseModel
{
  double keypoint_noise_px{0.0};  // std-dev of per-coordinate keypoint noise
  double back_facial_dropout{1.0};  // P(facial keypoints absent | back-facing)
  double confidence_min{0.6};
  double confidence_max{1.0};
  double miss_probability{0.0};  // P(no pose emitted for a pedestrian in a frame)
};

struct ScenarioConfig
{
  int pedestrians{6};
  int frames{50};
  std::uint64_t seed{1};
  int image_width{1920};
  int image_height{1440};
  double head_px_min{20.0};  // depth range as apparent head height
  double head_px_max{80.0};
  double walk_speed_px{3.0};
  double bob_amplitude_px{0.0};
  double bob_frequency{0.1};  // cycles per frame
  double front_facing_fraction{0.5};
  double label_min_px{0.0};  // annotators skip heads smaller than this
  FaceDetectorModel face;
  PoseModel pose;
  HeadInferenceParams body;
  std::vector<Actor> actors;  // replaces the random pedestrians when non-empty

  void validate() const;
};

struct TallyEntry
{
  int pedestrian{0};
  BBox head;
  std::optional<BBox> face;  // present when front-facing
  bool labeled{false};
  bool front_facing{false};
  bool face_detected{false};
  bool pose_emitted{false};
  bool facial_keypoints{false};
};

struct TallyFrame
{
  int frame{0};
  std::vector<TallyEntry> entries;
};

struct SyntheticScene
{
  LabelFile labels;
  PoseFile poses;
  DetectionFile faces;
  std::vector<TallyFrame> tally;
};

SyntheticScene generate(const ScenarioConfig& cfg);

/// Writes labels.json, poses.json, faces.json and tally.json into `dir`.
void write_scene(const std::filesystem::path& dir, const SyntheticScene& scene);

nlohmann::json tally_to_json(const std::vector<TallyFrame>& tally);
ScenarioConfig scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const ScenarioConfig& cfg);

}  // namespace skelanon
