///////////////////////////////////////////////////////////////////////////////
// formats.hpp: schema-1 interchange files for poses, detections and labels
//
// A file is either one JSON document
//   {"schema": 1, "frames": [ <record>, ... ]}
// or, when the path ends in .ndjson / .jsonl, one <record> per line.
//
//   pose record:      {"frame": 0, "poses": [{"keypoints": [[x, y, c] x 17]}]}
//   detection record: {"frame": 0, "boxes": [{"x1","y1","x2","y2","confidence",
//                                             "source": "face"|"head", "track_id"?}]}
//   label record:     {"frame": 0, "faces": [[x1,y1,x2,y2]], "heads": [...],
//                      "links"?: [[face_idx, head_idx]]}
//
// Frames must be unique and strictly increasing.
///////////////////////////////////////////////////////////////////////////////

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include "json.hpp"
#include "skelanon/evaluator.hpp"
#include "skelanon/geometry.hpp"

namespace skelanon
{

inline constexpr int kSchemaVersion = 1;

struct LabelRecord
{
  int frame{0};
  std::vector<BBox> faces;
  std::vector<BBox> heads;
  std::optional<std::vector<std::pair<std::size_t, std::size_t>>> links;

  friend bool operator==(const LabelRecord&, const LabelRecord&) = default;
};

using PoseFile = std::vector<PoseFrame>;
using DetectionFile = std::vector<DetectionFrame>;
using LabelFile = std::vector<LabelRecord>;

// In-memory documents. Parsers throw SchemaError naming the frame and field.
nlohmann::json poses_to_json(const PoseFile& poses);
PoseFile poses_from_json(const nlohmann::json& doc);
nlohmann::json detections_to_json(const DetectionFile& dets);
DetectionFile detections_from_json(const nlohmann::json& doc);
nlohmann::json labels_to_json(const LabelFile& labels);
LabelFile labels_from_json(const nlohmann::json& doc);

// Files; the format (document or ndjson) follows the extension.
PoseFile load_poses(const std::filesystem::path& path);
void save_poses(const std::filesystem::path& path, const PoseFile& poses);
DetectionFile load_detections(const std::filesystem::path& path);
void save_detections(const std::filesystem::path& path, const DetectionFile& dets);
LabelFile load_labels(const std::filesystem::path& path);
void save_labels(const std::filesystem::path& path, const LabelFile& labels);

/// Validated LabeledFrames (explicit links honored, the rest associated by
/// containment).
std::vector<LabeledFrame> to_labeled_frames(const LabelFile& labels);

nlohmann::json report_to_json(const EvalReport& report);
EvalCounts counts_from_json(const nlohmann::json& j);
nlohmann::json curve_to_json(const std::vector<MissingRatePoint>& curve);

/// Reads a whole JSON document; throws IoError / SchemaError.
nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace skelanon
