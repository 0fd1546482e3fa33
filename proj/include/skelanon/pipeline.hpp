///////////////////////////////////////////////////////////////////////////////
// pipeline.hpp: config-driven staged runner
//
//   poses -> infer-heads -> (+faces) fuse -> track -> evaluate / anonymize
//
// Every stage writes its detections to the output directory and the next
// stage reads them back from disk, so a staged run exercises the same files a
// user would chain by hand.
///////////////////////////////////////////////////////////////////////////////

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "skelanon/anonymizer.hpp"
#include "skelanon/evaluator.hpp"
#include "skelanon/formats.hpp"
#include "skelanon/fusion.hpp"
#include "skelanon/head_infer.hpp"
#include "skelanon/tracker.hpp"

namespace skelanon
{

enum class Stage
{
  InferHeads,
  Fuse,
  Track,
  Evaluate,
  Anonymize,
};

std::string_view to_string(Stage s) noexcept;
std::optional<Stage> parse_stage(std::string_view s) noexcept;

struct PipelineInputs
{
  std::optional<std::filesystem::path> poses;
  std::optional<std::filesystem::path> faces;
  std::optional<std::filesystem::path> heads;
  std::optional<std::filesystem::path> detections;
  std::optional<std::filesystem::path> labels;
  std::optional<std::string> images;  // directory or printf-style frame pattern
};

struct PipelineConfig
{
  std::vector<Stage> stages;
  PipelineInputs inputs;
  std::filesystem::path output{"out"};
  HeadInferenceParams head;
  FusionConfig fusion;
  TrackerConfig tracker;
  EvalConfig evaluation;
  AnonymizeConfig anonymize;
  std::vector<double> missing_rate_thresholds;  // empty: no curve
  bool sweeps{false};                           // write alpha/beta sweep CSVs
  unsigned jobs{1};

  /// Checks stage order and that each stage has its inputs; throws ConfigError.
  void validate() const;
};

/// Parses a pipeline config; relative input paths resolve against `base_dir`.
PipelineConfig pipeline_from_json(const nlohmann::json& j,
                                  const std::filesystem::path& base_dir = {});
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

struct StageTiming
{
  Stage stage;
  std::size_t frames{0};
  double seconds{0.0};
  [[nodiscard]] double fps() const { return seconds > 0.0 ? frames / seconds : 0.0; }
};

struct PipelineResult
{
  DetectionFile detections;  // output of the last detection-producing stage
  std::optional<EvalReport> report;
  std::vector<MissingRatePoint> missing_rate;
  int anonymized_images{0};
  std::vector<StageTiming> timings;
};

PipelineResult run_pipeline(const PipelineConfig& cfg);

// Whole-sequence stage helpers shared by the runner and the CLI.
DetectionFile infer_heads_stage(const PoseFile& poses, const HeadInferenceParams& params,
                                unsigned jobs = 1);
/// Frames are the union of both inputs; a frame missing on one side has no
/// boxes there.
DetectionFile fuse_stage(const DetectionFile& heads, const DetectionFile& faces,
                         const FusionConfig& cfg, unsigned jobs = 1);
DetectionFile track_stage(const DetectionFile& dets, const TrackerConfig& cfg);

struct ImageFrame
{
  int frame{0};
  std::filesystem::path path;
};

/// Lists the frames of an image directory (PNG/JPEG, sorted by name; the
/// frame index is the last number in the file stem, else the position) or
/// expands a pattern such as "img_%06d.png" for the given frames.
std::vector<ImageFrame> list_image_frames(const std::string& source,
                                          const std::vector<int>& frames);

/// Anonymizes every listed image with the boxes of its frame and writes the
/// result under `out_dir` with the same file name. Returns the image count.
int anonymize_stage(const std::vector<ImageFrame>& images, const DetectionFile& dets,
                    const AnonymizeConfig& cfg, const std::filesystem::path& out_dir,
                    unsigned jobs = 1);

}  // namespace skelanon
