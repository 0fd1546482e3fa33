#include "skelanon/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <regex>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "skelanon/config.hpp"
#include "skelanon/parallel.hpp"

namespace skelanon
{

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(Stage s) noexcept
{
  switch (s) {
    case Stage::InferHeads:
      return "infer-heads";
    case Stage::Fuse:
      return "fuse";
    case Stage::Track:
      return "track";
    case Stage::Evaluate:
      return "evaluate";
    case Stage::Anonymize:
      return "anonymize";
  }
  return "unknown";
}

std::optional<Stage> parse_stage(std::string_view s) noexcept
{
  for (auto st : {Stage::InferHeads, Stage::Fuse, Stage::Track, Stage::Evaluate, Stage::Anonymize}) {
    if (s == to_string(st)) {
      return st;
    }
  }
  return std::nullopt;
}

namespace
{

bool has_stage(const std::vector<Stage>& stages, Stage s)
{
  return std::find(stages.begin(), stages.end(), s) != stages.end();
}

}  // namespace

void PipelineConfig::validate() const
{
  if (stages.empty()) {
    throw ConfigError("pipeline: no stages selected");
  }
  for (std::size_t i = 1; i < stages.size(); ++i) {
    if (stages[i] <= stages[i - 1]) {
      throw ConfigError(fmt::format("pipeline: stage-order violation: \"{}\" after \"{}\"",
                                    to_string(stages[i]), to_string(stages[i - 1])));
    }
  }
  const bool infer = has_stage(stages, Stage::InferHeads);
  if (infer && !inputs.poses) {
    throw ConfigError("pipeline: infer-heads stage requires inputs.poses");
  }
  if (has_stage(stages, Stage::Fuse)) {
    if (!infer && !inputs.heads) {
      throw ConfigError("pipeline: fuse stage requires infer-heads or inputs.heads");
    }
    if (!inputs.faces) {
      throw ConfigError("pipeline: fuse stage requires inputs.faces");
    }
  }
  const bool produces = infer || has_stage(stages, Stage::Fuse);
  if (!produces && !inputs.detections && !inputs.heads && !inputs.faces) {
    throw ConfigError(fmt::format("pipeline: stage \"{}\" has no detections to consume",
                                  to_string(stages.front())));
  }
  if (has_stage(stages, Stage::Evaluate) && !inputs.labels) {
    throw ConfigError("pipeline: evaluate stage requires inputs.labels");
  }
  if (has_stage(stages, Stage::Anonymize) && !inputs.images) {
    throw ConfigError("pipeline: anonymize stage requires inputs.images");
  }
  head.validate();
  fusion.validate();
  tracker.validate();
  evaluation.validate();
  anonymize.validate();
}

PipelineConfig pipeline_from_json(const json& j, const fs::path& base_dir)
{
  check_keys(j, "pipeline",
             {"stages", "inputs", "output", "head_inference", "fusion", "tracker", "evaluation",
              "anonymize", "missing_rate_thresholds", "sweeps", "jobs"});
  PipelineConfig c;
  auto resolve = [&](const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };

  if (auto it = j.find("stages"); it != j.end()) {
    if (!it->is_array()) {
      throw ConfigError("pipeline.stages: expected an array of stage names");
    }
    for (const json& s : *it) {
      const auto st = s.is_string() ? parse_stage(s.get<std::string>()) : std::nullopt;
      if (!st) {
        throw ConfigError(fmt::format("pipeline.stages: unknown stage {}", s.dump()));
      }
      c.stages.push_back(*st);
    }
  }
  if (auto it = j.find("inputs"); it != j.end()) {
    check_keys(*it, "pipeline.inputs",
               {"poses", "faces", "heads", "detections", "labels", "images"});
    auto path_field = [&](const char* key, std::optional<fs::path>& out) {
      std::string v;
      if (it->contains(key)) {
        read_field(*it, key, v, "pipeline.inputs");
        out = resolve(v);
      }
    };
    path_field("poses", c.inputs.poses);
    path_field("faces", c.inputs.faces);
    path_field("heads", c.inputs.heads);
    path_field("detections", c.inputs.detections);
    path_field("labels", c.inputs.labels);
    if (it->contains("images")) {
      std::string v;
      read_field(*it, "images", v, "pipeline.inputs");
      c.inputs.images = resolve(v).string();
    }
  }
  if (j.contains("output")) {
    std::string v;
    read_field(j, "output", v, "pipeline");
    c.output = resolve(v);
  }
  if (auto it = j.find("head_inference"); it != j.end()) {
    c.head = head_params_from_json(*it);
  }
  if (auto it = j.find("fusion"); it != j.end()) {
    c.fusion = fusion_from_json(*it);
  }
  if (auto it = j.find("tracker"); it != j.end()) {
    c.tracker = tracker_from_json(*it);
  }
  if (auto it = j.find("evaluation"); it != j.end()) {
    c.evaluation = eval_from_json(*it);
  }
  if (auto it = j.find("anonymize"); it != j.end()) {
    c.anonymize = anonymize_from_json(*it);
  }
  read_field(j, "missing_rate_thresholds", c.missing_rate_thresholds, "pipeline");
  read_field(j, "sweeps", c.sweeps, "pipeline");
  read_field(j, "jobs", c.jobs, "pipeline");
  return c;
}

PipelineConfig load_pipeline_config(const fs::path& path)
{
  return pipeline_from_json(read_json(path), path.parent_path());
}

DetectionFile infer_heads_stage(const PoseFile& poses, const HeadInferenceParams& params,
                                unsigned jobs)
{
  params.validate();
  DetectionFile out(poses.size());
  parallel_for(poses.size(), jobs, [&](std::size_t i) {
    out[i].frame = poses[i].frame;
    out[i].boxes = infer_heads(poses[i].poses, params, poses[i].frame);
  });
  return out;
}

DetectionFile fuse_stage(const DetectionFile& heads, const DetectionFile& faces,
                         const FusionConfig& cfg, unsigned jobs)
{
  cfg.validate();
  std::map<int, std::pair<const DetectionFrame*, const DetectionFrame*>> frames;
  for (const DetectionFrame& df : heads) {
    frames[df.frame].first = &df;
  }
  for (const DetectionFrame& df : faces) {
    frames[df.frame].second = &df;
  }
  std::vector<std::pair<int, std::pair<const DetectionFrame*, const DetectionFrame*>>> ordered(
      frames.begin(), frames.end());

  static const std::vector<Detection> kEmpty;
  DetectionFile out(ordered.size());
  parallel_for(ordered.size(), jobs, [&](std::size_t i) {
    const auto& [frame, pair] = ordered[i];
    const auto& h = pair.first ? pair.first->boxes : kEmpty;
    const auto& f = pair.second ? pair.second->boxes : kEmpty;
    for (const Detection& d : h) {
      if (d.source != Source::Head) {
        throw ConfigError(fmt::format("fuse: frame {} has a face box among the heads", frame));
      }
    }
    for (const Detection& d : f) {
      if (d.source != Source::Face) {
        throw ConfigError(fmt::format("fuse: frame {} has a head box among the faces", frame));
      }
    }
    out[i].frame = frame;
    out[i].boxes = fuse(h, f, cfg);
  });
  return out;
}

DetectionFile track_stage(const DetectionFile& dets, const TrackerConfig& cfg)
{
  Tracker tracker(cfg);
  DetectionFile out;
  out.reserve(dets.size());
  for (const DetectionFrame& df : dets) {
    out.push_back({df.frame, tracker.step(df.frame, df.boxes)});
  }
  return out;
}

std::vector<ImageFrame> list_image_frames(const std::string& source,
                                          const std::vector<int>& frames)
{
  std::vector<ImageFrame> out;
  static const std::regex spec(R"(%(0?)(\d*)d)");
  std::smatch m;
  if (source.find('%') != std::string::npos) {
    if (!std::regex_search(source, m, spec)) {
      throw ConfigError(fmt::format("image pattern \"{}\" needs one %d-style field", source));
    }
    const bool zero_pad = !m[1].str().empty();
    const int width = m[2].str().empty() ? 0 : std::stoi(m[2].str());
    for (int f : frames) {
      const std::string num = zero_pad ? fmt::format("{:0{}}", f, width) : fmt::format("{:{}}", f, width);
      out.push_back({f, fs::path(m.prefix().str() + num + m.suffix().str())});
    }
    return out;
  }

  const fs::path dir(source);
  if (!fs::is_directory(dir)) {
    throw IoError(fmt::format("image directory {} does not exist", source));
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) {
      continue;
    }
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());

  static const std::regex last_number(R"((\d+)\D*$)");
  std::vector<int> numbers;
  std::set<int> unique;
  for (const fs::path& p : files) {
    const std::string stem = p.stem().string();
    if (!std::regex_search(stem, m, last_number)) {
      break;
    }
    numbers.push_back(std::stoi(m[1].str()));
    unique.insert(numbers.back());
  }
  const bool numbered = numbers.size() == files.size() && unique.size() == files.size();
  for (std::size_t i = 0; i < files.size(); ++i) {
    out.push_back({numbered ? numbers[i] : static_cast<int>(i), files[i]});
  }
  return out;
}

int anonymize_stage(const std::vector<ImageFrame>& images, const DetectionFile& dets,
                    const AnonymizeConfig& cfg, const fs::path& out_dir, unsigned jobs)
{
  cfg.validate();
  fs::create_directories(out_dir);
  std::map<int, const std::vector<Detection>*> by_frame;
  for (const DetectionFrame& df : dets) {
    by_frame[df.frame] = &df.boxes;
  }
  static const std::vector<Detection> kEmpty;
  parallel_for(images.size(), jobs, [&](std::size_t i) {
    const ImageFrame& img = images[i];
    auto it = by_frame.find(img.frame);
    const cv::Mat in = read_image(img.path);
    const cv::Mat out = anonymize_frame(in, it == by_frame.end() ? kEmpty : *it->second, cfg);
    write_image(out_dir / img.path.filename(), out);
  });
  return static_cast<int>(images.size());
}

namespace
{

class StageClock
{
public:
  explicit StageClock(Stage s) : stage_(s), start_(std::chrono::steady_clock::now()) {}

  StageTiming finish(std::size_t frames) const
  {
    StageTiming t{stage_, frames,
                  std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count()};
    spdlog::info("{}: {} frames in {:.3f} s ({:.1f} FPS)", to_string(stage_), t.frames,
                 t.seconds, t.fps());
    return t;
  }

private:
  Stage stage_;
  std::chrono::steady_clock::time_point start_;
};

// Writes a stage's detections and reads them back for the next stage.
DetectionFile checkpoint(const fs::path& path, const DetectionFile& dets)
{
  save_detections(path, dets);
  return load_detections(path);
}

std::vector<int> frame_indices(const DetectionFile& dets)
{
  std::vector<int> out;
  for (const DetectionFrame& df : dets) {
    out.push_back(df.frame);
  }
  return out;
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg)
{
  cfg.validate();
  fs::create_directories(cfg.output);
  PipelineResult result;
  std::optional<DetectionFile> current;

  if (has_stage(cfg.stages, Stage::InferHeads)) {
    const PoseFile poses = load_poses(*cfg.inputs.poses);
    StageClock clock(Stage::InferHeads);
    const DetectionFile heads = infer_heads_stage(poses, cfg.head, cfg.jobs);
    result.timings.push_back(clock.finish(poses.size()));
    current = checkpoint(cfg.output / "heads.json", heads);
  }

  if (has_stage(cfg.stages, Stage::Fuse)) {
    const DetectionFile heads = current ? *current : load_detections(*cfg.inputs.heads);
    const DetectionFile faces = load_detections(*cfg.inputs.faces);
    StageClock clock(Stage::Fuse);
    const DetectionFile fused = fuse_stage(heads, faces, cfg.fusion, cfg.jobs);
    result.timings.push_back(clock.finish(fused.size()));
    current = checkpoint(cfg.output / "fused.json", fused);
  }

  if (!current) {
    const auto& in = cfg.inputs;
    current = load_detections(in.detections ? *in.detections : in.heads ? *in.heads : *in.faces);
  }

  if (has_stage(cfg.stages, Stage::Track)) {
    StageClock clock(Stage::Track);
    const DetectionFile tracked = track_stage(*current, cfg.tracker);
    result.timings.push_back(clock.finish(tracked.size()));
    current = checkpoint(cfg.output / "tracked.json", tracked);
  }

  if (has_stage(cfg.stages, Stage::Evaluate)) {
    const auto labels = to_labeled_frames(load_labels(*cfg.inputs.labels));
    StageClock clock(Stage::Evaluate);
    EvalReport report = evaluate_sequence(*current, labels, cfg.evaluation, cfg.jobs);
    result.timings.push_back(clock.finish(labels.size()));

    json doc = report_to_json(report);
    doc["evaluation"] = to_json(cfg.evaluation);
    write_json(cfg.output / "report.json", doc);
    write_text(cfg.output / "report.txt", format_report_table({{"pipeline", report}}));
    if (!cfg.missing_rate_thresholds.empty()) {
      result.missing_rate =
          missing_rate_curve(*current, labels, cfg.evaluation, cfg.missing_rate_thresholds);
      write_json(cfg.output / "missing_rate.json", curve_to_json(result.missing_rate));
    }
    if (cfg.sweeps) {
      write_text(cfg.output / "sweep_alpha.csv",
                 format_sweep_csv(threshold_sweep(*current, labels, SweepParameter::Alpha,
                                                  default_sweep_values(), cfg.evaluation)));
      write_text(cfg.output / "sweep_beta.csv",
                 format_sweep_csv(threshold_sweep(*current, labels, SweepParameter::Beta,
                                                  default_sweep_values(), cfg.evaluation)));
    }
    result.report = report;
  }

  if (has_stage(cfg.stages, Stage::Anonymize)) {
    const auto images = list_image_frames(*cfg.inputs.images, frame_indices(*current));
    StageClock clock(Stage::Anonymize);
    result.anonymized_images =
        anonymize_stage(images, *current, cfg.anonymize, cfg.output / "anonymized", cfg.jobs);
    result.timings.push_back(clock.finish(images.size()));
  }

  json timings = json::array();
  for (const StageTiming& t : result.timings) {
    timings.push_back(json{{"stage", std::string(to_string(t.stage))},
                           {"frames", t.frames},
                           {"seconds", t.seconds},
                           {"fps", t.fps()}});
  }
  write_json(cfg.output / "timings.json", timings);
  result.detections = std::move(*current);
  return result;
}

}  // namespace skelanon
