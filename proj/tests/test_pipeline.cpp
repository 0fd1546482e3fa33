#include <gtest/gtest.h>

#include <opencv2/core.hpp>

#include "pipeline_oracle.hpp"
#include "skelanon/anonymizer.hpp"
#include "skelanon/config.hpp"
#include "skelanon/pipeline.hpp"
#include "support.hpp"

using namespace skelanon;
using nlohmann::json;

namespace
{

ScenarioConfig noisy_scenario(std::uint64_t seed)
{
  ScenarioConfig cfg;
  cfg.seed = seed;
  cfg.pedestrians = 8;
  cfg.frames = 30;
  cfg.face.jitter_px = 2.0;
  cfg.pose.keypoint_noise_px = 1.5;
  cfg.pose.back_facial_dropout = 0.7;
  cfg.pose.miss_probability = 0.05;
  cfg.bob_amplitude_px = 3.0;
  return cfg;
}

}  // namespace

TEST(Pipeline, InferHeadsOnly)
{
  fixtures::TempDir dir("pipe1");
  PoseFile poses(2);
  poses[1].frame = 1;
  Pose p;
  p[CocoKeypoint::LeftShoulder] = {12, 20, 0.8};
  p[CocoKeypoint::RightShoulder] = {18, 20, 0.8};
  p[CocoKeypoint::LeftHip] = {12, 50, 0.8};
  p[CocoKeypoint::RightHip] = {18, 50, 0.8};
  poses[0].poses = {p};
  poses[1].poses = {p, p};
  save_poses(dir / "poses.json", poses);

  const PipelineConfig cfg = pipeline_from_json(
      {{"stages", {"infer-heads"}}, {"inputs", {{"poses", "poses.json"}}}, {"output", "out"}},
      dir.path());
  const PipelineResult r = run_pipeline(cfg);
  const DetectionFile written = load_detections(dir / "out/heads.json");
  EXPECT_EQ(written, r.detections);
  ASSERT_EQ(written.size(), 2u);
  EXPECT_EQ(written[1].boxes.size(), 2u);
  for (const auto& df : written) {
    for (const auto& d : df.boxes) {
      EXPECT_EQ(d.source, Source::Head);
    }
  }
  EXPECT_TRUE(std::filesystem::exists(dir / "out/timings.json"));
  EXPECT_FALSE(r.report.has_value());
}

TEST(Pipeline, EvaluateWithoutLabelsIsConfigError)
{
  fixtures::TempDir dir("pipe2");
  const PipelineConfig cfg = pipeline_from_json(
      {{"stages", {"evaluate"}}, {"inputs", {{"detections", "d.json"}}}}, dir.path());
  EXPECT_THROW(run_pipeline(cfg), ConfigError);
}

TEST(Pipeline, MissingInputFileIsIoError)
{
  fixtures::TempDir dir("pipe3");
  const PipelineConfig cfg = pipeline_from_json(
      {{"stages", {"infer-heads"}}, {"inputs", {{"poses", "nope.json"}}}, {"output", "o"}},
      dir.path());
  EXPECT_THROW(run_pipeline(cfg), IoError);
}

TEST(Pipeline, StagedRunEqualsInMemoryComposition)
{
  for (std::uint64_t seed : {3u, 4u}) {
    fixtures::TempDir dir("pipe4");
    const SyntheticScene scene = generate(noisy_scenario(seed));
    write_scene(dir.path(), scene);
    const json cfg_json = {{"stages", {"infer-heads", "fuse", "track", "evaluate"}},
                           {"inputs",
                            {{"poses", "poses.json"}, {"faces", "faces.json"},
                             {"labels", "labels.json"}}},
                           {"output", "out"},
                           {"tracker", {{"min_hits", 1}}},
                           {"missing_rate_thresholds", {20, 40, 60}},
                           {"sweeps", true},
                           {"jobs", 3}};
    const PipelineConfig cfg = pipeline_from_json(cfg_json, dir.path());
    const PipelineResult r = run_pipeline(cfg);

    fixtures::Composition c;
    c.tracker = cfg.tracker;
    const DetectionFile expected = fixtures::compose_detections(scene, c);
    EXPECT_EQ(r.detections, expected);
    ASSERT_TRUE(r.report.has_value());
    EXPECT_EQ(r.report->counts, fixtures::compose_report(scene, c).counts);
    EXPECT_EQ(counts_from_json(read_json(dir / "out/report.json")), r.report->counts);
    for (const char* f : {"heads.json", "fused.json", "tracked.json", "report.txt",
                          "missing_rate.json", "sweep_alpha.csv", "sweep_beta.csv"}) {
      EXPECT_TRUE(std::filesystem::exists(dir / "out" / f)) << f;
    }
    EXPECT_EQ(r.timings.size(), 4u);
  }
}

TEST(Pipeline, AnonymizeStageWritesImages)
{
  fixtures::TempDir dir("pipe5");
  std::filesystem::create_directories(dir / "frames");
  cv::Mat img(40, 60, CV_8UC3);
  cv::randu(img, 0, 255);
  for (int f = 0; f < 3; ++f) {
    write_image(dir / ("frames/img_" + std::to_string(f) + ".png"), img);
  }
  const DetectionFile dets{{0, {fixtures::det({10, 10, 20, 20}, Source::Face, 0.9, 0)}},
                           {2, {fixtures::det({30, 5, 50, 30}, Source::Head, 0.9, 2)}}};
  save_detections(dir / "d.json", dets);
  const PipelineConfig cfg = pipeline_from_json(
      {{"stages", {"anonymize"}},
       {"inputs", {{"detections", "d.json"}, {"images", "frames"}}},
       {"output", "out"},
       {"anonymize", {{"method", "pixelate"}}}},
      dir.path());
  const PipelineResult r = run_pipeline(cfg);
  EXPECT_EQ(r.anonymized_images, 3);
  const cv::Mat out0 = read_image(dir / "out/anonymized/img_0.png");
  const cv::Mat out1 = read_image(dir / "out/anonymized/img_1.png");
  EXPECT_GT(cv::norm(out0, img, cv::NORM_INF), 0.0);
  EXPECT_EQ(cv::norm(out1, img, cv::NORM_INF), 0.0);
}

TEST(Pipeline, ImagePatternListing)
{
  const auto frames = list_image_frames("dir/img_%06d.png", {0, 12});
  ASSERT_EQ(frames.size(), 2u);
  EXPECT_EQ(frames[1].frame, 12);
  EXPECT_EQ(frames[1].path, std::filesystem::path("dir/img_000012.png"));
}
