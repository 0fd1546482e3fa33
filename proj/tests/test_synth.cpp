#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "skelanon/head_infer.hpp"
#include "skelanon/synth.hpp"
#include "support.hpp"

using namespace skelanon;

namespace
{

std::string slurp(const std::filesystem::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Synth, StaticFrontFacingZeroNoise)
{
  ScenarioConfig cfg;
  cfg.frames = 3;
  cfg.actors = {Actor{.head_center = {200, 150}, .head_px_start = 60, .head_px_end = 60}};
  const SyntheticScene s = generate(cfg);
  ASSERT_EQ(s.labels.size(), 3u);
  for (std::size_t f = 0; f < 3; ++f) {
    ASSERT_EQ(s.faces[f].boxes.size(), 1u);
    ASSERT_EQ(s.labels[f].faces.size(), 1u);
    EXPECT_EQ(s.faces[f].boxes[0].box, s.labels[f].faces[0]);

    const Pose& p = s.poses[f].poses.at(0);
    double x = 0.0;
    double y = 0.0;
    for (std::size_t k = 0; k < kNumFacialKeypoints; ++k) {
      x += p.keypoints[k].x / kNumFacialKeypoints;
      y += p.keypoints[k].y / kNumFacialKeypoints;
    }
    EXPECT_NEAR(x, s.labels[f].faces[0].center().x, 1e-9);
    EXPECT_NEAR(y, s.labels[f].faces[0].center().y, 1e-9);

    // the pose reproduces the head label
    const auto head = infer_head(p, cfg.body);
    ASSERT_TRUE(head.has_value());
    EXPECT_NEAR(head->box.x_min, s.labels[f].heads[0].x_min, 1e-9);
    EXPECT_NEAR(head->box.y_max, s.labels[f].heads[0].y_max, 1e-9);
  }
}

TEST(Synth, FaceDetectionsFollowHeadSize)
{
  ScenarioConfig cfg;
  cfg.frames = 41;
  cfg.face.drop_below_px = 40;
  cfg.actors = {Actor{.head_center = {500, 300}, .head_px_start = 60, .head_px_end = 20}};
  const SyntheticScene s = generate(cfg);
  for (std::size_t f = 0; f < s.tally.size(); ++f) {
    const TallyEntry& e = s.tally[f].entries.at(0);
    EXPECT_EQ(s.faces[f].boxes.size() == 1, e.head.max_dim() >= 40.0) << f;
    EXPECT_EQ(e.face_detected, e.head.max_dim() >= 40.0);
  }
}

TEST(Synth, BackFacingDropsFacialKeypoints)
{
  ScenarioConfig cfg;
  cfg.frames = 2;
  cfg.actors = {Actor{.head_center = {500, 300}, .front_facing = false}};
  const SyntheticScene s = generate(cfg);
  EXPECT_TRUE(s.labels[0].faces.empty());
  EXPECT_EQ(s.labels[0].heads.size(), 1u);
  EXPECT_TRUE(s.faces[0].boxes.empty());
  EXPECT_EQ(s.poses[0].poses[0].keypoints[0].confidence, 0.0);
  // the shoulder fallback still recovers the head label
  const auto head = infer_head(s.poses[0].poses[0], cfg.body);
  ASSERT_TRUE(head.has_value());
  EXPECT_NEAR(head->box.y_min, s.labels[0].heads[0].y_min, 1e-9);
}

TEST(Synth, LabelMinimumSize)
{
  ScenarioConfig cfg;
  cfg.frames = 1;
  cfg.label_min_px = 30;
  cfg.actors = {Actor{.head_center = {100, 100}, .head_px_start = 20, .head_px_end = 20},
                Actor{.head_center = {300, 100}, .head_px_start = 40, .head_px_end = 40}};
  const SyntheticScene s = generate(cfg);
  EXPECT_EQ(s.labels[0].heads.size(), 1u);
  EXPECT_EQ(s.poses[0].poses.size(), 2u);
}

TEST(SynthProperty, FacesInsideHeadsAndLinksValid)
{
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    ScenarioConfig cfg;
    cfg.seed = seed;
    cfg.pedestrians = 15;
    cfg.frames = 30;
    cfg.bob_amplitude_px = 4;
    const SyntheticScene s = generate(cfg);
    for (const LabelRecord& r : s.labels) {
      ASSERT_TRUE(r.links.has_value());
      ASSERT_EQ(r.links->size(), r.faces.size());
      for (const auto& [f, h] : *r.links) {
        EXPECT_DOUBLE_EQ(containment_ratio(r.faces[f], r.heads[h]), 1.0);
      }
    }
  }
}

TEST(SynthProperty, DeterministicGivenSeed)
{
  ScenarioConfig cfg;
  cfg.seed = 1234;
  cfg.face.jitter_px = 2;
  cfg.pose.keypoint_noise_px = 1.5;
  cfg.pose.miss_probability = 0.1;
  fixtures::TempDir a("synth_a");
  fixtures::TempDir b("synth_b");
  write_scene(a.path(), generate(cfg));
  write_scene(b.path(), generate(cfg));
  for (const char* name : {"labels.json", "poses.json", "faces.json", "tally.json"}) {
    const std::string x = slurp(a / name);
    EXPECT_FALSE(x.empty());
    EXPECT_EQ(x, slurp(b / name)) << name;
  }
  cfg.seed = 1235;
  fixtures::TempDir c("synth_c");
  write_scene(c.path(), generate(cfg));
  EXPECT_NE(slurp(a / "poses.json"), slurp(c / "poses.json"));
}

TEST(Synth, ConfigValidation)
{
  ScenarioConfig cfg;
  cfg.pedestrians = -1;
  EXPECT_THROW(generate(cfg), ConfigError);
  cfg = {};
  cfg.front_facing_fraction = 1.5;
  EXPECT_THROW(generate(cfg), ConfigError);
  EXPECT_THROW(scenario_from_json({{"pedestrian", 3}}), ConfigError);
}
