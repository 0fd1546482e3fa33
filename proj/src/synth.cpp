#include "skelanon/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "skelanon/config.hpp"

namespace skelanon
{

using nlohmann::json;

void ScenarioConfig::validate() const
{
  if (pedestrians < 0 || frames < 0) {
    throw ConfigError("scenario: pedestrians and frames must be >= 0");
  }
  if (image_width <= 0 || image_height <= 0) {
    throw ConfigError("scenario: image size must be positive");
  }
  if (!(head_px_min > 0.0) || head_px_max < head_px_min) {
    throw ConfigError("scenario: need 0 < head_px_min <= head_px_max");
  }
  if (face.jitter_px < 0.0 || pose.keypoint_noise_px < 0.0) {
    throw ConfigError("scenario: noise levels must be >= 0");
  }
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(front_facing_fraction) || !prob(pose.back_facial_dropout) ||
      !prob(pose.miss_probability)) {
    throw ConfigError("scenario: probabilities must be in [0,1]");
  }
  if (!(face.confidence_min <= face.confidence_max) || !prob(face.confidence_min) ||
      !prob(face.confidence_max) || !(pose.confidence_min <= pose.confidence_max) ||
      !prob(pose.confidence_min) || !prob(pose.confidence_max) || !(pose.confidence_min > 0.0)) {
    throw ConfigError("scenario: confidence ranges must satisfy 0 <= min <= max <= 1 (pose min > 0)");
  }
  for (const Actor& a : actors) {
    if (!(a.head_px_start > 0.0) || !(a.head_px_end > 0.0)) {
      throw ConfigError("scenario: actor head sizes must be > 0");
    }
  }
  body.validate();
}

namespace
{

class Sampler
{
public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi)
  {
    if (lo == hi) {
      return lo;
    }
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  double normal(double sigma)
  {
    if (sigma == 0.0) {
      return 0.0;
    }
    return std::normal_distribution<double>(0.0, sigma)(rng_);
  }
  bool bernoulli(double p)
  {
    if (p <= 0.0) {
      return false;
    }
    if (p >= 1.0) {
      return true;
    }
    return std::bernoulli_distribution(p)(rng_);
  }

private:
  std::mt19937_64 rng_;
};

std::vector<Actor> random_actors(const ScenarioConfig& cfg, Sampler& rng)
{
  std::vector<Actor> actors;
  const double lane = static_cast<double>(cfg.image_height) / std::max(1, cfg.pedestrians);
  for (int k = 0; k < cfg.pedestrians; ++k) {
    Actor a;
    a.head_center = {rng.uniform(0.1 * cfg.image_width, 0.9 * cfg.image_width),
                     (k + 0.5) * lane};
    const double speed = cfg.walk_speed_px * rng.uniform(0.5, 1.5);
    a.vx = rng.bernoulli(0.5) ? speed : -speed;
    a.head_px_start = rng.uniform(cfg.head_px_min, cfg.head_px_max);
    a.head_px_end = rng.uniform(cfg.head_px_min, cfg.head_px_max);
    a.front_facing = rng.bernoulli(cfg.front_facing_fraction);
    a.bob_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    actors.push_back(a);
  }
  return actors;
}

// Reflects a coordinate into [lo, hi] (pedestrians turn at the image edge).
double bounce(double v, double lo, double hi)
{
  if (hi <= lo) {
    return lo;
  }
  const double span = hi - lo;
  double t = std::fmod(v - lo, 2.0 * span);
  if (t < 0.0) {
    t += 2.0 * span;
  }
  return lo + (t <= span ? t : 2.0 * span - t);
}

// Keypoints of a pedestrian whose head box (w x h) is centered on c. The
// facial keypoints average to c, the torso length reproduces h through the
// height ratio, and the shoulders sit one neck length below the head box.
Pose skeleton(Point c, double w, double h, const HeadInferenceParams& body)
{
  const double torso = h / body.height_ratio;
  const double shoulder_y = c.y + 0.5 * h + body.neck_ratio * h;
  const double hip_y = shoulder_y + torso;
  Pose p;
  auto set = [&](CocoKeypoint k, double x, double y) {
    p[k] = {x, y, 1.0};
  };
  set(CocoKeypoint::Nose, c.x, c.y + 0.1 * h);
  set(CocoKeypoint::LeftEye, c.x + 0.15 * w, c.y - 0.05 * h);
  set(CocoKeypoint::RightEye, c.x - 0.15 * w, c.y - 0.05 * h);
  set(CocoKeypoint::LeftEar, c.x + 0.45 * w, c.y);
  set(CocoKeypoint::RightEar, c.x - 0.45 * w, c.y);
  set(CocoKeypoint::LeftShoulder, c.x + 0.8 * w, shoulder_y);
  set(CocoKeypoint::RightShoulder, c.x - 0.8 * w, shoulder_y);
  set(CocoKeypoint::LeftElbow, c.x + 0.9 * w, shoulder_y + 0.5 * torso);
  set(CocoKeypoint::RightElbow, c.x - 0.9 * w, shoulder_y + 0.5 * torso);
  set(CocoKeypoint::LeftWrist, c.x + 0.95 * w, shoulder_y + torso);
  set(CocoKeypoint::RightWrist, c.x - 0.95 * w, shoulder_y + torso);
  set(CocoKeypoint::LeftHip, c.x + 0.5 * w, hip_y);
  set(CocoKeypoint::RightHip, c.x - 0.5 * w, hip_y);
  set(CocoKeypoint::LeftKnee, c.x + 0.5 * w, hip_y + 0.55 * torso);
  set(CocoKeypoint::RightKnee, c.x - 0.5 * w, hip_y + 0.55 * torso);
  set(CocoKeypoint::LeftAnkle, c.x + 0.5 * w, hip_y + 1.1 * torso);
  set(CocoKeypoint::RightAnkle, c.x - 0.5 * w, hip_y + 1.1 * torso);
  return p;
}

BBox jittered(const BBox& b, double sigma, Sampler& rng)
{
  BBox j{b.x_min + rng.normal(sigma), b.y_min + rng.normal(sigma), b.x_max + rng.normal(sigma),
         b.y_max + rng.normal(sigma)};
  if (j.x_min > j.x_max) {
    std::swap(j.x_min, j.x_max);
  }
  if (j.y_min > j.y_max) {
    std::swap(j.y_min, j.y_max);
  }
  return j;
}

}  // namespace

SyntheticScene generate(const ScenarioConfig& cfg)
{
  cfg.validate();
  Sampler rng(cfg.seed);
  const std::vector<Actor> actors = cfg.actors.empty() ? random_actors(cfg, rng) : cfg.actors;
  const HeadInferenceParams& body = cfg.body;

  SyntheticScene scene;
  for (int f = 0; f < cfg.frames; ++f) {
    LabelRecord labels;
    labels.frame = f;
    labels.links.emplace();
    PoseFrame poses{f, {}};
    DetectionFrame faces{f, {}};
    TallyFrame tally{f, {}};

    const double progress = cfg.frames > 1 ? static_cast<double>(f) / (cfg.frames - 1) : 0.0;
    for (std::size_t k = 0; k < actors.size(); ++k) {
      const Actor& a = actors[k];
      const double h = a.head_px_start + (a.head_px_end - a.head_px_start) * progress;
      const double w = h * body.width_ratio / body.height_ratio;
      const double bob = cfg.bob_amplitude_px *
                         std::sin(2.0 * std::numbers::pi * cfg.bob_frequency * f + a.bob_phase);
      const Point c{bounce(a.head_center.x + a.vx * f, 0.5 * w, cfg.image_width - 0.5 * w),
                    a.head_center.y + a.vy * f + bob};

      TallyEntry e;
      e.pedestrian = static_cast<int>(k);
      e.head = BBox::from_center(c, w, h);
      e.front_facing = a.front_facing;
      e.labeled = e.head.max_dim() >= cfg.label_min_px;
      if (a.front_facing) {
        e.face = BBox::from_center(c, 0.6 * w, 0.7 * h);
      }

      if (e.labeled) {
        if (e.face) {
          labels.links->emplace_back(labels.faces.size(), labels.heads.size());
          labels.faces.push_back(*e.face);
        }
        labels.heads.push_back(e.head);
      }

      if (!rng.bernoulli(cfg.pose.miss_probability)) {
        Pose pose = skeleton(c, w, h, body);
        const bool drop_facial = !a.front_facing && rng.bernoulli(cfg.pose.back_facial_dropout);
        for (std::size_t i = 0; i < kNumKeypoints; ++i) {
          Keypoint& kp = pose.keypoints[i];
          if (drop_facial && i < kNumFacialKeypoints) {
            kp = {0.0, 0.0, 0.0};
            continue;
          }
          kp.x += rng.normal(cfg.pose.keypoint_noise_px);
          kp.y += rng.normal(cfg.pose.keypoint_noise_px);
          kp.confidence = rng.uniform(cfg.pose.confidence_min, cfg.pose.confidence_max);
        }
        poses.poses.push_back(pose);
        e.pose_emitted = true;
        e.facial_keypoints = !drop_facial;
      }

      if (e.face && e.head.max_dim() >= cfg.face.drop_below_px) {
        Detection d;
        d.box = jittered(*e.face, cfg.face.jitter_px, rng);
        d.confidence = rng.uniform(cfg.face.confidence_min, cfg.face.confidence_max);
        d.source = Source::Face;
        d.frame = f;
        faces.boxes.push_back(d);
        e.face_detected = true;
      }
      tally.entries.push_back(e);
    }
    scene.labels.push_back(std::move(labels));
    scene.poses.push_back(std::move(poses));
    scene.faces.push_back(std::move(faces));
    scene.tally.push_back(std::move(tally));
  }
  return scene;
}

json tally_to_json(const std::vector<TallyFrame>& tally)
{
  auto box = [](const BBox& b) { return json::array({b.x_min, b.y_min, b.x_max, b.y_max}); };
  json frames = json::array();
  for (const TallyFrame& tf : tally) {
    json peds = json::array();
    for (const TallyEntry& e : tf.entries) {
      peds.push_back(json{{"pedestrian", e.pedestrian},
                          {"head", box(e.head)},
                          {"face", e.face ? box(*e.face) : json(nullptr)},
                          {"labeled", e.labeled},
                          {"front_facing", e.front_facing},
                          {"face_detected", e.face_detected},
                          {"pose_emitted", e.pose_emitted},
                          {"facial_keypoints", e.facial_keypoints}});
    }
    frames.push_back(json{{"frame", tf.frame}, {"pedestrians", std::move(peds)}});
  }
  return json{{"schema", kSchemaVersion}, {"frames", std::move(frames)}};
}

void write_scene(const std::filesystem::path& dir, const SyntheticScene& scene)
{
  std::filesystem::create_directories(dir);
  save_labels(dir / "labels.json", scene.labels);
  save_poses(dir / "poses.json", scene.poses);
  save_detections(dir / "faces.json", scene.faces);
  write_json(dir / "tally.json", tally_to_json(scene.tally));
}

ScenarioConfig scenario_from_json(const json& j)
{
  constexpr std::string_view s = "scenario";
  check_keys(j, s,
             {"pedestrians", "frames", "seed", "image_width", "image_height", "head_px_min",
              "head_px_max", "walk_speed_px", "bob_amplitude_px", "bob_frequency",
              "front_facing_fraction", "label_min_px", "face_detector", "pose_model", "body",
              "actors"});
  ScenarioConfig c;
  read_field(j, "pedestrians", c.pedestrians, s);
  read_field(j, "frames", c.frames, s);
  read_field(j, "seed", c.seed, s);
  read_field(j, "image_width", c.image_width, s);
  read_field(j, "image_height", c.image_height, s);
  read_field(j, "head_px_min", c.head_px_min, s);
  read_field(j, "head_px_max", c.head_px_max, s);
  read_field(j, "walk_speed_px", c.walk_speed_px, s);
  read_field(j, "bob_amplitude_px", c.bob_amplitude_px, s);
  read_field(j, "bob_frequency", c.bob_frequency, s);
  read_field(j, "front_facing_fraction", c.front_facing_fraction, s);
  read_field(j, "label_min_px", c.label_min_px, s);
  if (auto it = j.find("face_detector"); it != j.end()) {
    constexpr std::string_view fs = "scenario.face_detector";
    check_keys(*it, fs, {"drop_below_px", "jitter_px", "confidence_min", "confidence_max"});
    read_field(*it, "drop_below_px", c.face.drop_below_px, fs);
    read_field(*it, "jitter_px", c.face.jitter_px, fs);
    read_field(*it, "confidence_min", c.face.confidence_min, fs);
    read_field(*it, "confidence_max", c.face.confidence_max, fs);
  }
  if (auto it = j.find("pose_model"); it != j.end()) {
    constexpr std::string_view ps = "scenario.pose_model";
    check_keys(*it, ps,
               {"keypoint_noise_px", "back_facial_dropout", "confidence_min", "confidence_max",
                "miss_probability"});
    read_field(*it, "keypoint_noise_px", c.pose.keypoint_noise_px, ps);
    read_field(*it, "back_facial_dropout", c.pose.back_facial_dropout, ps);
    read_field(*it, "confidence_min", c.pose.confidence_min, ps);
    read_field(*it, "confidence_max", c.pose.confidence_max, ps);
    read_field(*it, "miss_probability", c.pose.miss_probability, ps);
  }
  if (auto it = j.find("body"); it != j.end()) {
    c.body = head_params_from_json(*it);
  }
  if (auto it = j.find("actors"); it != j.end()) {
    if (!it->is_array()) {
      throw ConfigError("scenario.actors: expected an array");
    }
    for (const json& aj : *it) {
      constexpr std::string_view as = "scenario.actors[]";
      check_keys(aj, as,
                 {"x", "y", "vx", "vy", "head_px_start", "head_px_end", "front_facing",
                  "bob_phase"});
      Actor a;
      read_field(aj, "x", a.head_center.x, as);
      read_field(aj, "y", a.head_center.y, as);
      read_field(aj, "vx", a.vx, as);
      read_field(aj, "vy", a.vy, as);
      read_field(aj, "head_px_start", a.head_px_start, as);
      read_field(aj, "head_px_end", a.head_px_end, as);
      read_field(aj, "front_facing", a.front_facing, as);
      read_field(aj, "bob_phase", a.bob_phase, as);
      c.actors.push_back(a);
    }
  }
  c.validate();
  return c;
}

json scenario_to_json(const ScenarioConfig& c)
{
  json actors = json::array();
  for (const Actor& a : c.actors) {
    actors.push_back(json{{"x", a.head_center.x},
                          {"y", a.head_center.y},
                          {"vx", a.vx},
                          {"vy", a.vy},
                          {"head_px_start", a.head_px_start},
                          {"head_px_end", a.head_px_end},
                          {"front_facing", a.front_facing},
                          {"bob_phase", a.bob_phase}});
  }
  return json{{"pedestrians", c.pedestrians},
              {"frames", c.frames},
              {"seed", c.seed},
              {"image_width", c.image_width},
              {"image_height", c.image_height},
              {"head_px_min", c.head_px_min},
              {"head_px_max", c.head_px_max},
              {"walk_speed_px", c.walk_speed_px},
              {"bob_amplitude_px", c.bob_amplitude_px},
              {"bob_frequency", c.bob_frequency},
              {"front_facing_fraction", c.front_facing_fraction},
              {"label_min_px", c.label_min_px},
              {"face_detector",
               {{"drop_below_px", c.face.drop_below_px},
                {"jitter_px", c.face.jitter_px},
                {"confidence_min", c.face.confidence_min},
                {"confidence_max", c.face.confidence_max}}},
              {"pose_model",
               {{"keypoint_noise_px", c.pose.keypoint_noise_px},
                {"back_facial_dropout", c.pose.back_facial_dropout},
                {"confidence_min", c.pose.confidence_min},
                {"confidence_max", c.pose.confidence_max},
                {"miss_probability", c.pose.miss_probability}}},
              {"body", to_json(c.body)},
              {"actors", std::move(actors)}};
}

}  // namespace skelanon
