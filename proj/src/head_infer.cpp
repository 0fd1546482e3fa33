#include "skelanon/head_infer.hpp"

#include <cmath>

#include <fmt/format.h>

namespace skelanon
{

namespace
{

bool present(const Keypoint& kp, double min_conf)
{
  return kp.confidence > 0.0 && kp.confidence >= min_conf;
}

// Midpoint of whichever of the two keypoints are present; accumulates the
// confidences of the keypoints used.
struct Midpoint
{
  Point at;
  double conf_sum{0.0};
  int count{0};
};

std::optional<Midpoint> midpoint(const Keypoint& a, const Keypoint& b, double min_conf)
{
  Midpoint m;
  for (const Keypoint* kp : {&a, &b}) {
    if (present(*kp, min_conf)) {
      m.at.x += kp->x;
      m.at.y += kp->y;
      m.conf_sum += kp->confidence;
      ++m.count;
    }
  }
  if (m.count == 0) {
    return std::nullopt;
  }
  m.at.x /= m.count;
  m.at.y /= m.count;
  return m;
}

struct Torso
{
  Midpoint shoulders;
  Midpoint hips;
  double length{0.0};
};

std::optional<Torso> torso(const Pose& pose, double min_conf)
{
  auto shoulders = midpoint(pose[CocoKeypoint::LeftShoulder], pose[CocoKeypoint::RightShoulder],
                            min_conf);
  auto hips = midpoint(pose[CocoKeypoint::LeftHip], pose[CocoKeypoint::RightHip], min_conf);
  if (!shoulders || !hips) {
    return std::nullopt;
  }
  const double len = std::hypot(shoulders->at.x - hips->at.x, shoulders->at.y - hips->at.y);
  return Torso{*shoulders, *hips, len};
}

}  // namespace

void HeadInferenceParams::validate() const
{
  if (!(width_ratio > 0.0) || !(height_ratio > 0.0) || !(neck_ratio > 0.0)) {
    throw ConfigError("head inference: width/height/neck ratios must be > 0");
  }
  if (!(min_keypoint_confidence >= 0.0 && min_keypoint_confidence <= 1.0)) {
    throw ConfigError(fmt::format("head inference: min_keypoint_confidence {} not in [0,1]",
                                  min_keypoint_confidence));
  }
  if (min_facial_keypoints < 1 || min_facial_keypoints > static_cast<int>(kNumFacialKeypoints)) {
    throw ConfigError(fmt::format("head inference: min_facial_keypoints {} not in 1..5",
                                  min_facial_keypoints));
  }
}

std::optional<double> torso_length(const Pose& pose, const HeadInferenceParams& params)
{
  auto t = torso(pose, params.min_keypoint_confidence);
  if (!t) {
    return std::nullopt;
  }
  return t->length;
}

std::optional<Detection> infer_head(const Pose& pose, const HeadInferenceParams& params,
                                    int frame)
{
  const auto t = torso(pose, params.min_keypoint_confidence);
  if (!t) {
    return std::nullopt;
  }
  const double width = params.width_ratio * t->length;
  const double height = params.height_ratio * t->length;

  Point face_center;
  double conf_sum = t->shoulders.conf_sum + t->hips.conf_sum;
  int conf_count = t->shoulders.count + t->hips.count;
  int facial = 0;
  double facial_conf = 0.0;
  for (std::size_t i = 0; i < kNumFacialKeypoints; ++i) {
    const Keypoint& kp = pose.keypoints[i];
    if (present(kp, params.min_keypoint_confidence)) {
      face_center.x += kp.x;
      face_center.y += kp.y;
      facial_conf += kp.confidence;
      ++facial;
    }
  }

  Detection det;
  det.source = Source::Head;
  det.frame = frame;
  if (facial >= params.min_facial_keypoints) {
    face_center.x /= facial;
    face_center.y /= facial;
    det.box = BBox::from_center(face_center, width, height);
    conf_sum += facial_conf;
    conf_count += facial;
  } else {
    // box bottom sits one neck length above the shoulder midpoint
    const double bottom = t->shoulders.at.y - params.neck_ratio * height;
    const double cx = t->shoulders.at.x;
    det.box = {cx - 0.5 * width, bottom - height, cx + 0.5 * width, bottom};
  }
  det.confidence = conf_sum / conf_count;
  return det;
}

std::vector<Detection> infer_heads(const std::vector<Pose>& poses,
                                   const HeadInferenceParams& params, int frame)
{
  std::vector<Detection> out;
  out.reserve(poses.size());
  for (const Pose& p : poses) {
    if (auto d = infer_head(p, params, frame)) {
      out.push_back(*d);
    }
  }
  return out;
}

}  // namespace skelanon
