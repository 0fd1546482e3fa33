///////////////////////////////////////////////////////////////////////////////
// head_infer.hpp: head bounding boxes from COCO body-pose skeletons
//
// Two constructions share one sizing rule (box width/height proportional to
// torso length):
//   - facial keypoints present: box centered on the mean facial keypoint;
//   - otherwise: box centered horizontally on the shoulders and placed one
//     neck length above them.
///////////////////////////////////////////////////////////////////////////////

#pragma once

#include <optional>
#include <vector>

#include "skelanon/geometry.hpp"

namespace skelanon
{

struct HeadInferenceParams
{
  double width_ratio{0.50};   // head width / torso length
  double height_ratio{0.65};  // head height / torso length
  double neck_ratio{0.25};    // neck length / head height
  double min_keypoint_confidence{0.2};
  int min_facial_keypoints{1};

  /// Throws ConfigError when a field is out of range.
  void validate() const;
};

/// Distance between the shoulder midpoint and the hip midpoint. A single
/// present shoulder (or hip) stands in for its midpoint.
std::optional<double> torso_length(const Pose& pose, const HeadInferenceParams& params);

/// Head box with source Head, or nullopt when the pose has no torso.
std::optional<Detection> infer_head(const Pose& pose, const HeadInferenceParams& params,
                                    int frame = 0);

/// infer_head over every pose of one frame, skipping poses without a head.
std::vector<Detection> infer_heads(const std::vector<Pose>& poses,
                                   const HeadInferenceParams& params, int frame);

}  // namespace skelanon
