///////////////////////////////////////////////////////////////////////////////
// geometry.hpp: pixel-space primitives shared by every stage
// Boxes, keypoints, poses and detections in continuous image coordinates
// (x to the right, y downward).
///////////////////////////////////////////////////////////////////////////////

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "skelanon/errors.hpp"

namespace skelanon
{

struct Point
{
  double x{0.0};
  double y{0.0};
};

/// Axis-aligned box. Valid when x_min <= x_max and y_min <= y_max.
struct BBox
{
  double x_min{0.0};
  double y_min{0.0};
  double x_max{0.0};
  double y_max{0.0};

  [[nodiscard]] double width() const noexcept { return x_max - x_min; }
  [[nodiscard]] double height() const noexcept { return y_max - y_min; }
  [[nodiscard]] double area() const noexcept { return width() * height(); }
  [[nodiscard]] double max_dim() const noexcept;
  [[nodiscard]] Point center() const noexcept;
  [[nodiscard]] bool valid() const noexcept { return x_min <= x_max && y_min <= y_max; }

  /// Box of the given size centered on `c`.
  static BBox from_center(Point c, double width, double height) noexcept;

  friend bool operator==(const BBox&, const BBox&) = default;
};

/// Area of a ∩ b, zero when disjoint.
double intersect_area(const BBox& a, const BBox& b) noexcept;

/// Intersection over union. Defined as 0 when the union is empty.
double iou(const BBox& a, const BBox& b) noexcept;

/// Fraction of `inner` covered by `outer`. Throws GeometryError for zero-area inner.
double containment_ratio(const BBox& inner, const BBox& outer);

/// Euclidean distance between box centers.
double center_distance(const BBox& a, const BBox& b) noexcept;

// COCO keypoint order
enum class CocoKeypoint : std::size_t
{
  Nose = 0,
  LeftEye,
  RightEye,
  LeftEar,
  RightEar,
  LeftShoulder,
  RightShoulder,
  LeftElbow,
  RightElbow,
  LeftWrist,
  RightWrist,
  LeftHip,
  RightHip,
  LeftKnee,
  RightKnee,
  LeftAnkle,
  RightAnkle,
};

inline constexpr std::size_t kNumKeypoints = 17;
inline constexpr std::size_t kNumFacialKeypoints = 5;  // indices 0..4

/// A keypoint with confidence 0 is absent and its position carries no meaning.
struct Keypoint
{
  double x{0.0};
  double y{0.0};
  double confidence{0.0};

  friend bool operator==(const Keypoint&, const Keypoint&) = default;
};

struct Pose
{
  std::array<Keypoint, kNumKeypoints> keypoints{};

  Keypoint& operator[](CocoKeypoint k) { return keypoints[static_cast<std::size_t>(k)]; }
  const Keypoint& operator[](CocoKeypoint k) const
  {
    return keypoints[static_cast<std::size_t>(k)];
  }

  friend bool operator==(const Pose&, const Pose&) = default;
};

enum class Source
{
  Face,
  Head,
};

std::string_view to_string(Source s) noexcept;
/// Parses "face" / "head"; returns nullopt for anything else.
std::optional<Source> parse_source(std::string_view s) noexcept;

struct Detection
{
  BBox box;
  double confidence{0.0};
  Source source{Source::Face};
  int frame{0};
  std::optional<int> track_id;

  friend bool operator==(const Detection&, const Detection&) = default;
};

/// All poses of one frame.
struct PoseFrame
{
  int frame{0};
  std::vector<Pose> poses;

  friend bool operator==(const PoseFrame&, const PoseFrame&) = default;
};

/// All detections of one frame.
struct DetectionFrame
{
  int frame{0};
  std::vector<Detection> boxes;

  friend bool operator==(const DetectionFrame&, const DetectionFrame&) = default;
};

}  // namespace skelanon
