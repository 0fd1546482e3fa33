///////////////////////////////////////////////////////////////////////////////
// fusion.hpp: merge per-frame head boxes (from poses) with face-detector boxes
///////////////////////////////////////////////////////////////////////////////

#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "skelanon/geometry.hpp"

namespace skelanon
{

enum class FusionStrategy
{
  KeepBoth,      // union of both channels
  KeepHead,      // drop faces covered by a head
  KeepFace,      // drop heads that contain a face
  ByConfidence,  // per head/faces group, keep the more confident side
};

std::string_view to_string(FusionStrategy s) noexcept;
/// Accepts "keep-both", "keep-head", "keep-face", "by-confidence".
std::optional<FusionStrategy> parse_fusion_strategy(std::string_view s) noexcept;

struct FusionConfig
{
  FusionStrategy strategy{FusionStrategy::ByConfidence};
  double gamma{0.9};  // containment threshold for "face within head", in (0,1]

  void validate() const;
};

/// containment_ratio(face, head) >= gamma. A zero-area face box is never
/// within anything (a warning is logged).
bool face_within_head(const Detection& face, const Detection& head, double gamma);

/// Fuses one frame. Output holds the kept heads in input order followed by the
/// kept faces in input order; boxes are copied unchanged.
std::vector<Detection> fuse(const std::vector<Detection>& heads,
                            const std::vector<Detection>& faces, const FusionConfig& cfg);

}  // namespace skelanon
