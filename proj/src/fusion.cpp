#include "skelanon/fusion.hpp"

#include <algorithm>
#include <limits>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace skelanon
{

std::string_view to_string(FusionStrategy s) noexcept
{
  switch (s) {
    case FusionStrategy::KeepBoth:
      return "keep-both";
    case FusionStrategy::KeepHead:
      return "keep-head";
    case FusionStrategy::KeepFace:
      return "keep-face";
    case FusionStrategy::ByConfidence:
      return "by-confidence";
  }
  return "unknown";
}

std::optional<FusionStrategy> parse_fusion_strategy(std::string_view s) noexcept
{
  for (auto v : {FusionStrategy::KeepBoth, FusionStrategy::KeepHead, FusionStrategy::KeepFace,
                 FusionStrategy::ByConfidence}) {
    if (s == to_string(v)) {
      return v;
    }
  }
  return std::nullopt;
}

void FusionConfig::validate() const
{
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw ConfigError(fmt::format("fusion: gamma {} not in (0,1]", gamma));
  }
}

bool face_within_head(const Detection& face, const Detection& head, double gamma)
{
  if (!(face.box.area() > 0.0)) {
    spdlog::warn("fusion: zero-area face box at frame {} treated as not within any head",
                 face.frame);
    return false;
  }
  return containment_ratio(face.box, head.box) >= gamma;
}

std::vector<Detection> fuse(const std::vector<Detection>& heads,
                            const std::vector<Detection>& faces, const FusionConfig& cfg)
{
  cfg.validate();
  std::vector<Detection> out;
  out.reserve(heads.size() + faces.size());

  if (cfg.strategy == FusionStrategy::KeepBoth) {
    out.insert(out.end(), heads.begin(), heads.end());
    out.insert(out.end(), faces.begin(), faces.end());
    return out;
  }

  // within[f][h]
  std::vector<std::vector<bool>> within(faces.size(), std::vector<bool>(heads.size(), false));
  std::vector<bool> face_covered(faces.size(), false);
  std::vector<bool> head_has_face(heads.size(), false);
  for (std::size_t f = 0; f < faces.size(); ++f) {
    for (std::size_t h = 0; h < heads.size(); ++h) {
      if (face_within_head(faces[f], heads[h], cfg.gamma)) {
        within[f][h] = true;
        face_covered[f] = true;
        head_has_face[h] = true;
      }
    }
  }

  std::vector<bool> keep_head(heads.size(), true);
  std::vector<bool> keep_face(faces.size(), true);

  switch (cfg.strategy) {
    case FusionStrategy::KeepHead:
      for (std::size_t f = 0; f < faces.size(); ++f) {
        keep_face[f] = !face_covered[f];
      }
      break;
    case FusionStrategy::KeepFace:
      for (std::size_t h = 0; h < heads.size(); ++h) {
        keep_head[h] = !head_has_face[h];
      }
      break;
    case FusionStrategy::ByConfidence: {
      // each covered face joins the head containing it most; ties go to the
      // lower head index
      std::vector<std::vector<std::size_t>> groups(heads.size());
      for (std::size_t f = 0; f < faces.size(); ++f) {
        if (!face_covered[f]) {
          continue;
        }
        std::size_t best = heads.size();
        double best_ratio = -1.0;
        for (std::size_t h = 0; h < heads.size(); ++h) {
          if (!within[f][h]) {
            continue;
          }
          const double r = containment_ratio(faces[f].box, heads[h].box);
          if (r > best_ratio) {
            best_ratio = r;
            best = h;
          }
        }
        groups[best].push_back(f);
      }
      for (std::size_t h = 0; h < heads.size(); ++h) {
        if (groups[h].empty()) {
          continue;
        }
        double max_face = -std::numeric_limits<double>::infinity();
        for (std::size_t f : groups[h]) {
          max_face = std::max(max_face, faces[f].confidence);
        }
        const bool head_wins = heads[h].confidence >= max_face;
        keep_head[h] = head_wins;
        for (std::size_t f : groups[h]) {
          keep_face[f] = !head_wins;
        }
      }
      break;
    }
    case FusionStrategy::KeepBoth:
      break;
  }

  for (std::size_t h = 0; h < heads.size(); ++h) {
    if (keep_head[h]) {
      out.push_back(heads[h]);
    }
  }
  for (std::size_t f = 0; f < faces.size(); ++f) {
    if (keep_face[f]) {
      out.push_back(faces[f]);
    }
  }
  return out;
}

}  // namespace skelanon
