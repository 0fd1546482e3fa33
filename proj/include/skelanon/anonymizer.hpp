///////////////////////////////////////////////////////////////////////////////
// anonymizer.hpp: irreversible blurring / pixelation of detection regions
///////////////////////////////////////////////////////////////////////////////

#pragma once

#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include <opencv2/core.hpp>

#include "skelanon/geometry.hpp"

namespace skelanon
{

enum class AnonymizeMethod
{
  GaussianBlur,
  Pixelate,
};

std::string_view to_string(AnonymizeMethod m) noexcept;
/// Accepts "blur" and "pixelate".
std::optional<AnonymizeMethod> parse_anonymize_method(std::string_view s) noexcept;

struct AnonymizeConfig
{
  AnonymizeMethod method{AnonymizeMethod::GaussianBlur};
  double blur_sigma_ratio{0.15};  // sigma as a fraction of the region's max dimension
  int pixel_blocks{8};            // blocks along the region's max dimension
  double margin_ratio{0.1};       // box grows by this fraction of its width/height

  void validate() const;
};

/// Integer pixel rectangle [x0, x1) x [y0, y1).
struct PixelRect
{
  int x0{0};
  int y0{0};
  int x1{0};
  int y1{0};

  [[nodiscard]] bool empty() const noexcept { return x1 <= x0 || y1 <= y0; }
  friend bool operator==(const PixelRect&, const PixelRect&) = default;
};

/// Inflates the box by margin_ratio (split evenly on both sides), covers it
/// with whole pixels and clamps to the image. Empty when the box misses the
/// image.
PixelRect anonymized_region(const BBox& box, double margin_ratio, int image_width,
                            int image_height);

struct AnonymizeStats
{
  int applied{0};
  int skipped{0};
};

/// Returns a copy of `image` (8-bit, 1-4 channels) with every detection
/// region anonymized. Pixels outside all regions are untouched. Boxes entirely
/// outside the image are skipped with a warning.
cv::Mat anonymize_frame(const cv::Mat& image, const std::vector<Detection>& dets,
                        const AnonymizeConfig& cfg, AnonymizeStats* stats = nullptr);

/// Reads a PNG/JPEG image as 8-bit BGR. Throws IoError when unreadable.
cv::Mat read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const cv::Mat& image);

}  // namespace skelanon
