#include "skelanon/anonymizer.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <spdlog/spdlog.h>

namespace skelanon
{

std::string_view to_string(AnonymizeMethod m) noexcept
{
  return m == AnonymizeMethod::GaussianBlur ? "blur" : "pixelate";
}

std::optional<AnonymizeMethod> parse_anonymize_method(std::string_view s) noexcept
{
  if (s == "blur") {
    return AnonymizeMethod::GaussianBlur;
  }
  if (s == "pixelate") {
    return AnonymizeMethod::Pixelate;
  }
  return std::nullopt;
}

void AnonymizeConfig::validate() const
{
  if (!(blur_sigma_ratio > 0.0) || !(margin_ratio > 0.0)) {
    throw ConfigError("anonymize: blur_sigma_ratio and margin_ratio must be > 0");
  }
  if (pixel_blocks < 2) {
    throw ConfigError(fmt::format("anonymize: pixel_blocks {} must be >= 2", pixel_blocks));
  }
}

PixelRect anonymized_region(const BBox& box, double margin_ratio, int image_width,
                            int image_height)
{
  const double mx = 0.5 * margin_ratio * box.width();
  const double my = 0.5 * margin_ratio * box.height();
  const double x0 = std::floor(box.x_min - mx);
  const double y0 = std::floor(box.y_min - my);
  const double x1 = std::ceil(box.x_max + mx);
  const double y1 = std::ceil(box.y_max + my);
  auto clampd = [](double v, int hi) {
    return static_cast<int>(std::clamp(v, 0.0, static_cast<double>(hi)));
  };
  return {clampd(x0, image_width), clampd(y0, image_height), clampd(x1, image_width),
          clampd(y1, image_height)};
}

namespace
{

void blur_region(cv::Mat& roi, const AnonymizeConfig& cfg)
{
  const double sigma = std::max(0.5, cfg.blur_sigma_ratio * std::max(roi.cols, roi.rows));
  int k = 2 * static_cast<int>(std::ceil(3.0 * sigma)) + 1;
  cv::Mat blurred;
  // kernel limited to the region so no context from outside leaks in
  cv::GaussianBlur(roi, blurred, cv::Size(k, k), sigma, sigma,
                   cv::BORDER_REFLECT_101 | cv::BORDER_ISOLATED);
  blurred.copyTo(roi);
}

// Square blocks anchored at the region's top-left corner, each filled with the
// rounded mean of its pixels. A constant block maps to itself.
void pixelate_region(cv::Mat& roi, const AnonymizeConfig& cfg)
{
  const int max_dim = std::max(roi.cols, roi.rows);
  const int block = std::max(1, (max_dim + cfg.pixel_blocks - 1) / cfg.pixel_blocks);
  const int channels = roi.channels();
  for (int by = 0; by < roi.rows; by += block) {
    for (int bx = 0; bx < roi.cols; bx += block) {
      const int h = std::min(block, roi.rows - by);
      const int w = std::min(block, roi.cols - bx);
      std::vector<long> sum(channels, 0);
      for (int y = by; y < by + h; ++y) {
        const uchar* row = roi.ptr<uchar>(y);
        for (int x = bx; x < bx + w; ++x) {
          for (int c = 0; c < channels; ++c) {
            sum[c] += row[x * channels + c];
          }
        }
      }
      const long n = static_cast<long>(w) * h;
      std::vector<uchar> mean(channels);
      for (int c = 0; c < channels; ++c) {
        mean[c] = static_cast<uchar>((sum[c] + n / 2) / n);
      }
      for (int y = by; y < by + h; ++y) {
        uchar* row = roi.ptr<uchar>(y);
        for (int x = bx; x < bx + w; ++x) {
          for (int c = 0; c < channels; ++c) {
            row[x * channels + c] = mean[c];
          }
        }
      }
    }
  }
}

}  // namespace

cv::Mat anonymize_frame(const cv::Mat& image, const std::vector<Detection>& dets,
                        const AnonymizeConfig& cfg, AnonymizeStats* stats)
{
  cfg.validate();
  if (image.empty()) {
    throw IoError("anonymize: empty image");
  }
  if (image.depth() != CV_8U) {
    throw IoError("anonymize: only 8-bit images are supported");
  }
  AnonymizeStats local;
  cv::Mat out = image.clone();
  for (const Detection& d : dets) {
    const PixelRect r = anonymized_region(d.box, cfg.margin_ratio, out.cols, out.rows);
    if (r.empty()) {
      spdlog::warn("anonymize: frame {} box [{}, {}, {}, {}] lies outside the {}x{} image",
                   d.frame, d.box.x_min, d.box.y_min, d.box.x_max, d.box.y_max, out.cols,
                   out.rows);
      ++local.skipped;
      continue;
    }
    cv::Mat roi = out(cv::Rect(r.x0, r.y0, r.x1 - r.x0, r.y1 - r.y0));
    if (cfg.method == AnonymizeMethod::GaussianBlur) {
      blur_region(roi, cfg);
    } else {
      pixelate_region(roi, cfg);
    }
    ++local.applied;
  }
  if (stats) {
    *stats = local;
  }
  return out;
}

cv::Mat read_image(const std::filesystem::path& path)
{
  cv::Mat img = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (img.empty()) {
    throw IoError(fmt::format("cannot read image {}", path.string()));
  }
  return img;
}

void write_image(const std::filesystem::path& path, const cv::Mat& image)
{
  if (!cv::imwrite(path.string(), image)) {
    throw IoError(fmt::format("cannot write image {}", path.string()));
  }
}

}  // namespace skelanon
