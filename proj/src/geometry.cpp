#include "skelanon/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace skelanon
{

double BBox::max_dim() const noexcept
{
  return std::max(width(), height());
}

Point BBox::center() const noexcept
{
  return {0.5 * (x_min + x_max), 0.5 * (y_min + y_max)};
}

BBox BBox::from_center(Point c, double width, double height) noexcept
{
  return {c.x - 0.5 * width, c.y - 0.5 * height, c.x + 0.5 * width, c.y + 0.5 * height};
}

double intersect_area(const BBox& a, const BBox& b) noexcept
{
  const double w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (w <= 0.0 || h <= 0.0) {
    return 0.0;
  }
  return w * h;
}

double iou(const BBox& a, const BBox& b) noexcept
{
  const double inter = intersect_area(a, b);
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) {
    return 0.0;
  }
  return std::clamp(inter / uni, 0.0, 1.0);
}

double containment_ratio(const BBox& inner, const BBox& outer)
{
  const double area = inner.area();
  if (!(area > 0.0)) {
    throw GeometryError("containment_ratio: inner box has zero area");
  }
  return std::min(1.0, intersect_area(inner, outer) / area);
}

double center_distance(const BBox& a, const BBox& b) noexcept
{
  const Point ca = a.center();
  const Point cb = b.center();
  return std::hypot(ca.x - cb.x, ca.y - cb.y);
}

std::string_view to_string(Source s) noexcept
{
  return s == Source::Face ? "face" : "head";
}

std::optional<Source> parse_source(std::string_view s) noexcept
{
  if (s == "face") {
    return Source::Face;
  }
  if (s == "head") {
    return Source::Head;
  }
  return std::nullopt;
}

}  // namespace skelanon
