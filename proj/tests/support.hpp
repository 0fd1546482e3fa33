#pragma once

#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "skelanon/geometry.hpp"

namespace skelanon::fixtures
{

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir
{
public:
  explicit TempDir(const std::string& tag)
  {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("skelanon_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir()
  {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

inline BBox random_box(std::mt19937_64& rng, double lo = -50.0, double hi = 150.0,
                       double max_size = 60.0)
{
  std::uniform_real_distribution<double> pos(lo, hi);
  std::uniform_real_distribution<double> size(0.5, max_size);
  const double x = pos(rng);
  const double y = pos(rng);
  return {x, y, x + size(rng), y + size(rng)};
}

inline BBox random_int_box(std::mt19937_64& rng, int lo, int hi, int max_size)
{
  std::uniform_int_distribution<int> pos(lo, hi);
  std::uniform_int_distribution<int> size(1, max_size);
  const int x = pos(rng);
  const int y = pos(rng);
  return {double(x), double(y), double(x + size(rng)), double(y + size(rng))};
}

inline Detection det(const BBox& b, Source s = Source::Head, double conf = 0.5, int frame = 0)
{
  Detection d;
  d.box = b;
  d.source = s;
  d.confidence = conf;
  d.frame = frame;
  return d;
}

}  // namespace skelanon::fixtures
