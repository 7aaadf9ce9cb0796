#pragma once

#include <unistd.h>

#include <filesystem>
#include <string>

#include "sftrack/box.hpp"
#include "sftrack/image.hpp"
#include "sftrack/rng.hpp"

namespace sftrack::test_util {

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("sftrack_" + tag + "_" + std::to_string(counter()++) + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::filesystem::path path_;
};

inline BoundingBox random_box(Xorshift64Star& rng, double extent = 100.0) {
  return {rng.uniform(-extent, extent), rng.uniform(-extent, extent), rng.uniform(0.5, extent),
          rng.uniform(0.5, extent)};
}

inline RawImage solid(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  RawImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      auto* p = img.pixel(x, y);
      p[0] = r;
      p[1] = g;
      p[2] = b;
    }
  return img;
}

inline RawImage random_image(Xorshift64Star& rng, int w, int h) {
  RawImage img(w, h);
  for (auto& v : img.data) v = static_cast<std::uint8_t>(rng.below(256));
  return img;
}

}  // namespace sftrack::test_util
