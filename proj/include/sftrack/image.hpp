#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "sftrack/error.hpp"

namespace sftrack {

/// 8-bit RGB, row-major, 3 bytes per pixel.
struct RawImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  RawImage() = default;
  RawImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, fill) {}

  bool empty() const { return width <= 0 || height <= 0; }
  std::uint8_t* pixel(int x, int y) { return &data[(static_cast<std::size_t>(y) * width + x) * 3]; }
  const std::uint8_t* pixel(int x, int y) const {
    return &data[(static_cast<std::size_t>(y) * width + x) * 3];
  }

  friend bool operator==(const RawImage&, const RawImage&) = default;
};

/// Single-channel float image used by the motion estimator.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  GrayImage() = default;
  GrayImage(int w, int h, float fill = 0.0f)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  bool empty() const { return width <= 0 || height <= 0; }
  float& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  float at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  float clamped(int x, int y) const {
    return at(std::clamp(x, 0, width - 1), std::clamp(y, 0, height - 1));
  }

  /// Bilinear sample with border replication.
  float sample(double x, double y) const {
    const double fx = std::floor(x), fy = std::floor(y);
    const int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
    const float ax = static_cast<float>(x - fx), ay = static_cast<float>(y - fy);
    const float v00 = clamped(x0, y0), v10 = clamped(x0 + 1, y0);
    const float v01 = clamped(x0, y0 + 1), v11 = clamped(x0 + 1, y0 + 1);
    return (1 - ay) * ((1 - ax) * v00 + ax * v10) + ay * ((1 - ax) * v01 + ax * v11);
  }
};

/// ITU-R 601 luma, rounded to the nearest integer level.
inline GrayImage to_gray(const RawImage& img) {
  GrayImage g(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const auto* p = img.pixel(x, y);
      g.at(x, y) = static_cast<float>(std::lround(0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]));
    }
  return g;
}

/// Block-average downscale by an integer factor. Output pixel i covers input
/// pixels [i*f, (i+1)*f), so its center sits at input coordinate (i+0.5)*f-0.5.
inline GrayImage downscale(const GrayImage& g, int factor) {
  if (factor <= 1) return g;
  GrayImage out(g.width / factor, g.height / factor);
  const float norm = 1.0f / static_cast<float>(factor * factor);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) {
      float s = 0.0f;
      for (int dy = 0; dy < factor; ++dy)
        for (int dx = 0; dx < factor; ++dx) s += g.at(x * factor + dx, y * factor + dy);
      out.at(x, y) = s * norm;
    }
  return out;
}

/// Bilinear resize of an RGB block to (w, h) using pixel-center alignment.
inline RawImage resize_bilinear(const RawImage& src, int w, int h) {
  if (src.empty() || w <= 0 || h <= 0) throw InputError("resize_bilinear: empty input or target");
  RawImage out(w, h);
  const double sx = static_cast<double>(src.width) / w;
  const double sy = static_cast<double>(src.height) / h;
  for (int y = 0; y < h; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(src.height - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, src.height - 1);
    const double ay = fy - y0;
    for (int x = 0; x < w; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(src.width - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, src.width - 1);
      const double ax = fx - x0;
      for (int c = 0; c < 3; ++c) {
        const double v = (1 - ay) * ((1 - ax) * src.pixel(x0, y0)[c] + ax * src.pixel(x1, y0)[c]) +
                         ay * ((1 - ax) * src.pixel(x0, y1)[c] + ax * src.pixel(x1, y1)[c]);
        out.pixel(x, y)[c] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

}  // namespace sftrack
