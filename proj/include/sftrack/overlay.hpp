#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "sftrack/box.hpp"
#include "sftrack/image.hpp"
#include "sftrack/io.hpp"
#include "sftrack/metrics.hpp"
#include "sftrack/ppm.hpp"
#include "sftrack/rng.hpp"

namespace sftrack {

inline constexpr int kOutlineWidth = 2;
inline constexpr double kOverlaySaturation = 0.9;
inline constexpr double kOverlayValue = 1.0;

/// HSV (h in degrees) to 8-bit RGB.
inline std::array<std::uint8_t, 3> hsv_to_rgb(double h, double s, double v) {
  const double c = v * s;
  const double hp = std::fmod(h, 360.0) / 60.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hp)) {
    case 0: r = c, g = x; break;
    case 1: r = x, g = c; break;
    case 2: g = c, b = x; break;
    case 3: g = x, b = c; break;
    case 4: r = x, b = c; break;
    default: r = c, b = x; break;
  }
  const double m = v - c;
  auto q = [](double f) { return static_cast<std::uint8_t>(std::lround(std::clamp(f, 0.0, 1.0) * 255.0)); };
  return {q(r + m), q(g + m), q(b + m)};
}

/// hue = 360 * (top 53 bits of splitmix64(track_id)) / 2^53, S = 0.9, V = 1.
inline std::array<std::uint8_t, 3> track_color(int track_id) {
  const std::uint64_t h = splitmix64(static_cast<std::uint64_t>(static_cast<std::int64_t>(track_id)));
  const double hue = static_cast<double>(h >> 11) * 0x1.0p-53 * 360.0;
  return hsv_to_rgb(hue, kOverlaySaturation, kOverlayValue);
}

/// Pixels of a 2-px outline drawn inside the box's rounded pixel extent,
/// clipped to the image.
inline std::vector<std::pair<int, int>> outline_pixels(const BoundingBox& box, int width, int height) {
  std::vector<std::pair<int, int>> out;
  if (!box.finite()) return out;
  const long x0 = std::lround(box.left), y0 = std::lround(box.top);
  const long x1 = std::lround(box.right()) - 1, y1 = std::lround(box.bottom()) - 1;
  if (x1 < x0 || y1 < y0) return out;
  for (long y = std::max(y0, 0L); y <= std::min(y1, static_cast<long>(height) - 1); ++y)
    for (long x = std::max(x0, 0L); x <= std::min(x1, static_cast<long>(width) - 1); ++x) {
      const bool edge = x < x0 + kOutlineWidth || x > x1 - kOutlineWidth || y < y0 + kOutlineWidth ||
                        y > y1 - kOutlineWidth;
      if (edge) out.emplace_back(static_cast<int>(x), static_cast<int>(y));
    }
  return out;
}

inline void draw_boxes(RawImage& img, const std::vector<TrackedBox>& boxes) {
  for (const auto& b : boxes) {
    const auto color = track_color(b.id);
    for (auto [x, y] : outline_pixels(b.box, img.width, img.height)) {
      auto* px = img.pixel(x, y);
      px[0] = color[0];
      px[1] = color[1];
      px[2] = color[2];
    }
  }
}

/// Writes every frame of `seq` to `out_dir` (same file names) with the
/// result boxes of that frame drawn on it.
inline void render_overlay(const Sequence& seq, const FrameBoxes& results, const std::string& out_dir) {
  namespace fs = std::filesystem;
  for (const auto& [frame, boxes] : results)
    if (frame > seq.manifest.seq_length)
      throw InputError("results reference frame " + std::to_string(frame) + " but the sequence has " +
                       std::to_string(seq.manifest.seq_length) + " frames");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw InputError("cannot create '" + out_dir + "': " + ec.message());
  static const std::vector<TrackedBox> kNone;
  for (int f = 1; f <= seq.manifest.seq_length; ++f) {
    RawImage img = seq.load_frame(f);
    auto it = results.find(f);
    draw_boxes(img, it == results.end() ? kNone : it->second);
    write_ppm((fs::path(out_dir) / frame_file_name(f, ".ppm")).string(), img);
  }
}

}  // namespace sftrack
