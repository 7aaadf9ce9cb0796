#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "sftrack/error.hpp"

namespace sftrack {

/// Axis-aligned box in pixel coordinates, stored as top-left + size.
struct BoundingBox {
  double left = 0.0;
  double top = 0.0;
  double width = 0.0;
  double height = 0.0;

  constexpr double right() const { return left + width; }
  constexpr double bottom() const { return top + height; }
  constexpr double area() const { return width * height; }
  constexpr double center_x() const { return left + 0.5 * width; }
  constexpr double center_y() const { return top + 0.5 * height; }

  /// Zero (or negative) area boxes are representable but never used for
  /// appearance computation.
  constexpr bool degenerate() const { return !(width > 0.0 && height > 0.0); }

  bool finite() const {
    return std::isfinite(left) && std::isfinite(top) && std::isfinite(width) &&
           std::isfinite(height);
  }

  friend constexpr bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Kalman measurement space: (center-x, center-y, aspect w/h, height).
using BoxMeasurement = std::array<double, 4>;

inline double iou(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::min(a.right(), b.right()) - std::max(a.left, b.left);
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.top, b.top);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = std::max(a.area(), 0.0) + std::max(b.area(), 0.0) - inter;
  if (!(uni > 0.0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

inline BoxMeasurement to_cxcyah(const BoundingBox& box) {
  if (!(box.height > 0.0)) throw InputError("to_cxcyah: box height must be positive");
  return {box.center_x(), box.center_y(), box.width / box.height, box.height};
}

inline BoundingBox from_cxcyah(const BoxMeasurement& m) {
  const double w = m[2] * m[3];
  return {m[0] - 0.5 * w, m[1] - 0.5 * m[3], w, m[3]};
}

/// Clamp to the image rectangle [0, width) x [0, height).
inline BoundingBox clamp_to(const BoundingBox& box, double image_width, double image_height) {
  const double l = std::clamp(box.left, 0.0, image_width);
  const double t = std::clamp(box.top, 0.0, image_height);
  const double r = std::clamp(box.right(), 0.0, image_width);
  const double b = std::clamp(box.bottom(), 0.0, image_height);
  return {l, t, std::max(0.0, r - l), std::max(0.0, b - t)};
}

}  // namespace sftrack
