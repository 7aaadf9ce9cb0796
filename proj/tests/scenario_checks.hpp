#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "sftrack/affine.hpp"
#include "sftrack/box.hpp"
#include "sftrack/motion_comp.hpp"
#include "sftrack/synthetic.hpp"

namespace sftrack::test_util {

/// Maps a box through a uniform-scale transform: center by the full
/// transform, width and height by the uniform scale.
inline BoundingBox map_box(const AffineTransform2D& m, const BoundingBox& b) {
  const double s = std::max(m.scale_x(), m.scale_y());
  const Point2 c = m.apply({b.center_x(), b.center_y()});
  const double w = b.width * s, h = b.height * s;
  return {c.x - 0.5 * w, c.y - 0.5 * h, w, h};
}

inline bool fully_inside(const BoundingBox& b, int width, int height) {
  return b.left >= 0 && b.top >= 0 && b.right() <= width && b.bottom() <= height;
}

struct CompensationStats {
  double min_iou_compensated = 1.0;
  double min_iou_uncompensated = 1.0;
  int pairs = 0;
  int frames = 0;
};

/// For every consecutive frame pair, carries each fully visible static
/// object's box from frame k-1 into frame k with the estimated camera motion
/// and compares it with its true box at frame k.
inline CompensationStats static_object_compensation(const synth::SyntheticScene& scene,
                                                    const MotionCompParams& params = {}) {
  CompensationStats st;
  const auto& spec = scene.spec();
  RawImage prev = scene.render(1);
  for (int k = 2; k <= spec.frames; ++k) {
    RawImage cur = scene.render(k);
    const auto est = estimate_camera_motion(prev, cur, params);
    ++st.frames;
    for (std::size_t i = 0; i < spec.objects.size(); ++i) {
      const auto& o = spec.objects[i];
      if (!o.is_static() || !scene.alive(o, k - 1) || !scene.alive(o, k)) continue;
      const BoundingBox before = scene.object_box(i, k - 1);
      const BoundingBox after = scene.object_box(i, k);
      if (!fully_inside(before, spec.width, spec.height) || !fully_inside(after, spec.width, spec.height))
        continue;
      st.min_iou_compensated = std::min(st.min_iou_compensated, iou(map_box(est.constrained, before), after));
      st.min_iou_uncompensated = std::min(st.min_iou_uncompensated, iou(before, after));
      ++st.pairs;
    }
    prev = std::move(cur);
  }
  return st;
}

}  // namespace sftrack::test_util
