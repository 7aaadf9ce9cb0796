#pragma once

#include <vector>

#include "sftrack/affine.hpp"
#include "sftrack/features.hpp"
#include "sftrack/image.hpp"
#include "sftrack/optical_flow.hpp"

namespace sftrack {

struct MotionCompParams {
  int downscale = 2;
  CornerParams corners{};
  FlowParams flow{};
  RansacParams ransac{};
};

struct MotionEstimate {
  AffineTransform2D raw;          // least-squares camera motion
  AffineTransform2D constrained;  // uniform-scale version applied to tracks
  int features = 0;
  int tracked = 0;
  int inliers = 0;
  AffineFallback fallback = AffineFallback::None;
};

/// Maps a point from a frame downscaled by `factor` (block average) back to
/// full-resolution pixel coordinates.
inline Point2 upscale_point(const Point2& p, int factor) {
  if (factor <= 1) return p;
  return {(p.x + 0.5) * factor - 0.5, (p.y + 0.5) * factor - 0.5};
}

/// Camera motion between two full-resolution grayscale frames already
/// downscaled by params.downscale.
inline MotionEstimate estimate_camera_motion(const GrayImage& prev_small, const GrayImage& cur_small,
                                             const MotionCompParams& params = {}) {
  MotionEstimate out;
  const auto points = detect_features(prev_small, params.corners);
  out.features = static_cast<int>(points.size());
  if (points.empty()) {
    out.fallback = AffineFallback::TooFewPairs;
    return out;
  }
  const auto flow = track_features(prev_small, cur_small, points, params.flow);
  std::vector<PointPair> pairs;
  pairs.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    if (flow.status[i] == FlowStatus::Matched)
      pairs.push_back({upscale_point(flow.prev_points[i], params.downscale),
                       upscale_point(flow.cur_points[i], params.downscale)});
  out.tracked = static_cast<int>(pairs.size());
  const auto est = estimate_affine(pairs, params.ransac);
  out.raw = est.transform;
  out.inliers = est.inliers;
  out.fallback = est.fallback;
  out.constrained = constrain_scale(est.transform);
  return out;
}

/// Convenience wrapper taking RGB frames.
inline MotionEstimate estimate_camera_motion(const RawImage& prev, const RawImage& cur,
                                             const MotionCompParams& params = {}) {
  return estimate_camera_motion(downscale(to_gray(prev), params.downscale),
                                downscale(to_gray(cur), params.downscale), params);
}

}  // namespace sftrack
