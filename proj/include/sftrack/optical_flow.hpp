#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "sftrack/error.hpp"
#include "sftrack/features.hpp"
#include "sftrack/image.hpp"

namespace sftrack {

struct FlowParams {
  int levels = 3;  // pyramid levels including the full-resolution one
  int window = 21;
  int max_iterations = 30;
  double epsilon = 0.01;
  /// Minimum eigenvalue of the mean per-pixel gradient matrix; below it the
  /// window has no usable texture (aperture problem).
  double min_eigen = 1e-2;
  /// Mean absolute intensity residual over the window that marks a match lost.
  double max_residual = 20.0;
};

enum class FlowStatus : std::uint8_t { Matched = 0, Lost = 1 };

struct FeatureTrackResult {
  std::vector<Point2> prev_points;
  std::vector<Point2> cur_points;
  std::vector<FlowStatus> status;
  std::vector<double> residual;

  std::size_t matched_count() const {
    std::size_t n = 0;
    for (auto s : status) n += s == FlowStatus::Matched;
    return n;
  }
};

namespace detail {

/// 5-tap binomial blur then 2x decimation.
inline GrayImage pyr_down(const GrayImage& g) {
  static constexpr float k[5] = {1.f / 16, 4.f / 16, 6.f / 16, 4.f / 16, 1.f / 16};
  GrayImage tmp(g.width, g.height);
  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < g.width; ++x) {
      float s = 0;
      for (int i = -2; i <= 2; ++i) s += k[i + 2] * g.clamped(x + i, y);
      tmp.at(x, y) = s;
    }
  GrayImage out((g.width + 1) / 2, (g.height + 1) / 2);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) {
      float s = 0;
      for (int i = -2; i <= 2; ++i) s += k[i + 2] * tmp.clamped(2 * x, 2 * y + i);
      out.at(x, y) = s;
    }
  return out;
}

/// Scharr derivatives, normalized to intensity per pixel.
inline void scharr(const GrayImage& g, GrayImage& gx, GrayImage& gy) {
  gx = GrayImage(g.width, g.height);
  gy = GrayImage(g.width, g.height);
  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < g.width; ++x) {
      gx.at(x, y) = (3 * (g.clamped(x + 1, y - 1) - g.clamped(x - 1, y - 1)) +
                     10 * (g.clamped(x + 1, y) - g.clamped(x - 1, y)) +
                     3 * (g.clamped(x + 1, y + 1) - g.clamped(x - 1, y + 1))) / 32.0f;
      gy.at(x, y) = (3 * (g.clamped(x - 1, y + 1) - g.clamped(x - 1, y - 1)) +
                     10 * (g.clamped(x, y + 1) - g.clamped(x, y - 1)) +
                     3 * (g.clamped(x + 1, y + 1) - g.clamped(x + 1, y - 1))) / 32.0f;
    }
}

struct PyramidLevel {
  GrayImage image, grad_x, grad_y;
};

inline std::vector<PyramidLevel> build_pyramid(const GrayImage& g, int levels, bool gradients) {
  std::vector<PyramidLevel> pyr;
  pyr.push_back({g, {}, {}});
  for (int l = 1; l < levels; ++l) {
    const auto& prev = pyr.back().image;
    if (prev.width < 8 || prev.height < 8) break;
    pyr.push_back({pyr_down(prev), {}, {}});
  }
  if (gradients)
    for (auto& lvl : pyr) scharr(lvl.image, lvl.grad_x, lvl.grad_y);
  return pyr;
}

inline bool inside(const GrayImage& g, const Point2& p) {
  return p.x >= 0.0 && p.y >= 0.0 && p.x <= g.width - 1 && p.y <= g.height - 1;
}

}  // namespace detail

/// Pyramidal coarse-to-fine Lucas-Kanade: each point's displacement is
/// estimated at the coarsest level, doubled, and refined level by level.
inline FeatureTrackResult track_features(const GrayImage& prev, const GrayImage& cur,
                                         const std::vector<Point2>& points,
                                         const FlowParams& params = {}) {
  if (prev.width != cur.width || prev.height != cur.height)
    throw InputError("track_features: frame dimensions differ");
  if (prev.empty()) throw InputError("track_features: empty frame");

  FeatureTrackResult res;
  res.prev_points = points;
  res.cur_points = points;
  res.status.assign(points.size(), FlowStatus::Lost);
  res.residual.assign(points.size(), 0.0);
  if (points.empty()) return res;

  const auto pyr_prev = detail::build_pyramid(prev, params.levels, true);
  const auto pyr_cur = detail::build_pyramid(cur, static_cast<int>(pyr_prev.size()), false);
  const int top = static_cast<int>(pyr_prev.size()) - 1;
  const int half = params.window / 2;
  const int n_win = (2 * half + 1) * (2 * half + 1);

  std::vector<float> tmpl(n_win), wx(n_win), wy(n_win);

  for (std::size_t idx = 0; idx < points.size(); ++idx) {
    const Point2 pt = points[idx];
    if (!detail::inside(prev, pt)) continue;

    double gx = 0.0, gy = 0.0;  // guess propagated from coarser levels
    bool ok = true;
    double dx = 0.0, dy = 0.0;
    for (int level = top; level >= 0 && ok; --level) {
      const auto& lp = pyr_prev[level];
      const auto& lc = pyr_cur[level].image;
      const double scale = 1.0 / static_cast<double>(1 << level);
      const double px = pt.x * scale, py = pt.y * scale;

      double a11 = 0, a12 = 0, a22 = 0;
      int k = 0;
      for (int j = -half; j <= half; ++j)
        for (int i = -half; i <= half; ++i, ++k) {
          tmpl[k] = lp.image.sample(px + i, py + j);
          wx[k] = lp.grad_x.sample(px + i, py + j);
          wy[k] = lp.grad_y.sample(px + i, py + j);
          a11 += double(wx[k]) * wx[k];
          a12 += double(wx[k]) * wy[k];
          a22 += double(wy[k]) * wy[k];
        }
      const double det = a11 * a22 - a12 * a12;
      const double min_eig =
          (0.5 * (a11 + a22) - std::sqrt(0.25 * (a11 - a22) * (a11 - a22) + a12 * a12)) / n_win;
      if (min_eig < params.min_eigen || !(std::abs(det) > 0.0)) {
        ok = false;
        break;
      }

      double nx = 0.0, ny = 0.0;
      for (int it = 0; it < params.max_iterations; ++it) {
        double b1 = 0, b2 = 0;
        k = 0;
        const double ox = px + gx + nx, oy = py + gy + ny;
        for (int j = -half; j <= half; ++j)
          for (int i = -half; i <= half; ++i, ++k) {
            const double diff = tmpl[k] - lc.sample(ox + i, oy + j);
            b1 += diff * wx[k];
            b2 += diff * wy[k];
          }
        const double ex = (a22 * b1 - a12 * b2) / det;
        const double ey = (a11 * b2 - a12 * b1) / det;
        nx += ex;
        ny += ey;
        if (!std::isfinite(nx) || !std::isfinite(ny)) {
          ok = false;
          break;
        }
        if (ex * ex + ey * ey < params.epsilon * params.epsilon) break;
      }
      if (!ok) break;
      if (level > 0) {
        gx = 2.0 * (gx + nx);
        gy = 2.0 * (gy + ny);
      } else {
        dx = gx + nx;
        dy = gy + ny;
      }
    }
    if (!ok) continue;

    const Point2 moved{pt.x + dx, pt.y + dy};
    if (!detail::inside(cur, moved)) continue;

    double err = 0.0;
    for (int j = -half; j <= half; ++j)
      for (int i = -half; i <= half; ++i)
        err += std::abs(prev.sample(pt.x + i, pt.y + j) - cur.sample(moved.x + i, moved.y + j));
    err /= n_win;
    res.residual[idx] = err;
    res.cur_points[idx] = moved;
    if (err <= params.max_residual) res.status[idx] = FlowStatus::Matched;
  }
  return res;
}

}  // namespace sftrack
