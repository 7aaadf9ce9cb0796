#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "sftrack/error.hpp"
#include "sftrack/image.hpp"

namespace sftrack {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

struct CornerParams {
  int max_count = 200;
  double quality = 0.01;
  double min_distance = 8.0;
  int block_size = 3;
};

namespace detail {

/// 3x3 Sobel gradients with border replication.
inline void sobel(const GrayImage& g, GrayImage& gx, GrayImage& gy) {
  gx = GrayImage(g.width, g.height);
  gy = GrayImage(g.width, g.height);
  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < g.width; ++x) {
      const float a = g.clamped(x - 1, y - 1), b = g.clamped(x, y - 1), c = g.clamped(x + 1, y - 1);
      const float d = g.clamped(x - 1, y), f = g.clamped(x + 1, y);
      const float h = g.clamped(x - 1, y + 1), i = g.clamped(x, y + 1), j = g.clamped(x + 1, y + 1);
      gx.at(x, y) = (c + 2 * f + j) - (a + 2 * d + h);
      gy.at(x, y) = (h + 2 * i + j) - (a + 2 * b + c);
    }
}

}  // namespace detail

/// Minimum-eigenvalue response of the gradient structure tensor summed over
/// a block_size x block_size window.
inline GrayImage min_eigen_response(const GrayImage& g, int block_size = 3) {
  GrayImage gx, gy;
  detail::sobel(g, gx, gy);
  const int r = block_size / 2;
  GrayImage resp(g.width, g.height);
  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < g.width; ++x) {
      double sxx = 0, sxy = 0, syy = 0;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          const double ix = gx.clamped(x + dx, y + dy);
          const double iy = gy.clamped(x + dx, y + dy);
          sxx += ix * ix;
          sxy += ix * iy;
          syy += iy * iy;
        }
      const double half_tr = 0.5 * (sxx + syy);
      const double diff = 0.5 * (sxx - syy);
      resp.at(x, y) = static_cast<float>(half_tr - std::sqrt(diff * diff + sxy * sxy));
    }
  return resp;
}

/// Good-features-to-track corner selection: threshold at quality * max
/// response, 3x3 non-maximum suppression, strongest first, greedy
/// min_distance suppression. Ties are broken by row-major position.
inline std::vector<Point2> detect_features(const GrayImage& g, const CornerParams& p = {}) {
  if (g.empty()) throw InputError("detect_features: empty image");
  if (p.max_count <= 0) return {};
  const GrayImage resp = min_eigen_response(g, p.block_size);
  const float max_resp = *std::max_element(resp.data.begin(), resp.data.end());
  if (!(max_resp > 0.0f)) return {};
  const float thresh = static_cast<float>(p.quality) * max_resp;

  struct Candidate {
    float response;
    int x, y;
  };
  std::vector<Candidate> cands;
  for (int y = 1; y + 1 < g.height; ++y)
    for (int x = 1; x + 1 < g.width; ++x) {
      const float v = resp.at(x, y);
      if (v < thresh || !(v > 0.0f)) continue;
      bool is_max = true;
      for (int dy = -1; dy <= 1 && is_max; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          if (resp.at(x + dx, y + dy) > v) {
            is_max = false;
            break;
          }
      if (is_max) cands.push_back({v, x, y});
    }
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Candidate& a, const Candidate& b) { return a.response > b.response; });

  // Grid buckets of side min_distance make the neighbour check local.
  const double md = std::max(p.min_distance, 0.0);
  const double md2 = md * md;
  const int cell = std::max(1, static_cast<int>(std::ceil(md)));
  const int gw = (g.width + cell - 1) / cell, gh = (g.height + cell - 1) / cell;
  std::vector<std::vector<Point2>> grid(static_cast<std::size_t>(gw) * gh);

  std::vector<Point2> out;
  for (const auto& c : cands) {
    const int cx = c.x / cell, cy = c.y / cell;
    bool ok = true;
    if (md > 0.0) {
      for (int yy = std::max(0, cy - 1); yy <= std::min(gh - 1, cy + 1) && ok; ++yy)
        for (int xx = std::max(0, cx - 1); xx <= std::min(gw - 1, cx + 1) && ok; ++xx)
          for (const auto& q : grid[static_cast<std::size_t>(yy) * gw + xx]) {
            const double dx = q.x - c.x, dy = q.y - c.y;
            if (dx * dx + dy * dy < md2) {
              ok = false;
              break;
            }
          }
    }
    if (!ok) continue;
    const Point2 pt{static_cast<double>(c.x), static_cast<double>(c.y)};
    grid[static_cast<std::size_t>(cy) * gw + cx].push_back(pt);
    out.push_back(pt);
    if (static_cast<int>(out.size()) >= p.max_count) break;
  }
  return out;
}

}  // namespace sftrack
