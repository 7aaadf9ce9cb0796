#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "sftrack/features.hpp"
#include "sftrack/kalman.hpp"
#include "sftrack/rng.hpp"

namespace sftrack {

/// p' = linear * p + translation.
struct AffineTransform2D {
  Eigen::Matrix2d linear = Eigen::Matrix2d::Identity();
  Eigen::Vector2d translation = Eigen::Vector2d::Zero();

  static AffineTransform2D identity() { return {}; }

  /// Similarity with uniform scale, counter-clockwise rotation (image axes)
  /// and translation.
  static AffineTransform2D similarity(double scale, double rotation_rad, double tx, double ty) {
    AffineTransform2D m;
    const double c = std::cos(rotation_rad), s = std::sin(rotation_rad);
    m.linear << scale * c, -scale * s, scale * s, scale * c;
    m.translation << tx, ty;
    return m;
  }

  Point2 apply(const Point2& p) const {
    const Eigen::Vector2d q = linear * Eigen::Vector2d(p.x, p.y) + translation;
    return {q.x(), q.y()};
  }

  double determinant() const { return linear.determinant(); }
  double scale_x() const { return linear.col(0).norm(); }
  double scale_y() const { return linear.col(1).norm(); }

  bool is_identity() const {
    return linear == Eigen::Matrix2d::Identity() && translation == Eigen::Vector2d::Zero();
  }

  /// (this ∘ other)(p) = this(other(p))
  AffineTransform2D compose(const AffineTransform2D& other) const {
    return {linear * other.linear, linear * other.translation + translation};
  }

  AffineTransform2D inverse() const {
    const Eigen::Matrix2d inv = linear.inverse();
    return {inv, -inv * translation};
  }
};

struct PointPair {
  Point2 from;
  Point2 to;
};

struct RansacParams {
  int iterations = 100;
  double inlier_threshold = 3.0;  // px reprojection error
  std::uint64_t seed = 0x5EEDF00DULL;
  /// Inliers after the final refit are re-selected at a robust residual scale
  /// (3 * 1.4826 * median), never tighter than this floor.
  double min_refine_threshold = 1e-6;
};

enum class AffineFallback : std::uint8_t { None, TooFewPairs, Collinear, TooFewInliers };

struct AffineEstimate {
  AffineTransform2D transform;
  int inliers = 0;
  double inlier_ratio = 0.0;
  AffineFallback fallback = AffineFallback::None;
};

namespace detail {

/// Least-squares affine fit over the selected pairs; false if rank-deficient.
inline bool fit_affine(const std::vector<PointPair>& pairs, const std::vector<int>& idx,
                       AffineTransform2D& out) {
  const Eigen::Index n = static_cast<Eigen::Index>(idx.size());
  if (n < 3) return false;
  // Center the source points for conditioning.
  double mx = 0, my = 0;
  for (int i : idx) {
    mx += pairs[i].from.x;
    my += pairs[i].from.y;
  }
  mx /= n;
  my /= n;
  Eigen::MatrixXd a(n, 3);
  Eigen::MatrixXd b(n, 2);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& p = pairs[idx[r]];
    a(r, 0) = p.from.x - mx;
    a(r, 1) = p.from.y - my;
    a(r, 2) = 1.0;
    b(r, 0) = p.to.x;
    b(r, 1) = p.to.y;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < 3) return false;
  const Eigen::MatrixXd sol = qr.solve(b);  // 3x2
  out.linear << sol(0, 0), sol(1, 0), sol(0, 1), sol(1, 1);
  const Eigen::Vector2d c(sol(2, 0), sol(2, 1));
  out.translation = c - out.linear * Eigen::Vector2d(mx, my);
  return out.linear.allFinite() && out.translation.allFinite();
}

inline double reprojection_error(const AffineTransform2D& m, const PointPair& p) {
  const Point2 q = m.apply(p.from);
  return std::hypot(q.x - p.to.x, q.y - p.to.y);
}

inline bool all_collinear(const std::vector<PointPair>& pairs) {
  double mx = 0, my = 0;
  for (const auto& p : pairs) {
    mx += p.from.x;
    my += p.from.y;
  }
  mx /= pairs.size();
  my /= pairs.size();
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& p : pairs) {
    const double dx = p.from.x - mx, dy = p.from.y - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  const double tr = sxx + syy;
  const double min_eig = 0.5 * tr - std::sqrt(0.25 * (sxx - syy) * (sxx - syy) + sxy * sxy);
  return !(min_eig > 1e-9 * std::max(tr, 1.0));
}

inline std::vector<int> select_inliers(const std::vector<PointPair>& pairs,
                                       const AffineTransform2D& m, double threshold,
                                       std::vector<double>* residuals = nullptr) {
  std::vector<int> in;
  if (residuals) residuals->clear();
  for (int i = 0; i < static_cast<int>(pairs.size()); ++i) {
    const double e = reprojection_error(m, pairs[i]);
    if (e <= threshold) {
      in.push_back(i);
      if (residuals) residuals->push_back(e);
    }
  }
  return in;
}

}  // namespace detail

/// RANSAC over 3-point minimal samples followed by least-squares refits on the
/// inlier set. Falls back to identity when no reliable model exists.
inline AffineEstimate estimate_affine(const std::vector<PointPair>& pairs,
                                      const RansacParams& params = {}) {
  AffineEstimate est;
  const int n = static_cast<int>(pairs.size());
  if (n < 3) {
    est.fallback = AffineFallback::TooFewPairs;
    return est;
  }
  if (detail::all_collinear(pairs)) {
    est.fallback = AffineFallback::Collinear;
    return est;
  }

  Xorshift64Star rng(params.seed);
  std::vector<int> best;
  std::vector<int> sample(3);
  for (int it = 0; it < params.iterations; ++it) {
    sample[0] = static_cast<int>(rng.below(n));
    do sample[1] = static_cast<int>(rng.below(n)); while (sample[1] == sample[0]);
    do sample[2] = static_cast<int>(rng.below(n)); while (sample[2] == sample[0] || sample[2] == sample[1]);
    const auto& a = pairs[sample[0]].from;
    const auto& b = pairs[sample[1]].from;
    const auto& c = pairs[sample[2]].from;
    const double area2 = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    if (std::abs(area2) < 1e-6) continue;
    AffineTransform2D model;
    if (!detail::fit_affine(pairs, sample, model)) continue;
    auto in = detail::select_inliers(pairs, model, params.inlier_threshold);
    if (in.size() > best.size()) best = std::move(in);
    if (static_cast<int>(best.size()) == n) break;
  }
  if (best.size() < 3) {
    est.fallback = AffineFallback::TooFewInliers;
    return est;
  }

  AffineTransform2D model;
  if (!detail::fit_affine(pairs, best, model)) {
    est.fallback = AffineFallback::Collinear;
    return est;
  }
  std::vector<double> residuals;
  for (int round = 0; round < 3; ++round) {
    auto in = detail::select_inliers(pairs, model, params.inlier_threshold, &residuals);
    if (in.size() < 3) break;
    std::vector<double> sorted = residuals;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double robust =
        std::clamp(3.0 * 1.4826 * sorted[sorted.size() / 2], params.min_refine_threshold,
                   params.inlier_threshold);
    auto tight = detail::select_inliers(pairs, model, robust);
    if (tight.size() >= 3) in = std::move(tight);
    AffineTransform2D refit;
    if (!detail::fit_affine(pairs, in, refit)) break;
    model = refit;
    best = std::move(in);
  }

  est.transform = model;
  est.inliers = static_cast<int>(detail::select_inliers(pairs, model, params.inlier_threshold).size());
  est.inlier_ratio = static_cast<double>(est.inliers) / n;
  return est;
}

/// Equalizes the column norms of the linear part by scaling both axes to the
/// larger one. Translation is kept. Zero-scale input yields identity.
inline AffineTransform2D constrain_scale(const AffineTransform2D& m) {
  const double sx = m.scale_x(), sy = m.scale_y();
  if (!(sx > 0.0) || !(sy > 0.0) || !std::isfinite(sx) || !std::isfinite(sy))
    return AffineTransform2D::identity();
  const double s = std::max(sx, sy);
  AffineTransform2D out = m;
  out.linear.col(0) *= s / sx;
  out.linear.col(1) *= s / sy;
  return out;
}

/// Maps a track state through a scale-constrained camera transform. The
/// aspect component (and its velocity) is never touched.
inline KalmanState apply_to_track(const AffineTransform2D& m, const KalmanState& state) {
  const double s = std::max(m.scale_x(), m.scale_y());
  const Eigen::Matrix2d& a = m.linear;

  KalmanState out = state;
  out.mean.segment<2>(0) = a * state.mean.segment<2>(0) + m.translation;
  out.mean(3) = s * state.mean(3);
  out.mean.segment<2>(4) = a * state.mean.segment<2>(4);
  out.mean(7) = s * state.mean(7);

  StateMatrix t = StateMatrix::Identity();
  t.block<2, 2>(0, 0) = a;
  t(3, 3) = s;
  t.block<2, 2>(4, 4) = a;
  t(7, 7) = s;
  out.covariance = t * state.covariance * t.transpose();
  detail::symmetrize(out.covariance);
  return out;
}

}  // namespace sftrack
