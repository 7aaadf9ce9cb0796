#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "sftrack/box.hpp"
#include "sftrack/error.hpp"

namespace sftrack {

using StateVector = Eigen::Matrix<double, 8, 1>;
using StateMatrix = Eigen::Matrix<double, 8, 8>;

/// Constant-velocity state over (cx, cy, a, h, vcx, vcy, va, vh).
struct KalmanState {
  StateVector mean = StateVector::Zero();
  StateMatrix covariance = StateMatrix::Identity();

  BoundingBox box() const { return from_cxcyah({mean(0), mean(1), mean(2), mean(3)}); }
};

/// SORT-family noise model: standard deviations scale with box height.
struct KalmanNoise {
  double std_weight_position = 1.0 / 20.0;
  double std_weight_velocity = 1.0 / 160.0;
};

namespace detail {

inline void symmetrize(StateMatrix& p) { p = 0.5 * (p + p.transpose()).eval(); }

inline void require_finite(const BoxMeasurement& m) {
  for (double v : m)
    if (!std::isfinite(v)) throw InputError("kalman: non-finite measurement");
}

}  // namespace detail

inline KalmanState kalman_initiate(const BoxMeasurement& m, const KalmanNoise& noise = {}) {
  detail::require_finite(m);
  if (!(m[3] > 0.0)) throw InputError("kalman: measurement height must be positive");
  KalmanState s;
  s.mean << m[0], m[1], m[2], m[3], 0.0, 0.0, 0.0, 0.0;
  const double h = m[3];
  const double wp = noise.std_weight_position;
  const double wv = noise.std_weight_velocity;
  StateVector std;
  std << 2 * wp * h, 2 * wp * h, 1e-2, 2 * wp * h, 10 * wv * h, 10 * wv * h, 1e-5, 10 * wv * h;
  s.covariance = std.array().square().matrix().asDiagonal();
  return s;
}

inline KalmanState kalman_predict(const KalmanState& in, const KalmanNoise& noise = {}) {
  StateMatrix f = StateMatrix::Identity();
  for (int i = 0; i < 4; ++i) f(i, i + 4) = 1.0;
  const double h = in.mean(3);
  const double wp = noise.std_weight_position;
  const double wv = noise.std_weight_velocity;
  StateVector std;
  std << wp * h, wp * h, 1e-2, wp * h, wv * h, wv * h, 1e-5, wv * h;
  const StateMatrix q = std.array().square().matrix().asDiagonal();

  KalmanState out;
  out.mean = f * in.mean;
  out.covariance = f * in.covariance * f.transpose() + q;
  detail::symmetrize(out.covariance);
  return out;
}

inline KalmanState kalman_update(const KalmanState& in, const BoxMeasurement& m,
                                 const KalmanNoise& noise = {}) {
  detail::require_finite(m);
  using Mat48 = Eigen::Matrix<double, 4, 8>;
  using Mat4 = Eigen::Matrix<double, 4, 4>;
  using Vec4 = Eigen::Matrix<double, 4, 1>;

  Mat48 proj = Mat48::Zero();
  for (int i = 0; i < 4; ++i) proj(i, i) = 1.0;

  const double h = in.mean(3);
  const double wp = noise.std_weight_position;
  Vec4 r_std(wp * h, wp * h, 1e-1, wp * h);
  const Mat4 r = r_std.array().square().matrix().asDiagonal();

  const Vec4 projected_mean = proj * in.mean;
  const Mat4 innovation_cov = proj * in.covariance * proj.transpose() + r;

  Eigen::LLT<Mat4> llt(innovation_cov);
  if (llt.info() != Eigen::Success)
    throw NumericalError("kalman: innovation covariance is not positive definite");

  // gain = P H^T S^-1, computed as (S^-1 H P)^T since S and P are symmetric
  const Eigen::Matrix<double, 8, 4> gain = llt.solve(proj * in.covariance).transpose();
  const Vec4 innovation = Vec4(m[0], m[1], m[2], m[3]) - projected_mean;

  KalmanState out;
  out.mean = in.mean + gain * innovation;
  out.covariance = in.covariance - gain * innovation_cov * gain.transpose();
  detail::symmetrize(out.covariance);
  if (!out.mean.allFinite() || !out.covariance.allFinite())
    throw NumericalError("kalman: update produced non-finite state");
  return out;
}

}  // namespace sftrack
