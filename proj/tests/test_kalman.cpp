#include <gtest/gtest.h>

#include <cmath>

#include "sftrack/kalman.hpp"
#include "sftrack/rng.hpp"

using namespace sftrack;

namespace {

double asymmetry(const StateMatrix& p) { return (p - p.transpose()).cwiseAbs().maxCoeff(); }

}  // namespace

TEST(KalmanInitiate, ZeroVelocityMean) {
  const auto s = kalman_initiate({5, 10, 0.5, 20});
  StateVector expected;
  expected << 5, 10, 0.5, 20, 0, 0, 0, 0;
  EXPECT_EQ(s.mean, expected);
  for (int i = 0; i < 8; ++i) EXPECT_GT(s.covariance(i, i), 0.0);
  EXPECT_EQ(asymmetry(s.covariance), 0.0);
}

TEST(KalmanInitiate, RejectsInvalidMeasurement) {
  EXPECT_THROW(kalman_initiate({0, 0, 1, 0}), InputError);
  EXPECT_THROW(kalman_initiate({NAN, 0, 1, 10}), InputError);
  EXPECT_THROW(kalman_initiate({0, INFINITY, 1, 10}), InputError);
}

TEST(KalmanPredict, ZeroVelocityKeepsPosition) {
  const auto s = kalman_predict(kalman_initiate({5, 10, 0.5, 20}));
  EXPECT_DOUBLE_EQ(s.mean(0), 5);
  EXPECT_DOUBLE_EQ(s.mean(1), 10);
  EXPECT_DOUBLE_EQ(s.mean(2), 0.5);
  EXPECT_DOUBLE_EQ(s.mean(3), 20);
}

TEST(KalmanPredict, IntegratesUnitTimeVelocity) {
  KalmanState s;
  s.mean << 0, 0, 1, 10, 5, 0, 0, 0;
  EXPECT_DOUBLE_EQ(kalman_predict(s).mean(0), 5.0);
}

TEST(KalmanPredict, TraceIncreases) {
  auto s = kalman_initiate({50, 60, 0.7, 30});
  for (int i = 0; i < 20; ++i) {
    const auto next = kalman_predict(s);
    ASSERT_GT(next.covariance.trace(), s.covariance.trace());
    s = next;
  }
}

TEST(KalmanPredict, ConstantVelocityTrackConverges) {
  // cx advances 5 px per frame; one-step prediction after 20 updates
  auto s = kalman_initiate({0, 50, 0.5, 40});
  for (int k = 1; k <= 20; ++k) s = kalman_update(kalman_predict(s), {5.0 * k, 50, 0.5, 40});
  const auto pred = kalman_predict(s);
  EXPECT_LT(std::abs(pred.mean(0) - 5.0 * 21), 0.5);
}

TEST(KalmanUpdate, ZeroInnovationLeavesMean) {
  const auto prior = kalman_predict(kalman_initiate({12, 34, 0.6, 25}));
  const auto post =
      kalman_update(prior, {prior.mean(0), prior.mean(1), prior.mean(2), prior.mean(3)});
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(post.mean(i), prior.mean(i), 1e-12);
}

TEST(KalmanUpdate, FixedMeasurementIsTheFixedPoint) {
  auto s = kalman_initiate({0, 0, 1, 20});
  const BoxMeasurement z{30, -12, 1, 20};
  for (int i = 0; i < 200; ++i) s = kalman_update(kalman_predict(s), z);
  EXPECT_LT(std::abs(s.mean(0) - z[0]), 1e-3);
  EXPECT_LT(std::abs(s.mean(1) - z[1]), 1e-3);
}

TEST(KalmanUpdate, PosteriorVarianceShrinks) {
  const auto prior = kalman_predict(kalman_initiate({10, 10, 1, 20}));
  const auto post = kalman_update(prior, {11, 9, 1, 20});
  for (int i = 0; i < 4; ++i) EXPECT_LT(post.covariance(i, i), prior.covariance(i, i));
}

TEST(KalmanUpdate, SingularInnovationSignalsError) {
  KalmanState s;
  s.mean << 0, 0, 1, 0, 0, 0, 0, 0;  // zero height removes measurement noise on position
  s.covariance = StateMatrix::Zero();
  s.covariance(2, 2) = -1.0;  // makes the aspect innovation variance non-positive
  EXPECT_THROW(kalman_update(s, {0, 0, 1, 1}), NumericalError);
}

TEST(KalmanProperty, CovarianceSymmetryOverRandomCycles) {
  Xorshift64Star rng(2024);
  auto s = kalman_initiate({100, 100, 0.5, 40});
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    s = kalman_predict(s);
    worst = std::max(worst, asymmetry(s.covariance));
    const BoxMeasurement z{s.mean(0) + rng.uniform(-3, 3), s.mean(1) + rng.uniform(-3, 3),
                           std::max(0.1, s.mean(2) + rng.uniform(-0.02, 0.02)),
                           std::max(5.0, s.mean(3) + rng.uniform(-1, 1))};
    s = kalman_update(s, z);
    worst = std::max(worst, asymmetry(s.covariance));
    for (int d = 0; d < 8; ++d) ASSERT_GE(s.covariance(d, d), 0.0);
    ASSERT_GT(s.mean(2), 0.0);
    ASSERT_GT(s.mean(3), 0.0);
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(KalmanProperty, NoiselessTrackAfterBurnIn) {
  // vx = 3.5, vy = -2 px/frame; error measured on every prediction after 10 frames
  auto s = kalman_initiate({200, 300, 0.8, 40});
  double worst = 0.0;
  for (int k = 1; k <= 60; ++k) {
    s = kalman_predict(s);
    const double cx = 200 + 3.5 * k, cy = 300 - 2.0 * k;
    if (k > 10) worst = std::max(worst, std::hypot(s.mean(0) - cx, s.mean(1) - cy));
    s = kalman_update(s, {cx, cy, 0.8, 40});
  }
  EXPECT_LT(worst, 0.5);
}
