#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <numeric>

#include "sftrack/metrics.hpp"
#include "sftrack/rng.hpp"
#include "sftrack/synthetic.hpp"

using namespace sftrack;

namespace {

/// One GT trajectory (id 1) of `n` frames, moving 3 px per frame.
FrameBoxes single_trajectory(int n) {
  FrameBoxes gt;
  for (int f = 1; f <= n; ++f) gt[f].push_back({1, {10.0 + 3 * f, 20, 30, 40}});
  return gt;
}

FrameBoxes relabel(const FrameBoxes& in, const std::function<int(int frame, int id)>& id_of) {
  FrameBoxes out;
  for (const auto& [f, l] : in)
    for (auto b : l) {
      b.id = id_of(f, b.id);
      out[f].push_back(b);
    }
  return out;
}

/// Exhaustive best identity map: every injection of GT ids into hypothesis
/// ids (or "unmatched") is tried.
long exhaustive_idtp(const FrameBoxes& gt, const FrameBoxes& hyp, double thr) {
  std::set<int> gs, hs;
  for (const auto& [f, l] : gt)
    for (const auto& b : l) gs.insert(b.id);
  for (const auto& [f, l] : hyp)
    for (const auto& b : l) hs.insert(b.id);
  const std::vector<int> g(gs.begin(), gs.end()), h(hs.begin(), hs.end());
  std::map<std::pair<int, int>, long> overlap;
  for (const auto& [f, gl] : gt) {
    if (!hyp.count(f)) continue;
    for (const auto& a : gl)
      for (const auto& b : hyp.at(f))
        if (iou(a.box, b.box) >= thr && iou(a.box, b.box) > 0) ++overlap[{a.id, b.id}];
  }
  long best = 0;
  std::vector<char> used(h.size(), 0);
  std::function<void(std::size_t, long)> go = [&](std::size_t i, long acc) {
    if (i == g.size()) {
      best = std::max(best, acc);
      return;
    }
    go(i + 1, acc);
    for (std::size_t j = 0; j < h.size(); ++j) {
      if (used[j]) continue;
      used[j] = 1;
      auto it = overlap.find({g[i], h[j]});
      go(i + 1, acc + (it == overlap.end() ? 0 : it->second));
      used[j] = 0;
    }
  };
  go(0, 0);
  return best;
}

/// Random GT with up to 5 trajectories and a noisy, fragmented hypothesis.
std::pair<FrameBoxes, FrameBoxes> random_instance(Xorshift64Star& rng) {
  FrameBoxes gt, hyp;
  const int n_traj = 1 + static_cast<int>(rng.below(5));
  const int frames = 3 + static_cast<int>(rng.below(10));
  for (int t = 1; t <= n_traj; ++t) {
    const int start = 1 + static_cast<int>(rng.below(frames));
    const int end = start + static_cast<int>(rng.below(frames - start + 1));
    const double x = rng.uniform(0, 60), y = rng.uniform(0, 60);
    for (int f = start; f <= end; ++f) gt[f].push_back({t, {x + 2 * f, y, 20, 20}});
  }
  const int n_hyp = 1 + static_cast<int>(rng.below(5));
  for (const auto& [f, l] : gt)
    for (const auto& b : l) {
      if (rng.uniform() < 0.2) continue;
      const int id = 1 + static_cast<int>(rng.below(n_hyp));
      auto& list = hyp[f];
      if (std::any_of(list.begin(), list.end(), [&](const TrackedBox& x) { return x.id == id; })) continue;
      const BoundingBox jittered{b.box.left + rng.uniform(-6, 6), b.box.top + rng.uniform(-6, 6), 20, 20};
      list.push_back({id, jittered});
    }
  return {gt, hyp};
}

}  // namespace

TEST(Mota, Examples) {
  EXPECT_DOUBLE_EQ(mota(5, 10, 1, 100), 84.0);
  EXPECT_DOUBLE_EQ(mota(0, 0, 0, 37), 100.0);
  EXPECT_DOUBLE_EQ(mota(60, 60, 0, 100), -20.0);
  EXPECT_THROW(mota(0, 0, 0, 0), InputError);
}

TEST(ClearMatch, PerfectTracking) {
  const auto gt = single_trajectory(10);
  const auto r = clear_match(gt, gt);
  EXPECT_EQ(r.fp, 0);
  EXPECT_EQ(r.fn, 0);
  EXPECT_EQ(r.ids, 0);
  EXPECT_EQ(r.matches, 10);
}

TEST(ClearMatch, EmptyHypothesis) {
  const auto gt = single_trajectory(10);
  const auto r = clear_match(gt, {});
  EXPECT_EQ(r.fn, 10);
  EXPECT_EQ(r.fp, 0);
}

TEST(ClearMatch, SwitchAtFrameSix) {
  const auto gt = single_trajectory(10);
  const auto hyp = relabel(gt, [](int f, int) { return f <= 5 ? 7 : 8; });
  const auto r = clear_match(gt, hyp);
  EXPECT_EQ(r.ids, 1);
  EXPECT_EQ(r.fp, 0);
  EXPECT_EQ(r.fn, 0);
}

TEST(ClearMatch, SwitchBackCountsAgain) {
  const auto gt = single_trajectory(9);
  const auto hyp = relabel(gt, [](int f, int) { return f <= 3 || f > 6 ? 7 : 8; });
  EXPECT_EQ(clear_match(gt, hyp).ids, 2);
}

TEST(ClearMatch, GapWithSameIdIsNoSwitch) {
  const auto gt = single_trajectory(10);
  FrameBoxes hyp = gt;
  hyp.erase(4);
  hyp.erase(5);
  const auto r = clear_match(gt, hyp);
  EXPECT_EQ(r.ids, 0);
  EXPECT_EQ(r.fn, 2);
}

TEST(ClearMatch, KeepsPreviousCorrespondenceOverBetterIou) {
  FrameBoxes gt, hyp;
  gt[1] = {{1, {0, 0, 10, 10}}};
  gt[2] = {{1, {0, 0, 10, 10}}};
  hyp[1] = {{5, {0, 0, 10, 10}}};
  hyp[2] = {{5, {2, 0, 10, 10}}, {6, {0, 0, 10, 10}}};  // 5 still overlaps 8/12
  const auto r = clear_match(gt, hyp);
  EXPECT_EQ(r.ids, 0);
  EXPECT_EQ(r.fp, 1);
  EXPECT_EQ(r.correspondences.at(2), (std::vector<std::pair<int, int>>{{1, 5}}));
}

TEST(ClearMatch, BelowThresholdIsNoMatch) {
  FrameBoxes gt, hyp;
  gt[1] = {{1, {0, 0, 10, 10}}};
  hyp[1] = {{1, {5, 0, 10, 10}}};  // IoU 1/3
  const auto r = clear_match(gt, hyp);
  EXPECT_EQ(r.fp, 1);
  EXPECT_EQ(r.fn, 1);
}

TEST(ClearMatch, DuplicateIdsRejected) {
  FrameBoxes gt;
  gt[1] = {{1, {0, 0, 10, 10}}, {1, {20, 0, 10, 10}}};
  EXPECT_THROW(clear_match(gt, {}), InputError);
}

TEST(Idf1, PerfectAndEmpty) {
  const auto gt = single_trajectory(10);
  EXPECT_DOUBLE_EQ(idf1(gt, gt).idf1, 1.0);
  EXPECT_DOUBLE_EQ(idf1(gt, {}).idf1, 0.0);
}

TEST(Idf1, SplitTrajectoryGivesHalf) {
  const auto gt = single_trajectory(10);
  const auto hyp = relabel(gt, [](int f, int) { return f <= 5 ? 7 : 8; });
  const auto r = idf1(gt, hyp);
  EXPECT_EQ(r.idtp, 5);
  EXPECT_EQ(r.hyp_total, 10);
  EXPECT_DOUBLE_EQ(r.idf1, 0.5);
  EXPECT_EQ(exhaustive_idtp(gt, hyp, 0.5), 5);
}

TEST(Idf1Property, MatchesExhaustiveIdentitySearch) {
  Xorshift64Star rng(404);
  for (int i = 0; i < 500; ++i) {
    const auto [gt, hyp] = random_instance(rng);
    const auto r = idf1(gt, hyp);
    ASSERT_EQ(r.idtp, exhaustive_idtp(gt, hyp, 0.5));
    ASSERT_LE(r.idtp, std::min(r.gt_total, r.hyp_total));
  }
}

TEST(Idf1Property, InvariantUnderHypothesisRelabeling) {
  Xorshift64Star rng(405);
  for (int i = 0; i < 200; ++i) {
    const auto [gt, hyp] = random_instance(rng);
    std::vector<int> perm(5);
    std::iota(perm.begin(), perm.end(), 100);
    for (int j = 4; j > 0; --j) std::swap(perm[j], perm[rng.below(j + 1)]);
    const auto relabeled = relabel(hyp, [&](int, int id) { return perm[id - 1]; });
    ASSERT_EQ(idf1(gt, hyp).idtp, idf1(gt, relabeled).idtp);
  }
}

TEST(MtMl, BoundaryCases) {
  const auto gt = single_trajectory(10);
  auto covered = [&](int n) {
    FrameBoxes hyp;
    for (int f = 1; f <= n; ++f) hyp[f] = gt.at(f);
    return mt_ml(gt, clear_match(gt, hyp).correspondences);
  };
  EXPECT_EQ(covered(10), (std::pair<int, int>{1, 0}));
  EXPECT_EQ(covered(8), (std::pair<int, int>{1, 0}));
  EXPECT_EQ(covered(7), (std::pair<int, int>{0, 0}));
  EXPECT_EQ(covered(2), (std::pair<int, int>{0, 1}));
  EXPECT_EQ(covered(3), (std::pair<int, int>{0, 0}));
  EXPECT_EQ(covered(0), (std::pair<int, int>{0, 1}));
}

TEST(MtMl, CoverageCountsAnyIdentity) {
  const auto gt = single_trajectory(10);
  const auto hyp = relabel(gt, [](int f, int) { return f % 2 ? 7 : 8; });
  EXPECT_EQ(mt_ml(gt, clear_match(gt, hyp).correspondences), (std::pair<int, int>{1, 0}));
}

TEST(Evaluate, IgnoreRegionsAbsorbHypotheses) {
  FrameBoxes gt, hyp;
  gt[1] = {{1, {0, 0, 10, 10}}, {2, {50, 50, 10, 10}, -1, true}};
  hyp[1] = {{1, {0, 0, 10, 10}}, {2, {50, 50, 10, 10}}, {3, {100, 100, 10, 10}}};
  const auto m = evaluate(gt, hyp);
  EXPECT_EQ(m.gt_total, 1);
  EXPECT_EQ(m.fp, 1);  // only the box far from everything
  EXPECT_EQ(m.fn, 0);
}

TEST(Evaluate, PerClassKeepsClassesApart) {
  FrameBoxes gt, hyp;
  gt[1] = {{1, {0, 0, 10, 10}, 1}};
  hyp[1] = {{1, {0, 0, 10, 10}, 2}};
  const auto split = evaluate(gt, hyp);
  EXPECT_EQ(split.fp, 1);
  EXPECT_EQ(split.fn, 1);
  const auto pooled = evaluate(gt, hyp, {0.5, false});
  EXPECT_EQ(pooled.fp, 0);
  EXPECT_EQ(pooled.fn, 0);
  // a class-less hypothesis falls back to pooled matching
  hyp[1][0].class_id = -1;
  EXPECT_EQ(evaluate(gt, hyp).fp, 0);
}

TEST(Evaluate, AggregateSumsCounts) {
  MetricCounts a, b;
  a.fp = 1;
  a.fn = 2;
  a.gt_total = 10;
  a.idtp = 8;
  a.hyp_total = 9;
  b.ids = 1;
  b.gt_total = 10;
  b.idtp = 10;
  b.hyp_total = 10;
  const auto r = aggregate({{"a", a}, {"b", b}});
  EXPECT_EQ(r.gt_total, 20);
  EXPECT_DOUBLE_EQ(r.mota, (1.0 - 4.0 / 20.0) * 100.0);
  EXPECT_DOUBLE_EQ(r.idf1, 36.0 / 39.0);
  EXPECT_EQ(r.per_sequence.size(), 2u);
}

TEST(Evaluate, JsonHasReportFields) {
  const auto gt = single_trajectory(10);
  const auto report = aggregate({{"seq", evaluate(gt, gt)}});
  const auto j = nlohmann::json::parse(to_json(report));
  for (const char* k : {"mota", "idf1", "idf1_percent", "fp", "fn", "ids", "idtp", "gt_total", "mt", "ml"})
    EXPECT_TRUE(j.contains(k)) << k;
  EXPECT_DOUBLE_EQ(j["mota"].get<double>(), 100.0);
  EXPECT_DOUBLE_EQ(j["per_sequence"]["seq"]["idf1"].get<double>(), 1.0);
}

TEST(MetricsProperty, CountInvariants) {
  Xorshift64Star rng(406);
  for (int i = 0; i < 500; ++i) {
    const auto [gt, hyp] = random_instance(rng);
    const auto m = evaluate(gt, hyp);
    ASSERT_LE(m.fn, m.gt_total);
    ASSERT_LE(m.fp, m.hyp_total);
    const auto c = clear_match(gt, hyp);
    ASSERT_LE(c.ids, c.matches);
    ASSERT_LE(m.idtp, std::min(m.gt_total, m.hyp_total));
    ASSERT_DOUBLE_EQ(m.mota, (1.0 - static_cast<double>(m.fp + m.fn + m.ids) / m.gt_total) * 100.0);
  }
}

TEST(MetricsProperty, GroundTruthAgainstItselfOnPresets) {
  for (const auto& name : synth::preset_names()) {
    const synth::SyntheticScene scene(synth::preset(name));
    FrameBoxes gt;
    DetectionsByFrame dets;
    scene.annotate_all(gt, dets);
    const auto m = evaluate(gt, gt);
    EXPECT_DOUBLE_EQ(m.mota, 100.0) << name;
    EXPECT_DOUBLE_EQ(m.idf1, 1.0) << name;
    EXPECT_EQ(m.ids, 0) << name;
    EXPECT_EQ(m.mt, m.gt_trajectories) << name;
    EXPECT_EQ(m.ml, 0) << name;
  }
}
