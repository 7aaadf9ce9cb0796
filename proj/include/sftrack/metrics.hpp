#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sftrack/box.hpp"
#include "sftrack/error.hpp"
#include "sftrack/hungarian.hpp"

namespace sftrack {

/// One labelled box of a ground-truth or hypothesis trajectory.
struct TrackedBox {
  int id = 0;
  BoundingBox box;
  int class_id = -1;    // -1: unknown
  bool ignore = false;  // ground-truth ignore region
};

using FrameBoxes = std::map<int, std::vector<TrackedBox>>;

struct ClearResult {
  long fp = 0;
  long fn = 0;
  long ids = 0;
  long matches = 0;
  long gt_total = 0;
  long hyp_total = 0;
  /// frame -> (gt id, hypothesis id)
  std::map<int, std::vector<std::pair<int, int>>> correspondences;
};

struct IdentityResult {
  long idtp = 0;
  long gt_total = 0;
  long hyp_total = 0;
  double idf1 = 0.0;
};

namespace detail {

inline void check_unique_ids(const FrameBoxes& boxes, const char* what) {
  for (const auto& [frame, list] : boxes) {
    std::set<int> seen;
    for (const auto& b : list)
      if (!seen.insert(b.id).second)
        throw InputError(std::string(what) + ": duplicate id " + std::to_string(b.id) + " in frame " +
                         std::to_string(frame));
  }
}

/// Min-cost (1 - IoU) matching of the listed boxes with IoU below threshold
/// forbidden.
inline std::vector<std::pair<int, int>> iou_matching(const std::vector<const TrackedBox*>& g,
                                                     const std::vector<const TrackedBox*>& h,
                                                     double threshold) {
  CostMatrix cost(static_cast<int>(g.size()), static_cast<int>(h.size()), kForbidden);
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < h.size(); ++j) {
      const double v = iou(g[i]->box, h[j]->box);
      if (v >= threshold && v > 0.0) cost(static_cast<int>(i), static_cast<int>(j)) = 1.0 - v;
    }
  return hungarian(cost).matches;
}

}  // namespace detail

/// CLEAR-MOT correspondence: previous-frame pairs are kept while their IoU
/// stays above threshold, the rest are matched by Hungarian on IoU; a GT
/// object matched to a different hypothesis id than its last match counts
/// one identity switch.
inline ClearResult clear_match(const FrameBoxes& gt, const FrameBoxes& hyp, double iou_threshold = 0.5) {
  detail::check_unique_ids(gt, "ground truth");
  detail::check_unique_ids(hyp, "hypothesis");
  ClearResult res;
  std::set<int> frames;
  for (const auto& [f, _] : gt) frames.insert(f);
  for (const auto& [f, _] : hyp) frames.insert(f);

  static const std::vector<TrackedBox> kEmpty;
  std::map<int, int> last_match;  // gt id -> hyp id
  std::map<int, int> previous;    // correspondences of the previous frame
  for (int f : frames) {
    const auto git = gt.find(f);
    const auto hit = hyp.find(f);
    const auto& gl = git == gt.end() ? kEmpty : git->second;
    const auto& hl = hit == hyp.end() ? kEmpty : hit->second;

    std::map<int, const TrackedBox*> gmap, hmap;
    for (const auto& b : gl) gmap[b.id] = &b;
    for (const auto& b : hl) hmap[b.id] = &b;

    std::map<int, int> current;
    std::set<int> used_h;
    for (auto [gid, hid] : previous) {
      auto gi = gmap.find(gid);
      auto hi = hmap.find(hid);
      if (gi == gmap.end() || hi == hmap.end()) continue;
      const double v = iou(gi->second->box, hi->second->box);
      if (v >= iou_threshold && v > 0.0) {
        current[gid] = hid;
        used_h.insert(hid);
      }
    }
    std::vector<const TrackedBox*> gfree, hfree;
    for (const auto& [gid, b] : gmap)
      if (!current.count(gid)) gfree.push_back(b);
    for (const auto& [hid, b] : hmap)
      if (!used_h.count(hid)) hfree.push_back(b);
    for (auto [i, j] : detail::iou_matching(gfree, hfree, iou_threshold)) {
      const int gid = gfree[i]->id, hid = hfree[j]->id;
      auto lm = last_match.find(gid);
      if (lm != last_match.end() && lm->second != hid) ++res.ids;
      current[gid] = hid;
    }
    for (auto [gid, hid] : current) last_match[gid] = hid;

    const long m = static_cast<long>(current.size());
    res.matches += m;
    res.gt_total += static_cast<long>(gl.size());
    res.hyp_total += static_cast<long>(hl.size());
    res.fn += static_cast<long>(gl.size()) - m;
    res.fp += static_cast<long>(hl.size()) - m;
    if (!current.empty()) {
      auto& corr = res.correspondences[f];
      for (auto [gid, hid] : current) corr.emplace_back(gid, hid);
    }
    previous = std::move(current);
  }
  return res;
}

/// Multiple object tracking accuracy as a percentage; may be negative.
inline double mota(long fp, long fn, long ids, long gt_total) {
  if (gt_total <= 0) throw InputError("mota: no ground-truth objects");
  return (1.0 - static_cast<double>(fp + fn + ids) / static_cast<double>(gt_total)) * 100.0;
}

/// Per (gt id, hyp id) count of frames where both exist with IoU >= threshold.
inline std::map<std::pair<int, int>, long> identity_overlaps(const FrameBoxes& gt, const FrameBoxes& hyp,
                                                             double iou_threshold) {
  std::map<std::pair<int, int>, long> overlap;
  for (const auto& [f, gl] : gt) {
    auto hit = hyp.find(f);
    if (hit == hyp.end()) continue;
    for (const auto& g : gl)
      for (const auto& h : hit->second) {
        const double v = iou(g.box, h.box);
        if (v >= iou_threshold && v > 0.0) ++overlap[{g.id, h.id}];
      }
  }
  return overlap;
}

/// Identity F1: IDTP is the largest total overlap over one-to-one maps between
/// GT and hypothesis trajectories, found by Hungarian on integer overlaps.
inline IdentityResult idf1(const FrameBoxes& gt, const FrameBoxes& hyp, double iou_threshold = 0.5) {
  detail::check_unique_ids(gt, "ground truth");
  detail::check_unique_ids(hyp, "hypothesis");
  IdentityResult res;
  std::set<int> gids, hids;
  for (const auto& [f, l] : gt) {
    res.gt_total += static_cast<long>(l.size());
    for (const auto& b : l) gids.insert(b.id);
  }
  for (const auto& [f, l] : hyp) {
    res.hyp_total += static_cast<long>(l.size());
    for (const auto& b : l) hids.insert(b.id);
  }
  const auto overlap = identity_overlaps(gt, hyp, iou_threshold);
  if (!overlap.empty()) {
    const std::vector<int> gv(gids.begin(), gids.end()), hv(hids.begin(), hids.end());
    std::map<int, int> gpos, hpos;
    for (int i = 0; i < static_cast<int>(gv.size()); ++i) gpos[gv[i]] = i;
    for (int j = 0; j < static_cast<int>(hv.size()); ++j) hpos[hv[j]] = j;
    const int rows = static_cast<int>(gv.size()), cols = static_cast<int>(hv.size());
    std::vector<long> cost(static_cast<std::size_t>(rows) * cols, 0);
    for (const auto& [key, n] : overlap) cost[static_cast<std::size_t>(gpos[key.first]) * cols + hpos[key.second]] = -n;
    const auto assign = solve_min_cost(cost, rows, cols);
    for (int r = 0; r < rows; ++r)
      if (assign[r] >= 0) res.idtp -= cost[static_cast<std::size_t>(r) * cols + assign[r]];
  }
  const long denom = res.gt_total + res.hyp_total;
  res.idf1 = denom > 0 ? 2.0 * static_cast<double>(res.idtp) / static_cast<double>(denom) : 0.0;
  return res;
}

/// Mostly tracked (coverage >= 0.8) and mostly lost (coverage <= 0.2) GT
/// trajectories; coverage counts matches of any identity.
inline std::pair<int, int> mt_ml(const FrameBoxes& gt,
                                 const std::map<int, std::vector<std::pair<int, int>>>& correspondences) {
  std::map<int, long> life, covered;
  for (const auto& [f, l] : gt)
    for (const auto& b : l) ++life[b.id];
  for (const auto& [f, l] : correspondences)
    for (const auto& [gid, hid] : l) ++covered[gid];
  int mt = 0, ml = 0;
  for (const auto& [gid, n] : life) {
    const long c = covered.count(gid) ? covered[gid] : 0;
    // integer comparison keeps the 80%/20% boundaries exact
    if (5 * c >= 4 * n) ++mt;
    if (5 * c <= n) ++ml;
  }
  return {mt, ml};
}

struct MetricCounts {
  double mota = 0.0;  // percent
  double idf1 = 0.0;  // fraction
  long fp = 0;
  long fn = 0;
  long ids = 0;
  long idtp = 0;
  long gt_total = 0;
  long hyp_total = 0;
  int mt = 0;
  int ml = 0;
  int gt_trajectories = 0;

  /// Recomputes mota and idf1 from the counts.
  void finalize() {
    mota = gt_total > 0 ? sftrack::mota(fp, fn, ids, gt_total) : 0.0;
    const long denom = gt_total + hyp_total;
    idf1 = denom > 0 ? 2.0 * static_cast<double>(idtp) / static_cast<double>(denom) : 0.0;
  }

  MetricCounts& operator+=(const MetricCounts& o) {
    fp += o.fp;
    fn += o.fn;
    ids += o.ids;
    idtp += o.idtp;
    gt_total += o.gt_total;
    hyp_total += o.hyp_total;
    mt += o.mt;
    ml += o.ml;
    gt_trajectories += o.gt_trajectories;
    finalize();
    return *this;
  }
};

struct MetricsReport : MetricCounts {
  std::map<std::string, MetricCounts> per_sequence;
};

struct EvalOptions {
  double iou_threshold = 0.5;
  /// Evaluate each class separately and sum the counts. Only applies when
  /// every hypothesis box carries a class.
  bool per_class = true;
};

namespace detail {

/// Removes ignore-region GT, and hypotheses that only explain an ignore region.
inline std::pair<FrameBoxes, FrameBoxes> strip_ignored(const FrameBoxes& gt, const FrameBoxes& hyp,
                                                      double threshold) {
  FrameBoxes g_out, h_out;
  for (const auto& [f, l] : gt)
    for (const auto& b : l)
      if (!b.ignore) g_out[f].push_back(b);
  for (const auto& [f, hl] : hyp) {
    auto git = gt.find(f);
    std::vector<const TrackedBox*> ignored, kept_gt;
    if (git != gt.end())
      for (const auto& b : git->second) (b.ignore ? ignored : kept_gt).push_back(&b);
    if (ignored.empty()) {
      h_out[f] = hl;
      continue;
    }
    std::vector<const TrackedBox*> hp;
    for (const auto& b : hl) hp.push_back(&b);
    std::vector<char> matched(hl.size(), 0);
    for (auto [i, j] : iou_matching(kept_gt, hp, threshold)) matched[j] = 1;
    for (std::size_t j = 0; j < hl.size(); ++j) {
      bool drop = false;
      if (!matched[j])
        for (const auto* ig : ignored)
          if (iou(ig->box, hl[j].box) >= threshold) drop = true;
      if (!drop) h_out[f].push_back(hl[j]);
    }
  }
  return {std::move(g_out), std::move(h_out)};
}

inline MetricCounts evaluate_pooled(const FrameBoxes& gt, const FrameBoxes& hyp, double threshold) {
  MetricCounts m;
  const auto clear = clear_match(gt, hyp, threshold);
  const auto id = idf1(gt, hyp, threshold);
  const auto [mt, ml] = mt_ml(gt, clear.correspondences);
  std::set<int> traj;
  for (const auto& [f, l] : gt)
    for (const auto& b : l) traj.insert(b.id);
  m.fp = clear.fp;
  m.fn = clear.fn;
  m.ids = clear.ids;
  m.idtp = id.idtp;
  m.gt_total = clear.gt_total;
  m.hyp_total = clear.hyp_total;
  m.mt = mt;
  m.ml = ml;
  m.gt_trajectories = static_cast<int>(traj.size());
  m.finalize();
  return m;
}

}  // namespace detail

/// Full evaluation of one sequence.
inline MetricCounts evaluate(const FrameBoxes& gt_in, const FrameBoxes& hyp_in, const EvalOptions& opt = {}) {
  const auto [gt, hyp] = detail::strip_ignored(gt_in, hyp_in, opt.iou_threshold);
  bool hyp_has_class = true;
  for (const auto& [f, l] : hyp)
    for (const auto& b : l)
      if (b.class_id < 0) hyp_has_class = false;
  if (!opt.per_class || !hyp_has_class) return detail::evaluate_pooled(gt, hyp, opt.iou_threshold);

  std::set<int> classes;
  for (const auto* side : {&gt, &hyp})
    for (const auto& [f, l] : *side)
      for (const auto& b : l) classes.insert(b.class_id);
  MetricCounts total;
  for (int cls : classes) {
    FrameBoxes g, h;
    for (const auto& [f, l] : gt)
      for (const auto& b : l)
        if (b.class_id == cls) g[f].push_back(b);
    for (const auto& [f, l] : hyp)
      for (const auto& b : l)
        if (b.class_id == cls) h[f].push_back(b);
    total += detail::evaluate_pooled(g, h, opt.iou_threshold);
  }
  total.finalize();
  return total;
}

inline MetricsReport aggregate(const std::map<std::string, MetricCounts>& per_sequence) {
  MetricsReport r;
  for (const auto& [name, m] : per_sequence) static_cast<MetricCounts&>(r) += m;
  r.finalize();
  r.per_sequence = per_sequence;
  return r;
}

inline nlohmann::ordered_json counts_to_json(const MetricCounts& m) {
  nlohmann::ordered_json j;
  j["mota"] = m.mota;
  j["idf1"] = m.idf1;
  j["idf1_percent"] = m.idf1 * 100.0;
  j["fp"] = m.fp;
  j["fn"] = m.fn;
  j["ids"] = m.ids;
  j["idtp"] = m.idtp;
  j["gt_total"] = m.gt_total;
  j["computed_total"] = m.hyp_total;
  j["mt"] = m.mt;
  j["ml"] = m.ml;
  j["gt_trajectories"] = m.gt_trajectories;
  return j;
}

inline std::string to_json(const MetricsReport& r) {
  auto j = counts_to_json(r);
  nlohmann::ordered_json per = nlohmann::ordered_json::object();
  for (const auto& [name, m] : r.per_sequence) per[name] = counts_to_json(m);
  j["per_sequence"] = per;
  return j.dump(2) + "\n";
}

inline std::string format_table(const MetricsReport& r) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof(line), "%-20s %8s %8s %7s %7s %6s %5s %5s\n", "sequence", "MOTA", "IDF1", "FP",
                "FN", "IDs", "MT", "ML");
  os << line;
  auto row = [&](const std::string& name, const MetricCounts& m) {
    std::snprintf(line, sizeof(line), "%-20s %8.2f %8.2f %7ld %7ld %6ld %5d %5d\n", name.c_str(), m.mota,
                  m.idf1 * 100.0, m.fp, m.fn, m.ids, m.mt, m.ml);
    os << line;
  };
  for (const auto& [name, m] : r.per_sequence) row(name, m);
  if (r.per_sequence.size() != 1) row("OVERALL", r);
  return os.str();
}

}  // namespace sftrack
