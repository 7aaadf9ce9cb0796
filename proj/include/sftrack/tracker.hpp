#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sftrack/affine.hpp"
#include "sftrack/appearance.hpp"
#include "sftrack/association.hpp"
#include "sftrack/config.hpp"
#include "sftrack/detection.hpp"
#include "sftrack/error.hpp"
#include "sftrack/kalman.hpp"
#include "sftrack/motion_comp.hpp"

namespace sftrack {

enum class TrackStatus : std::uint8_t { Active, Lost, Removed };

struct Track {
  int track_id = 0;
  int class_id = 0;
  TrackStatus status = TrackStatus::Active;
  KalmanState kalman;
  int last_frame = 0;
  int miss_count = 0;
  AppearanceMemory appearance;
  std::vector<std::pair<int, BoundingBox>> history;
};

struct FrameOutput {
  int track_id = 0;
  int class_id = 0;
  BoundingBox box;
  double score = 0.0;
};

struct FrameDiagnostics {
  int n_high = 0;
  int n_low = 0;
  int n_ignored = 0;  // degenerate or non-finite boxes
  int n_matched_first = 0;
  int n_matched_second = 0;
  int n_new_high = 0;
  int n_new_low = 0;
  int n_removed = 0;
  bool motion_estimated = false;
  AffineTransform2D motion;  // scale-constrained transform applied to tracks
  int embedding_terms_first = 0;
  int aspect_checks = 0;
  int aspect_violations = 0;  // aspect state bits changed by compensation
};

struct FrameResult {
  int frame = 0;
  std::vector<FrameOutput> outputs;  // ascending track_id
  FrameDiagnostics diagnostics;
};

/// Where appearance embeddings come from. `None` disables embeddings in the
/// first association (the plain IoU cascade); the low-confidence initiation
/// filter then falls back to hand-crafted vectors.
class EmbeddingProvider {
 public:
  enum class Kind { None, HandCrafted, Table };

  static EmbeddingProvider none() { return EmbeddingProvider(Kind::None, {}); }
  static EmbeddingProvider hand_crafted() { return EmbeddingProvider(Kind::HandCrafted, {}); }
  /// An empty table falls back to hand-crafted vectors.
  static EmbeddingProvider from_table(EmbeddingTable table) {
    if (table.empty()) return hand_crafted();
    return EmbeddingProvider(Kind::Table, std::move(table));
  }

  Kind kind() const { return kind_; }
  bool enabled() const { return kind_ != Kind::None; }

  /// Embedding for detection `index` (file order) of `frame`. Table rows that
  /// are missing yield std::nullopt, never a hand-crafted vector of another
  /// dimension.
  std::optional<Embedding> get(int frame, int index, const RawImage& crop, int bins) const {
    switch (kind_) {
      case Kind::Table: {
        auto it = table_.find({frame, index});
        if (it == table_.end()) return std::nullopt;
        return it->second;
      }
      case Kind::None:
      case Kind::HandCrafted:
        return handcrafted_embedding(crop, bins);
    }
    return std::nullopt;
  }

 private:
  EmbeddingProvider(Kind k, EmbeddingTable t) : kind_(k), table_(std::move(t)) {}
  Kind kind_;
  EmbeddingTable table_;
};

/// Per-frame association pipeline: confidence split, prediction with camera
/// motion compensation, high-confidence association, low-confidence
/// association, lifecycle update, then track initiation from unmatched high
/// detections and (filtered) unmatched low detections.
class Tracker {
 public:
  explicit Tracker(TrackerConfig config, EmbeddingProvider embeddings = EmbeddingProvider::hand_crafted(),
                   MotionCompParams motion = {}, KalmanNoise noise = {})
      : config_(config), embeddings_(std::move(embeddings)), motion_(motion), noise_(noise) {
    validate(config_);
    motion_.downscale = config_.mc_downscale;
  }

  const TrackerConfig& config() const { return config_; }
  /// Active and Lost tracks.
  const std::vector<Track>& tracks() const { return tracks_; }
  int removed_count() const { return removed_; }
  int next_track_id() const { return next_id_; }

  FrameResult step(int frame_index, const RawImage& image, std::span<const Detection> detections) {
    if (frame_index <= last_frame_)
      throw InputError("tracker: frame index " + std::to_string(frame_index) +
                       " is not after " + std::to_string(last_frame_));
    for (const auto& d : detections)
      if (d.frame != frame_index)
        throw InputError("tracker: detection for frame " + std::to_string(d.frame) +
                         " passed to frame " + std::to_string(frame_index));
    last_frame_ = frame_index;

    FrameResult result;
    result.frame = frame_index;
    auto& diag = result.diagnostics;

    // Confidence split; score == tau goes low.
    std::vector<Prepared> high, low;
    for (int i = 0; i < static_cast<int>(detections.size()); ++i) {
      const auto& d = detections[i];
      if (!d.box.finite() || d.box.degenerate() || !std::isfinite(d.score)) {
        ++diag.n_ignored;
        continue;
      }
      (d.score > config_.tau ? high : low).push_back(prepare(d, i, image));
    }
    diag.n_high = static_cast<int>(high.size());
    diag.n_low = static_cast<int>(low.size());

    for (auto& t : tracks_) t.kalman = kalman_predict(t.kalman, noise_);
    compensate(image, diag);

    // First association: every track against D_high.
    std::vector<int> all_tracks(tracks_.size());
    for (int i = 0; i < static_cast<int>(tracks_.size()); ++i) all_tracks[i] = i;
    StageOptions first{Stage::First, config_.iou_gate_first, embeddings_.enabled(), false};
    auto [m1, rem_tracks, rem_high, terms] =
        associate(all_tracks, high, first, config_.min_fused_sim_first, frame_index, result);
    diag.n_matched_first = m1;
    diag.embedding_terms_first = terms;

    // Second association: remaining tracks against D_low.
    StageOptions second{Stage::Second, config_.iou_gate_second, false, config_.traditional_second_assoc};
    auto [m2, rem_tracks2, rem_low, unused] =
        associate(rem_tracks, low, second, config_.min_fused_sim_second, frame_index, result);
    (void)unused;
    diag.n_matched_second = m2;

    // Tracks unmatched in both stages wait out the grace period.
    for (int ti : rem_tracks2) {
      auto& t = tracks_[ti];
      t.status = TrackStatus::Lost;
      ++t.miss_count;
      if (t.miss_count >= config_.grace_frames) t.status = TrackStatus::Removed;
    }
    const auto removed_now = std::count_if(tracks_.begin(), tracks_.end(),
                                           [](const Track& t) { return t.status == TrackStatus::Removed; });
    diag.n_removed = static_cast<int>(removed_now);
    removed_ += diag.n_removed;
    std::erase_if(tracks_, [](const Track& t) { return t.status == TrackStatus::Removed; });

    for (int di : rem_high) {
      initiate(high[di], frame_index, result);
      ++diag.n_new_high;
    }

    if (config_.low_init_enabled) {
      for (int di : rem_low) {
        if (!passes_low_filter(low[di], high)) continue;
        initiate(low[di], frame_index, result);
        ++diag.n_new_low;
      }
    }

    std::sort(result.outputs.begin(), result.outputs.end(),
              [](const FrameOutput& a, const FrameOutput& b) { return a.track_id < b.track_id; });
    return result;
  }

 private:
  struct Prepared {
    const Detection* det = nullptr;
    ColorHistogram histogram;
    RawImage patch;
    std::optional<Embedding> embedding;         // provider output (or none)
    std::optional<Embedding> filter_embedding;  // used by the low-init filter
  };

  struct StageOutcome {
    int matched = 0;
    std::vector<int> unmatched_tracks;
    std::vector<int> unmatched_detections;
    int embedding_terms = 0;
  };

  Prepared prepare(const Detection& d, int index, const RawImage& image) const {
    Prepared p;
    p.det = &d;
    Crop crop;
    if (!image.empty()) crop = extract_crop(image, d.box);
    p.histogram = color_histogram(crop.pixels, config_.hist_bins_per_channel);
    p.patch = make_patch(crop.pixels, config_.mse_patch_size);
    if (d.embedding) {
      p.embedding = d.embedding;
      p.filter_embedding = d.embedding;
    } else {
      auto e = embeddings_.get(d.frame, index, crop.pixels, config_.hist_bins_per_channel);
      if (embeddings_.enabled()) p.embedding = e;
      p.filter_embedding = std::move(e);
    }
    return p;
  }

  void compensate(const RawImage& image, FrameDiagnostics& diag) {
    if (!config_.mc_enabled || image.empty()) {
      prev_gray_ = GrayImage{};
      return;
    }
    GrayImage cur = downscale(to_gray(image), motion_.downscale);
    if (!prev_gray_.empty() && prev_gray_.width == cur.width && prev_gray_.height == cur.height &&
        !tracks_.empty()) {
      const auto est = estimate_camera_motion(prev_gray_, cur, motion_);
      diag.motion_estimated = true;
      diag.motion = est.constrained;
      for (auto& t : tracks_) {
        const auto before = std::bit_cast<std::uint64_t>(t.kalman.mean(2));
        t.kalman = apply_to_track(est.constrained, t.kalman);
        ++diag.aspect_checks;
        if (std::bit_cast<std::uint64_t>(t.kalman.mean(2)) != before) ++diag.aspect_violations;
      }
    }
    prev_gray_ = std::move(cur);
  }

  StageOutcome associate(const std::vector<int>& track_idx, const std::vector<Prepared>& dets,
                         const StageOptions& opt, double min_sim, int frame, FrameResult& result) {
    StageOutcome out;
    std::vector<AssociationCandidate> tc, dc;
    tc.reserve(track_idx.size());
    for (int ti : track_idx) {
      const auto& t = tracks_[ti];
      tc.push_back({t.kalman.box(), t.class_id,
                    {&t.appearance.histogram, &t.appearance.patch,
                     t.appearance.embedding ? &*t.appearance.embedding : nullptr}});
    }
    dc.reserve(dets.size());
    for (const auto& d : dets)
      dc.push_back({d.det->box, d.det->class_id,
                    {&d.histogram, &d.patch, d.embedding ? &*d.embedding : nullptr}});

    const auto sm = build_stage_matrix(tc, dc, opt);
    out.embedding_terms = sm.embedding_terms;
    const auto asg = hungarian(sm.cost, min_sim);
    for (auto [r, c] : asg.matches) {
      apply_match(tracks_[track_idx[r]], dets[c], frame, result);
      ++out.matched;
    }
    for (int r : asg.unmatched_rows) out.unmatched_tracks.push_back(track_idx[r]);
    out.unmatched_detections = asg.unmatched_cols;
    return out;
  }

  void apply_match(Track& t, const Prepared& d, int frame, FrameResult& result) {
    t.kalman = kalman_update(t.kalman, to_cxcyah(d.det->box), noise_);
    t.status = TrackStatus::Active;
    t.miss_count = 0;
    t.last_frame = frame;
    t.appearance.update(d.histogram, d.patch, d.embedding, config_.embedding_ema_momentum);
    t.history.emplace_back(frame, d.det->box);
    result.outputs.push_back({t.track_id, t.class_id, d.det->box, d.det->score});
  }

  void initiate(const Prepared& d, int frame, FrameResult& result) {
    Track t;
    t.track_id = next_id_++;
    t.class_id = d.det->class_id;
    t.kalman = kalman_initiate(to_cxcyah(d.det->box), noise_);
    t.last_frame = frame;
    t.appearance.update(d.histogram, d.patch, d.embedding, config_.embedding_ema_momentum);
    t.history.emplace_back(frame, d.det->box);
    result.outputs.push_back({t.track_id, t.class_id, d.det->box, d.det->score});
    tracks_.push_back(std::move(t));
  }

  /// Best embedding similarity against same-class high detections of this
  /// frame must exceed rho. With no same-class high detection in the frame
  /// there is no reference to compare against and the detection passes.
  bool passes_low_filter(const Prepared& d, const std::vector<Prepared>& high) const {
    bool has_reference = false;
    double best = 0.0;
    for (const auto& h : high) {
      if (h.det->class_id != d.det->class_id) continue;
      has_reference = true;
      if (d.filter_embedding && h.filter_embedding && d.filter_embedding->size() == h.filter_embedding->size())
        best = std::max(best, embedding_similarity(*d.filter_embedding, *h.filter_embedding));
    }
    if (!has_reference) return true;
    return best > config_.rho;
  }

  TrackerConfig config_;
  EmbeddingProvider embeddings_;
  MotionCompParams motion_;
  KalmanNoise noise_;
  std::vector<Track> tracks_;
  GrayImage prev_gray_;
  int next_id_ = 1;
  int last_frame_ = 0;
  int removed_ = 0;
};

/// Frames 1..frame_count, loaded on demand.
struct FrameSource {
  int frame_count = 0;
  std::function<RawImage(int)> load;
};

using DetectionsByFrame = std::map<int, std::vector<Detection>>;

/// Runs the tracker over every frame of the source in order.
inline std::vector<FrameResult> run_sequence(const FrameSource& frames, const DetectionsByFrame& detections,
                                             const TrackerConfig& config,
                                             EmbeddingProvider embeddings = EmbeddingProvider::hand_crafted(),
                                             const MotionCompParams& motion = {}) {
  for (const auto& [f, dets] : detections)
    if (!dets.empty() && (f < 1 || f > frames.frame_count))
      throw InputError("run_sequence: detections reference frame " + std::to_string(f) +
                       " but the sequence has " + std::to_string(frames.frame_count) + " frames");
  Tracker tracker(config, std::move(embeddings), motion);
  std::vector<FrameResult> out;
  out.reserve(frames.frame_count);
  static const std::vector<Detection> kNone;
  for (int f = 1; f <= frames.frame_count; ++f) {
    auto it = detections.find(f);
    const auto& dets = it == detections.end() ? kNone : it->second;
    const bool need_image = config.mc_enabled || !dets.empty();
    const RawImage image = need_image && frames.load ? frames.load(f) : RawImage{};
    out.push_back(tracker.step(f, image, dets));
  }
  return out;
}

}  // namespace sftrack
