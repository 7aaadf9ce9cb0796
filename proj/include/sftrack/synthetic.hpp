#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sftrack/affine.hpp"
#include "sftrack/config.hpp"
#include "sftrack/detection.hpp"
#include "sftrack/error.hpp"
#include "sftrack/image.hpp"
#include "sftrack/io.hpp"
#include "sftrack/keyvalue.hpp"
#include "sftrack/metrics.hpp"
#include "sftrack/ppm.hpp"
#include "sftrack/rng.hpp"
#include "sftrack/tracker.hpp"

namespace sftrack::synth {

enum class MotionPath { Linear, Sinusoidal };

/// A textured rectangle moving in world coordinates (world == image
/// coordinates of frame 1).
struct ObjectSpec {
  int class_id = 4;
  double width = 20.0;  // px at camera zoom 1
  double height = 20.0;
  double x = 0.0;  // world center at frame 1
  double y = 0.0;
  MotionPath motion = MotionPath::Linear;
  double vx = 0.0;  // px/frame drift (both paths)
  double vy = 0.0;
  double amp_x = 0.0;  // sinusoidal offset amplitude
  double amp_y = 0.0;
  double period = 50.0;  // frames
  double phase = 0.0;    // radians
  std::array<int, 3> color{200, 60, 60};
  int first_frame = 1;
  int last_frame = 0;  // 0: until the end

  bool is_static() const {
    return vx == 0.0 && vy == 0.0 && (motion == MotionPath::Linear || (amp_x == 0.0 && amp_y == 0.0));
  }
};

/// Camera motion between frame-1 and frame: zoom factor, rotation and a
/// translation of the view in world pixels.
struct CameraStep {
  int frame = 2;
  double scale = 1.0;
  double rotation_deg = 0.0;
  double tx = 0.0;
  double ty = 0.0;
};

struct NoiseModel {
  bool enabled = false;  // disabled: detections equal GT, confidence 1
  double position_jitter = 0.0;  // std, px
  double size_jitter = 0.0;      // std, fraction of size
  // Confidence curve: conf_low up to knee_area, linear up to conf_high at 4 * knee_area.
  double conf_low = 0.5;
  double conf_high = 0.9;
  double knee_area = 400.0;
  double conf_noise = 0.0;  // std, truncated at +-2 std
  double occlusion_penalty = 0.4;  // times occluded fraction
  double score_min = 0.05;
  double score_max = 1.0;
  double dropout = 0.0;
  double occlusion_dropout = 0.75;  // occluded fraction above which nothing is detected
  double fp_rate = 0.0;  // false positives per frame
  double fp_score_min = 0.1;
  double fp_score_max = 0.5;
  double fp_size_min = 10.0;
  double fp_size_max = 30.0;
};

struct ScenarioSpec {
  std::string name = "scenario";
  std::uint64_t seed = 0;
  int frames = 100;
  int width = 640;
  int height = 480;
  double frame_rate = 30.0;
  /// Horizontal world-space band drawn over objects; height 0 disables it.
  double occluder_top = 0.0;
  double occluder_height = 0.0;
  std::vector<ObjectSpec> objects;
  std::vector<CameraStep> camera;
  NoiseModel noise;
};

/// Confidence before occlusion penalty and noise.
inline double base_confidence(const NoiseModel& n, double area) {
  if (area <= n.knee_area) return n.conf_low;
  const double t = std::min(1.0, (area - n.knee_area) / (3.0 * n.knee_area));
  return n.conf_low + t * (n.conf_high - n.conf_low);
}

struct GroundTruthRow {
  int id = 0;
  int class_id = 0;
  BoundingBox box;        // clipped to the image
  BoundingBox full_box;   // unclipped
  bool ignore = false;    // visible fraction below 10%
  int truncation = 0;
  int occlusion = 0;      // 0: none, 1: partial, 2: heavy
  double occluded_fraction = 0.0;
  bool is_static = false;
};

struct FrameAnnotation {
  int frame = 0;
  std::vector<GroundTruthRow> ground_truth;
  std::vector<Detection> detections;
};

namespace detail {

inline double lattice(std::uint64_t seed, long ix, long iy) {
  const std::uint64_t h = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(ix) * 0x8CB92BA72F3D8DD7ULL ^
                                                       static_cast<std::uint64_t>(iy) * 0x9E3779B185EBCA87ULL));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

inline double value_noise(std::uint64_t seed, double x, double y, double cell) {
  const double fx = x / cell, fy = y / cell;
  const double x0 = std::floor(fx), y0 = std::floor(fy);
  double tx = fx - x0, ty = fy - y0;
  tx = tx * tx * (3 - 2 * tx);
  ty = ty * ty * (3 - 2 * ty);
  const long ix = static_cast<long>(x0), iy = static_cast<long>(y0);
  const double a = lattice(seed, ix, iy), b = lattice(seed, ix + 1, iy);
  const double c = lattice(seed, ix, iy + 1), d = lattice(seed, ix + 1, iy + 1);
  return (1 - ty) * ((1 - tx) * a + tx * b) + ty * ((1 - tx) * c + tx * d);
}

}  // namespace detail

/// Deterministic scene: camera poses are accumulated once, every frame is
/// rendered and annotated independently from (seed, frame index).
class SyntheticScene {
 public:
  explicit SyntheticScene(ScenarioSpec spec) : spec_(std::move(spec)) {
    if (spec_.frames < 1 || spec_.width < 16 || spec_.height < 16)
      throw InputError("scenario: frames >= 1 and image size >= 16 required");
    poses_.resize(spec_.frames + 1);
    poses_[1] = Pose{};
    for (int k = 2; k <= spec_.frames; ++k) {
      Pose p = poses_[k - 1];
      for (const auto& step : spec_.camera)
        if (step.frame == k) {
          if (!(step.scale > 0.0)) throw InputError("scenario: camera scale must be positive");
          p.scale *= step.scale;
          p.rotation += step.rotation_deg * std::numbers::pi / 180.0;
          p.tx += step.tx;
          p.ty += step.ty;
        }
      poses_[k] = p;
    }
  }

  const ScenarioSpec& spec() const { return spec_; }

  /// image = c + s R(-theta) (world - c - T), c the image center.
  AffineTransform2D world_to_image(int frame) const {
    const Pose& p = pose(frame);
    const auto lin = AffineTransform2D::similarity(p.scale, -p.rotation, 0, 0).linear;
    const Eigen::Vector2d c(0.5 * spec_.width, 0.5 * spec_.height);
    AffineTransform2D m;
    m.linear = lin;
    m.translation = c - lin * (c + Eigen::Vector2d(p.tx, p.ty));
    return m;
  }

  /// True image motion from frame-1 to frame.
  AffineTransform2D inter_frame_motion(int frame) const {
    if (frame <= 1) return {};
    return world_to_image(frame).compose(world_to_image(frame - 1).inverse());
  }

  Point2 world_center(const ObjectSpec& o, int frame) const {
    const double t = frame - 1;
    double x = o.x + o.vx * t, y = o.y + o.vy * t;
    if (o.motion == MotionPath::Sinusoidal) {
      const double arg = 2.0 * std::numbers::pi * t / o.period + o.phase;
      x += o.amp_x * std::sin(arg);
      y += o.amp_y * std::sin(arg);
    }
    return {x, y};
  }

  bool alive(const ObjectSpec& o, int frame) const {
    return frame >= o.first_frame && (o.last_frame == 0 || frame <= o.last_frame);
  }

  /// Unclipped image-space box of object `i`.
  BoundingBox object_box(std::size_t i, int frame) const {
    const auto& o = spec_.objects[i];
    const Point2 c = world_to_image(frame).apply(world_center(o, frame));
    const double s = pose(frame).scale;
    const double w = o.width * s, h = o.height * s;
    return {c.x - 0.5 * w, c.y - 0.5 * h, w, h};
  }

  RawImage render(int frame) const {
    RawImage img(spec_.width, spec_.height);
    const auto to_world = world_to_image(frame).inverse();
    for (int y = 0; y < spec_.height; ++y)
      for (int x = 0; x < spec_.width; ++x) {
        const Point2 w = to_world.apply({x + 0.5, y + 0.5});
        auto* px = img.pixel(x, y);
        if (in_band(w)) {
          // dark striped band, still textured so features hold on it
          const double v = 0.5 + 0.5 * detail::value_noise(spec_.seed ^ 0xBADC0FFEEULL, w.x, w.y, 6.0);
          const int g = static_cast<int>(std::lround(30 + 40 * v));
          px[0] = px[1] = px[2] = static_cast<std::uint8_t>(g);
          continue;
        }
        const double v = 0.55 * detail::value_noise(spec_.seed, w.x, w.y, 23.0) +
                         0.30 * detail::value_noise(spec_.seed + 1, w.x, w.y, 9.0) +
                         0.15 * detail::value_noise(spec_.seed + 2, w.x, w.y, 4.0);
        const double g = 60.0 + 140.0 * v;
        px[0] = static_cast<std::uint8_t>(std::lround(g));
        px[1] = static_cast<std::uint8_t>(std::lround(g * 0.97 + 4.0));
        px[2] = static_cast<std::uint8_t>(std::lround(g * 0.94 + 8.0));
      }
    for (std::size_t i = 0; i < spec_.objects.size(); ++i) {
      const auto& o = spec_.objects[i];
      if (!alive(o, frame)) continue;
      const BoundingBox b = object_box(i, frame);
      int x0, y0, x1, y1;
      if (!pixel_span(b, x0, y0, x1, y1)) continue;
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) {
          if (in_band(to_world.apply({x + 0.5, y + 0.5}))) continue;
          // 2x3 checker in object-local coordinates
          const double u = (x + 0.5 - b.left) / b.width, v = (y + 0.5 - b.top) / b.height;
          const bool dark = ((static_cast<int>(u * 2.0) + static_cast<int>(v * 3.0)) & 1) != 0;
          const double f = dark ? 0.72 : 1.0;
          auto* px = img.pixel(x, y);
          for (int c = 0; c < 3; ++c)
            px[c] = static_cast<std::uint8_t>(std::clamp(std::lround(o.color[c] * f), 0L, 255L));
        }
    }
    return img;
  }

  FrameAnnotation annotate(int frame) const {
    FrameAnnotation ann;
    ann.frame = frame;
    const auto to_world = world_to_image(frame).inverse();
    const int n = static_cast<int>(spec_.objects.size());
    std::vector<BoundingBox> boxes(n);
    std::vector<char> live(n, 0);
    for (int i = 0; i < n; ++i) {
      live[i] = alive(spec_.objects[i], frame);
      if (live[i]) boxes[i] = object_box(i, frame);
    }
    for (int i = 0; i < n; ++i) {
      if (!live[i]) continue;
      const BoundingBox full = boxes[i];
      const BoundingBox clipped = clamp_to(full, spec_.width, spec_.height);
      if (clipped.area() < 0.5 * full.area()) continue;  // mostly out of view
      int x0, y0, x1, y1;
      long total = 0, hidden = 0;
      if (pixel_span(full, x0, y0, x1, y1)) {
        for (int y = y0; y < y1; ++y)
          for (int x = x0; x < x1; ++x) {
            ++total;
            bool covered = in_band(to_world.apply({x + 0.5, y + 0.5}));
            for (int j = i + 1; j < n && !covered; ++j)
              if (live[j] && pixel_inside(boxes[j], x, y)) covered = true;
            hidden += covered;
          }
      }
      if (total == 0) continue;
      GroundTruthRow row;
      row.id = i + 1;
      row.class_id = spec_.objects[i].class_id;
      row.box = clipped;
      row.full_box = full;
      row.occluded_fraction = static_cast<double>(hidden) / static_cast<double>(total);
      row.ignore = row.occluded_fraction > 0.9;
      row.truncation = clipped.area() < full.area() ? 1 : 0;
      row.occlusion = row.occluded_fraction < 0.01 ? 0 : (row.occluded_fraction <= 0.5 ? 1 : 2);
      row.is_static = spec_.objects[i].is_static();
      ann.ground_truth.push_back(row);
    }
    ann.detections = make_detections(frame, ann.ground_truth);
    return ann;
  }

  FrameSource frame_source() const {
    return {spec_.frames, [this](int f) { return render(f); }};
  }

  /// Ground truth and detections for every frame.
  void annotate_all(FrameBoxes& gt, DetectionsByFrame& dets,
                    std::vector<FrameAnnotation>* rows = nullptr) const {
    for (int f = 1; f <= spec_.frames; ++f) {
      auto ann = annotate(f);
      for (const auto& r : ann.ground_truth) gt[f].push_back({r.id, r.box, r.class_id, r.ignore});
      if (!ann.detections.empty()) dets[f] = ann.detections;
      if (rows) rows->push_back(std::move(ann));
    }
  }

 private:
  struct Pose {
    double scale = 1.0;
    double rotation = 0.0;  // radians
    double tx = 0.0;
    double ty = 0.0;
  };

  const Pose& pose(int frame) const {
    if (frame < 1 || frame > spec_.frames) throw InputError("scenario: frame out of range");
    return poses_[frame];
  }

  bool in_band(const Point2& w) const {
    return spec_.occluder_height > 0.0 && w.y >= spec_.occluder_top && w.y < spec_.occluder_top + spec_.occluder_height;
  }

  /// Pixels whose centers fall inside the box, clipped to the image.
  bool pixel_span(const BoundingBox& b, int& x0, int& y0, int& x1, int& y1) const {
    x0 = std::max(0, static_cast<int>(std::ceil(b.left - 0.5)));
    y0 = std::max(0, static_cast<int>(std::ceil(b.top - 0.5)));
    x1 = std::min(spec_.width, static_cast<int>(std::ceil(b.right() - 0.5)));
    y1 = std::min(spec_.height, static_cast<int>(std::ceil(b.bottom() - 0.5)));
    return x1 > x0 && y1 > y0;
  }

  static bool pixel_inside(const BoundingBox& b, int x, int y) {
    const double cx = x + 0.5, cy = y + 0.5;
    return cx >= b.left && cx < b.right() && cy >= b.top && cy < b.bottom();
  }

  std::vector<Detection> make_detections(int frame, const std::vector<GroundTruthRow>& gt) const {
    std::vector<Detection> out;
    const auto& nm = spec_.noise;
    for (const auto& row : gt) {
      if (row.ignore) continue;
      Detection d;
      d.frame = frame;
      d.class_id = row.class_id;
      if (!nm.enabled) {
        d.box = row.box;
        d.score = 1.0;
        out.push_back(d);
        continue;
      }
      Xorshift64Star rng(derive_seed(spec_.seed, static_cast<std::uint64_t>(frame), 1000 + row.id));
      const double drop = rng.uniform();
      const double jx = rng.gaussian(), jy = rng.gaussian(), jw = rng.gaussian(), jh = rng.gaussian();
      const double jc = std::clamp(rng.gaussian(), -2.0, 2.0);
      if (drop < nm.dropout || row.occluded_fraction > nm.occlusion_dropout) continue;
      const double w = std::max(1.0, row.box.width * (1.0 + nm.size_jitter * jw));
      const double h = std::max(1.0, row.box.height * (1.0 + nm.size_jitter * jh));
      const double cx = row.box.center_x() + nm.position_jitter * jx;
      const double cy = row.box.center_y() + nm.position_jitter * jy;
      d.box = {cx - 0.5 * w, cy - 0.5 * h, w, h};
      const double conf = base_confidence(nm, row.box.area()) - nm.occlusion_penalty * row.occluded_fraction +
                          nm.conf_noise * jc;
      d.score = std::clamp(conf, nm.score_min, nm.score_max);
      out.push_back(d);
    }
    if (nm.enabled && nm.fp_rate > 0.0) {
      Xorshift64Star rng(derive_seed(spec_.seed, static_cast<std::uint64_t>(frame), 7));
      const double whole = std::floor(nm.fp_rate);
      int count = static_cast<int>(whole) + (rng.uniform() < nm.fp_rate - whole ? 1 : 0);
      std::vector<int> classes;
      for (const auto& o : spec_.objects) classes.push_back(o.class_id);
      if (classes.empty()) classes.push_back(1);
      for (int i = 0; i < count; ++i) {
        Detection d;
        d.frame = frame;
        const double w = rng.uniform(nm.fp_size_min, nm.fp_size_max);
        const double h = rng.uniform(nm.fp_size_min, nm.fp_size_max);
        d.box = {rng.uniform(0.0, spec_.width - w), rng.uniform(0.0, spec_.height - h), w, h};
        d.score = rng.uniform(nm.fp_score_min, nm.fp_score_max);
        d.class_id = classes[rng.below(classes.size())];
        out.push_back(d);
      }
    }
    std::stable_sort(out.begin(), out.end(), [](const Detection& a, const Detection& b) {
      return a.box.left != b.box.left ? a.box.left < b.box.left : a.box.top < b.box.top;
    });
    return out;
  }

  ScenarioSpec spec_;
  std::vector<Pose> poses_;
};

// ---------------------------------------------------------------------------
// Scenario files

inline std::string to_text(const ScenarioSpec& s) {
  using kv::format_double;
  std::ostringstream os;
  os << "name = " << s.name << '\n'
     << "seed = " << s.seed << '\n'
     << "frames = " << s.frames << '\n'
     << "width = " << s.width << '\n'
     << "height = " << s.height << '\n'
     << "frame_rate = " << format_double(s.frame_rate) << '\n'
     << "occluder_top = " << format_double(s.occluder_top) << '\n'
     << "occluder_height = " << format_double(s.occluder_height) << '\n';
  const auto& n = s.noise;
  os << "noise_enabled = " << kv::format_bool(n.enabled) << '\n'
     << "noise_position_jitter = " << format_double(n.position_jitter) << '\n'
     << "noise_size_jitter = " << format_double(n.size_jitter) << '\n'
     << "noise_conf_low = " << format_double(n.conf_low) << '\n'
     << "noise_conf_high = " << format_double(n.conf_high) << '\n'
     << "noise_knee_area = " << format_double(n.knee_area) << '\n'
     << "noise_conf_noise = " << format_double(n.conf_noise) << '\n'
     << "noise_occlusion_penalty = " << format_double(n.occlusion_penalty) << '\n'
     << "noise_score_min = " << format_double(n.score_min) << '\n'
     << "noise_score_max = " << format_double(n.score_max) << '\n'
     << "noise_dropout = " << format_double(n.dropout) << '\n'
     << "noise_occlusion_dropout = " << format_double(n.occlusion_dropout) << '\n'
     << "noise_fp_rate = " << format_double(n.fp_rate) << '\n'
     << "noise_fp_score_min = " << format_double(n.fp_score_min) << '\n'
     << "noise_fp_score_max = " << format_double(n.fp_score_max) << '\n'
     << "noise_fp_size_min = " << format_double(n.fp_size_min) << '\n'
     << "noise_fp_size_max = " << format_double(n.fp_size_max) << '\n';
  for (const auto& o : s.objects) {
    os << "\n[object]\n"
       << "class_id = " << o.class_id << '\n'
       << "width = " << format_double(o.width) << '\n'
       << "height = " << format_double(o.height) << '\n'
       << "x = " << format_double(o.x) << '\n'
       << "y = " << format_double(o.y) << '\n'
       << "motion = " << (o.motion == MotionPath::Linear ? "linear" : "sinusoidal") << '\n'
       << "vx = " << format_double(o.vx) << '\n'
       << "vy = " << format_double(o.vy) << '\n'
       << "amp_x = " << format_double(o.amp_x) << '\n'
       << "amp_y = " << format_double(o.amp_y) << '\n'
       << "period = " << format_double(o.period) << '\n'
       << "phase = " << format_double(o.phase) << '\n'
       << "color = " << o.color[0] << ',' << o.color[1] << ',' << o.color[2] << '\n'
       << "first_frame = " << o.first_frame << '\n'
       << "last_frame = " << o.last_frame << '\n';
  }
  for (const auto& c : s.camera) {
    os << "\n[camera]\n"
       << "frame = " << c.frame << '\n'
       << "scale = " << format_double(c.scale) << '\n'
       << "rotation_deg = " << format_double(c.rotation_deg) << '\n'
       << "tx = " << format_double(c.tx) << '\n'
       << "ty = " << format_double(c.ty) << '\n';
  }
  return os.str();
}

inline ScenarioSpec parse_scenario(std::string_view text, const std::string& source = {}) {
  ScenarioSpec s;
  bool has_seed = false;
  int current_section = -1;
  for (const auto& e : kv::parse(text, source)) {
    const std::string& k = e.key;
    auto num = [&] { return kv::to_double(e, source); };
    auto integer = [&] { return static_cast<int>(kv::to_int(e, source)); };
    if (e.section.empty()) {
      auto& n = s.noise;
      if (k == "name") s.name = e.value;
      else if (k == "seed") {
        s.seed = kv::to_uint64(e, source);
        has_seed = true;
      } else if (k == "frames") s.frames = integer();
      else if (k == "width") s.width = integer();
      else if (k == "height") s.height = integer();
      else if (k == "frame_rate") s.frame_rate = num();
      else if (k == "occluder_top") s.occluder_top = num();
      else if (k == "occluder_height") s.occluder_height = num();
      else if (k == "noise_enabled") n.enabled = kv::to_bool(e, source);
      else if (k == "noise_position_jitter") n.position_jitter = num();
      else if (k == "noise_size_jitter") n.size_jitter = num();
      else if (k == "noise_conf_low") n.conf_low = num();
      else if (k == "noise_conf_high") n.conf_high = num();
      else if (k == "noise_knee_area") n.knee_area = num();
      else if (k == "noise_conf_noise") n.conf_noise = num();
      else if (k == "noise_occlusion_penalty") n.occlusion_penalty = num();
      else if (k == "noise_score_min") n.score_min = num();
      else if (k == "noise_score_max") n.score_max = num();
      else if (k == "noise_dropout") n.dropout = num();
      else if (k == "noise_occlusion_dropout") n.occlusion_dropout = num();
      else if (k == "noise_fp_rate") n.fp_rate = num();
      else if (k == "noise_fp_score_min") n.fp_score_min = num();
      else if (k == "noise_fp_score_max") n.fp_score_max = num();
      else if (k == "noise_fp_size_min") n.fp_size_min = num();
      else if (k == "noise_fp_size_max") n.fp_size_max = num();
      else throw ParseError(source, e.line, "unknown scenario key '" + k + "'");
      continue;
    }
    if (e.section == "object") {
      if (e.section_index != current_section) {
        s.objects.emplace_back();
        current_section = e.section_index;
      }
      auto& o = s.objects.back();
      if (k == "class_id") o.class_id = integer();
      else if (k == "width") o.width = num();
      else if (k == "height") o.height = num();
      else if (k == "x") o.x = num();
      else if (k == "y") o.y = num();
      else if (k == "motion") {
        if (e.value == "linear") o.motion = MotionPath::Linear;
        else if (e.value == "sinusoidal") o.motion = MotionPath::Sinusoidal;
        else throw ParseError(source, e.line, "motion must be linear or sinusoidal");
      } else if (k == "vx") o.vx = num();
      else if (k == "vy") o.vy = num();
      else if (k == "amp_x") o.amp_x = num();
      else if (k == "amp_y") o.amp_y = num();
      else if (k == "period") o.period = num();
      else if (k == "phase") o.phase = num();
      else if (k == "color") {
        std::array<int, 3> c{};
        std::size_t start = 0;
        for (int i = 0; i < 3; ++i) {
          const auto comma = e.value.find(',', start);
          if ((i < 2) == (comma == std::string::npos))
            throw ParseError(source, e.line, "color must be r,g,b");
          kv::Entry part = e;
          part.value = std::string(kv::trim(std::string_view(e.value).substr(start, comma - start)));
          c[i] = static_cast<int>(kv::to_int(part, source));
          if (c[i] < 0 || c[i] > 255) throw ParseError(source, e.line, "color components must lie in [0,255]");
          start = comma + 1;
        }
        o.color = c;
      } else if (k == "first_frame") o.first_frame = integer();
      else if (k == "last_frame") o.last_frame = integer();
      else throw ParseError(source, e.line, "unknown object key '" + k + "'");
    } else if (e.section == "camera") {
      if (e.section_index != current_section) {
        s.camera.emplace_back();
        current_section = e.section_index;
      }
      auto& c = s.camera.back();
      if (k == "frame") c.frame = integer();
      else if (k == "scale") c.scale = num();
      else if (k == "rotation_deg") c.rotation_deg = num();
      else if (k == "tx") c.tx = num();
      else if (k == "ty") c.ty = num();
      else throw ParseError(source, e.line, "unknown camera key '" + k + "'");
    } else {
      throw ParseError(source, e.line, "unknown section '" + e.section + "'");
    }
  }
  if (!has_seed) throw ParseError(source, 0, "scenario spec requires a 'seed'");
  for (const auto& o : s.objects)
    if (!(o.width > 0.0) || !(o.height > 0.0) || !(o.period > 0.0))
      throw ParseError(source, 0, "object sizes and periods must be positive");
  return s;
}

inline ScenarioSpec load_scenario(const std::string& path) { return parse_scenario(read_text_file(path), path); }

// ---------------------------------------------------------------------------
// Presets

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"baseline", "fast_camera", "small_objects", "occlusion"};
  return names;
}

namespace detail {

inline ObjectSpec object(int cls, double w, double h, double x, double y, double vx, double vy,
                         std::array<int, 3> color) {
  ObjectSpec o;
  o.class_id = cls;
  o.width = w;
  o.height = h;
  o.x = x;
  o.y = y;
  o.vx = vx;
  o.vy = vy;
  o.color = color;
  return o;
}

inline ScenarioSpec baseline() {
  ScenarioSpec s;
  s.name = "baseline";
  s.seed = 11;
  s.frames = 50;
  s.objects = {
      object(4, 40, 24, 120, 100, 1.5, 0.5, {210, 50, 50}),
      object(4, 44, 26, 500, 140, -1.2, 0.6, {50, 80, 210}),
      object(1, 14, 30, 200, 360, 0.8, -0.6, {220, 200, 40}),
      object(1, 12, 28, 420, 380, 0.0, 0.0, {60, 190, 70}),
      object(5, 50, 30, 320, 250, 0.0, 0.0, {150, 60, 170}),
  };
  s.objects[3].motion = MotionPath::Sinusoidal;
  s.objects[3].amp_x = 30;
  s.objects[3].period = 40;
  return s;
}

inline ScenarioSpec fast_camera() {
  ScenarioSpec s;
  s.name = "fast_camera";
  s.seed = 22;
  s.frames = 100;
  s.objects = {
      object(4, 30, 20, 150, 120, 0.0, 0.0, {210, 50, 50}),
      object(4, 28, 22, 470, 110, 0.0, 0.0, {50, 80, 210}),
      object(4, 32, 24, 330, 330, 0.0, 0.0, {230, 150, 30}),
      object(4, 26, 20, 180, 320, 0.8, 0.2, {60, 190, 70}),
      object(4, 30, 22, 450, 360, -0.7, -0.3, {150, 60, 170}),
      object(1, 14, 28, 320, 200, 0.3, 0.6, {220, 210, 60}),
      // distant vehicles: below the confidence knee
      object(4, 10, 8, 250, 60, 0.6, 0.3, {210, 50, 50}),
      object(4, 9, 8, 560, 250, -0.5, 0.4, {50, 80, 210}),
  };
  s.noise.enabled = true;
  s.noise.position_jitter = 0.6;
  s.noise.size_jitter = 0.03;
  s.noise.conf_low = 0.45;
  s.noise.conf_high = 0.92;
  s.noise.knee_area = 100.0;
  s.noise.conf_noise = 0.03;
  s.noise.dropout = 0.03;
  s.noise.fp_rate = 0.3;
  s.noise.fp_size_min = 14;
  s.noise.fp_size_max = 30;
  // Irregular camera: mean-reverting random steps, up to 3 deg rotation,
  // 15 px translation and 2% zoom change per frame.
  Xorshift64Star rng(derive_seed(s.seed, 0xCA11, 1));
  double theta = 0.0, tx = 0.0, ty = 0.0, zoom = 1.0;
  for (int k = 2; k <= s.frames; ++k) {
    CameraStep c;
    c.frame = k;
    c.rotation_deg = std::clamp(-0.15 * theta + rng.uniform(-3.0, 3.0), -3.0, 3.0);
    double dx = -0.15 * tx + rng.uniform(-12.0, 12.0);
    double dy = -0.15 * ty + rng.uniform(-12.0, 12.0);
    const double mag = std::hypot(dx, dy);
    if (mag > 15.0) {
      dx *= 15.0 / mag;
      dy *= 15.0 / mag;
    }
    c.tx = dx;
    c.ty = dy;
    c.scale = 1.0 + std::clamp(-0.2 * (zoom - 1.0) + rng.uniform(-0.02, 0.02), -0.02, 0.02);
    theta += c.rotation_deg;
    tx += c.tx;
    ty += c.ty;
    zoom *= c.scale;
    s.camera.push_back(c);
  }
  return s;
}

inline ScenarioSpec small_objects() {
  ScenarioSpec s;
  s.name = "small_objects";
  s.seed = 33;
  s.frames = 100;
  s.objects = {
      object(4, 12, 10, 80, 80, 0.9, 0.2, {220, 40, 40}),
      object(4, 13, 11, 560, 90, -0.8, 0.3, {40, 70, 220}),
      object(4, 10, 12, 140, 400, 0.6, -0.5, {230, 160, 20}),
      object(4, 14, 12, 520, 420, -0.7, -0.4, {40, 190, 60}),
      object(4, 11, 9, 320, 150, 0.0, 0.7, {170, 50, 180}),
      object(4, 12, 13, 300, 380, 0.2, -0.6, {30, 190, 200}),
      // crossing pair on the same row
      object(4, 12, 10, 200, 250, 1.0, 0.0, {240, 240, 240}),
      object(4, 12, 10, 420, 252, -1.0, 0.0, {20, 20, 20}),
      object(4, 9, 8, 600, 300, -0.5, 0.1, {240, 120, 160}),
      object(4, 13, 14, 60, 200, 0.5, 0.3, {120, 200, 40}),
  };
  s.noise.enabled = true;
  s.noise.position_jitter = 0.4;
  s.noise.size_jitter = 0.05;
  s.noise.conf_low = 0.48;
  s.noise.conf_high = 0.9;
  s.noise.knee_area = 400.0;
  s.noise.conf_noise = 0.05;
  s.noise.occlusion_penalty = 0.3;
  s.noise.score_min = 0.3;
  s.noise.score_max = 0.65;
  s.noise.dropout = 0.05;
  s.noise.occlusion_dropout = 0.6;
  s.noise.fp_rate = 0.2;
  s.noise.fp_score_min = 0.3;
  s.noise.fp_score_max = 0.5;
  s.noise.fp_size_min = 8;
  s.noise.fp_size_max = 14;
  return s;
}

inline ScenarioSpec occlusion() {
  ScenarioSpec s;
  s.name = "occlusion";
  s.seed = 44;
  s.frames = 100;
  s.occluder_top = 225;
  s.occluder_height = 30;
  s.objects = {
      object(4, 30, 22, 120, 120, 0.2, 1.8, {210, 50, 50}),
      object(4, 28, 24, 260, 360, 0.1, -1.7, {50, 80, 210}),
      object(4, 32, 22, 400, 110, -0.2, 1.6, {230, 150, 30}),
      object(4, 26, 20, 540, 380, -0.1, -1.5, {60, 190, 70}),
      object(4, 30, 22, 150, 300, 1.5, 0.0, {150, 60, 170}),
      object(4, 30, 22, 470, 302, -1.5, 0.0, {30, 190, 200}),
  };
  s.noise.enabled = true;
  s.noise.position_jitter = 0.6;
  s.noise.size_jitter = 0.03;
  s.noise.conf_low = 0.45;
  s.noise.conf_high = 0.92;
  s.noise.knee_area = 100.0;
  s.noise.conf_noise = 0.03;
  s.noise.occlusion_penalty = 0.5;
  s.noise.dropout = 0.02;
  s.noise.fp_rate = 0.2;
  return s;
}

}  // namespace detail

/// Fixed, versioned scenario definitions used by the acceptance suite.
inline ScenarioSpec preset(const std::string& name) {
  if (name == "baseline") return detail::baseline();
  if (name == "fast_camera") return detail::fast_camera();
  if (name == "small_objects") return detail::small_objects();
  if (name == "occlusion") return detail::occlusion();
  throw InputError("unknown preset '" + name + "'");
}

// ---------------------------------------------------------------------------
// Output

inline std::string format_visdrone_gt(const std::vector<FrameAnnotation>& frames) {
  std::string out;
  char line[200];
  for (const auto& f : frames)
    for (const auto& r : f.ground_truth) {
      const int n = std::snprintf(line, sizeof(line), "%d,%d,%.2f,%.2f,%.2f,%.2f,%d,%d,%d,%d\n", f.frame, r.id,
                                  r.box.left, r.box.top, r.box.width, r.box.height, r.ignore ? 0 : 1, r.class_id,
                                  r.truncation, r.occlusion);
      out.append(line, static_cast<std::size_t>(n));
    }
  return out;
}

/// MOT detection rows; the class id goes in the 8th column.
inline std::string format_mot_detections(const std::vector<FrameAnnotation>& frames) {
  std::string out;
  char line[200];
  for (const auto& f : frames)
    for (const auto& d : f.detections) {
      const int n = std::snprintf(line, sizeof(line), "%d,-1,%.2f,%.2f,%.2f,%.2f,%.4f,%d,-1,-1\n", f.frame,
                                  d.box.left, d.box.top, d.box.width, d.box.height, d.score, d.class_id);
      out.append(line, static_cast<std::size_t>(n));
    }
  return out;
}

/// Writes frames/, gt.txt (VisDrone), det.txt (MOT), seqinfo.ini and
/// scenario.txt into out_dir.
inline void generate(const ScenarioSpec& spec, const std::string& out_dir) {
  namespace fs = std::filesystem;
  const SyntheticScene scene(spec);
  const fs::path root(out_dir);
  std::error_code ec;
  fs::create_directories(root / "frames", ec);
  if (ec) throw InputError("cannot create '" + (root / "frames").string() + "': " + ec.message());

  std::vector<FrameAnnotation> rows;
  for (int f = 1; f <= spec.frames; ++f) {
    write_ppm((root / "frames" / frame_file_name(f, ".ppm")).string(), scene.render(f));
    rows.push_back(scene.annotate(f));
  }
  write_text_file((root / "gt.txt").string(), format_visdrone_gt(rows));
  write_text_file((root / "det.txt").string(), format_mot_detections(rows));
  SequenceManifest m;
  m.name = spec.name;
  m.image_directory = "frames";
  m.frame_rate = spec.frame_rate;
  m.seq_length = spec.frames;
  m.im_width = spec.width;
  m.im_height = spec.height;
  m.image_extension = ".ppm";
  write_text_file((root / "seqinfo.ini").string(), format_manifest(m));
  write_text_file((root / "scenario.txt").string(), to_text(spec));
}

}  // namespace sftrack::synth
