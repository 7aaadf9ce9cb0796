#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sftrack/config.hpp"
#include "sftrack/detection.hpp"
#include "sftrack/error.hpp"
#include "sftrack/keyvalue.hpp"
#include "sftrack/log.hpp"
#include "sftrack/metrics.hpp"
#include "sftrack/ppm.hpp"
#include "sftrack/tracker.hpp"

namespace sftrack {

namespace detail {

/// Iterates the non-blank lines of `text`, calling fn(fields, line_no).
template <typename Fn>
void for_each_csv_row(std::string_view text, Fn&& fn) {
  std::size_t pos = 0, line_no = 0;
  std::vector<std::string_view> fields;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view line = kv::trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;
    fields.clear();
    std::size_t start = 0;
    while (true) {
      auto comma = line.find(',', start);
      if (comma == std::string_view::npos) comma = line.size();
      fields.push_back(kv::trim(line.substr(start, comma - start)));
      if (comma == line.size()) break;
      start = comma + 1;
    }
    fn(fields, line_no);
  }
}

inline double field_double(std::string_view tok, const std::string& source, std::size_t line, const char* name) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (tok.empty() || ec != std::errc{} || ptr != last || !std::isfinite(v))
    throw ParseError(source, line, std::string("field '") + name + "': not a number: '" + std::string(tok) + "'");
  return v;
}

inline int field_int(std::string_view tok, const std::string& source, std::size_t line, const char* name) {
  const double v = field_double(tok, source, line, name);
  if (v != std::floor(v) || std::abs(v) > 2e9)
    throw ParseError(source, line, std::string("field '") + name + "': not an integer: '" + std::string(tok) + "'");
  return static_cast<int>(v);
}

inline BoundingBox field_box(const std::vector<std::string_view>& f, std::size_t first, const std::string& source,
                             std::size_t line) {
  return {field_double(f[first], source, line, "left"), field_double(f[first + 1], source, line, "top"),
          field_double(f[first + 2], source, line, "width"), field_double(f[first + 3], source, line, "height")};
}

}  // namespace detail

struct DetectionFile {
  DetectionsByFrame frames;  // per frame, file order preserved
  std::size_t count = 0;
  bool rescaled = false;
};

/// MOTChallenge detections: `frame,id,bb_left,bb_top,bb_width,bb_height,conf[,x,y,z]`.
/// A non-negative integer in the 8th column is taken as the class id;
/// otherwise `default_class` applies. Scores outside [0,1] trigger a per-file
/// min-max rescale.
inline DetectionFile parse_mot_detections(std::string_view text, const std::string& source = {},
                                          int default_class = 1) {
  DetectionFile out;
  double lo = 0.0, hi = 0.0;
  detail::for_each_csv_row(text, [&](const std::vector<std::string_view>& f, std::size_t line) {
    if (f.size() < 7 || f.size() > 10)
      throw ParseError(source, line, "expected 7 to 10 comma-separated fields, got " + std::to_string(f.size()));
    Detection d;
    d.frame = detail::field_int(f[0], source, line, "frame");
    if (d.frame < 1) throw ParseError(source, line, "frame numbers are 1-based");
    detail::field_double(f[1], source, line, "id");
    d.box = detail::field_box(f, 2, source, line);
    d.score = detail::field_double(f[6], source, line, "conf");
    d.class_id = default_class;
    if (f.size() >= 8) {
      const double c = detail::field_double(f[7], source, line, "class");
      if (c >= 0 && c == std::floor(c)) d.class_id = static_cast<int>(c);
    }
    if (out.count == 0) lo = hi = d.score;
    lo = std::min(lo, d.score);
    hi = std::max(hi, d.score);
    out.frames[d.frame].push_back(std::move(d));
    ++out.count;
  });
  if (out.count > 0 && (lo < 0.0 || hi > 1.0)) {
    log::warn((source.empty() ? std::string("detections") : source) +
              ": scores outside [0,1]; min-max rescaled over the file");
    out.rescaled = true;
    for (auto& [frame, list] : out.frames)
      for (auto& d : list) d.score = hi > lo ? (d.score - lo) / (hi - lo) : 1.0;
  }
  return out;
}

inline DetectionFile read_mot_detections(const std::string& path, int default_class = 1) {
  return parse_mot_detections(read_text_file(path), path, default_class);
}

enum class MotBoxKind { GroundTruth, Results };

/// MOTChallenge ground truth (`frame,id,l,t,w,h,consider,class,visibility`,
/// consider == 0 marks an ignore region) or tracker results
/// (`frame,id,l,t,w,h,score,...`, class unknown).
inline FrameBoxes parse_mot_boxes(std::string_view text, MotBoxKind kind, const std::string& source = {}) {
  FrameBoxes out;
  detail::for_each_csv_row(text, [&](const std::vector<std::string_view>& f, std::size_t line) {
    if (f.size() < 6) throw ParseError(source, line, "expected at least 6 comma-separated fields");
    TrackedBox b;
    const int frame = detail::field_int(f[0], source, line, "frame");
    if (frame < 1) throw ParseError(source, line, "frame numbers are 1-based");
    b.id = detail::field_int(f[1], source, line, "id");
    b.box = detail::field_box(f, 2, source, line);
    if (f.size() >= 7) {
      const double v = detail::field_double(f[6], source, line, "conf");
      if (kind == MotBoxKind::GroundTruth && v == 0.0) b.ignore = true;
    }
    if (kind == MotBoxKind::GroundTruth && f.size() >= 8)
      b.class_id = detail::field_int(f[7], source, line, "class");
    out[frame].push_back(b);
  });
  return out;
}

/// The five VisDrone categories tracked: pedestrian, car, van, truck, bus.
inline const std::set<int>& visdrone_default_categories() {
  static const std::set<int> cats{1, 4, 5, 6, 9};
  return cats;
}

enum class VisdroneMode { Detections, GroundTruth };

struct VisdroneData {
  DetectionsByFrame detections;  // VisdroneMode::Detections
  FrameBoxes ground_truth;       // VisdroneMode::GroundTruth
};

/// `frame,id,x,y,w,h,score,category,truncation,occlusion`. Rows whose category
/// is not in `categories` are dropped; GT rows with score 0 become ignore regions.
inline VisdroneData parse_visdrone(std::string_view text, VisdroneMode mode,
                                   const std::set<int>& categories = visdrone_default_categories(),
                                   const std::string& source = {}) {
  VisdroneData out;
  detail::for_each_csv_row(text, [&](const std::vector<std::string_view>& f, std::size_t line) {
    if (f.size() != 10 && f.size() != 8)
      throw ParseError(source, line, "expected 10 comma-separated fields, got " + std::to_string(f.size()));
    const int frame = detail::field_int(f[0], source, line, "frame");
    if (frame < 1) throw ParseError(source, line, "frame numbers are 1-based");
    const int id = detail::field_int(f[1], source, line, "id");
    const BoundingBox box = detail::field_box(f, 2, source, line);
    const double score = detail::field_double(f[6], source, line, "score");
    const int category = detail::field_int(f[7], source, line, "category");
    if (f.size() == 10) {
      detail::field_int(f[8], source, line, "truncation");
      detail::field_int(f[9], source, line, "occlusion");
    }
    if (!categories.count(category)) return;
    if (mode == VisdroneMode::GroundTruth) {
      out.ground_truth[frame].push_back({id, box, category, score == 0.0});
    } else {
      Detection d;
      d.frame = frame;
      d.box = box;
      d.score = std::clamp(score, 0.0, 1.0);
      d.class_id = category;
      out.detections[frame].push_back(std::move(d));
    }
  });
  return out;
}

inline VisdroneData read_visdrone(const std::string& path, VisdroneMode mode,
                                  const std::set<int>& categories = visdrone_default_categories()) {
  return parse_visdrone(read_text_file(path), mode, categories, path);
}

/// MOTChallenge result lines with two-decimal floats.
inline std::string format_results(const std::vector<FrameResult>& results) {
  std::string out;
  char line[192];
  for (const auto& fr : results)
    for (const auto& o : fr.outputs) {
      const int n = std::snprintf(line, sizeof(line), "%d,%d,%.2f,%.2f,%.2f,%.2f,%.2f,-1,-1,-1\n", fr.frame,
                                  o.track_id, o.box.left, o.box.top, o.box.width, o.box.height, o.score);
      out.append(line, static_cast<std::size_t>(n));
    }
  return out;
}

inline void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw InputError("failed writing '" + path + "'");
}

inline void write_results(const std::string& path, const std::vector<FrameResult>& results) {
  write_text_file(path, format_results(results));
}

/// Tracker outputs as evaluation hypotheses.
inline FrameBoxes results_to_boxes(const std::vector<FrameResult>& results, bool keep_class = false) {
  FrameBoxes out;
  for (const auto& fr : results)
    for (const auto& o : fr.outputs) out[fr.frame].push_back({o.track_id, o.box, keep_class ? o.class_id : -1, false});
  return out;
}

/// seqinfo-style sequence description.
struct SequenceManifest {
  std::string name;
  std::string image_directory = "img1";
  double frame_rate = 30.0;
  int seq_length = 0;
  int im_width = 0;
  int im_height = 0;
  std::string image_extension = ".ppm";
};

inline SequenceManifest parse_manifest(std::string_view text, const std::string& source = {}) {
  SequenceManifest m;
  bool has_length = false;
  for (const auto& e : kv::parse(text, source)) {
    if (e.key == "name") m.name = e.value;
    else if (e.key == "imDir") m.image_directory = e.value;
    else if (e.key == "frameRate") m.frame_rate = kv::to_double(e, source);
    else if (e.key == "seqLength") {
      m.seq_length = static_cast<int>(kv::to_int(e, source));
      has_length = true;
    } else if (e.key == "imWidth") m.im_width = static_cast<int>(kv::to_int(e, source));
    else if (e.key == "imHeight") m.im_height = static_cast<int>(kv::to_int(e, source));
    else if (e.key == "imExt") m.image_extension = e.value;
  }
  if (!has_length || m.seq_length < 0) throw ParseError(source, 0, "manifest lacks a valid seqLength");
  return m;
}

inline std::string format_manifest(const SequenceManifest& m) {
  return "[Sequence]\nname=" + m.name + "\nimDir=" + m.image_directory +
         "\nframeRate=" + kv::format_double(m.frame_rate) + "\nseqLength=" + std::to_string(m.seq_length) +
         "\nimWidth=" + std::to_string(m.im_width) + "\nimHeight=" + std::to_string(m.im_height) +
         "\nimExt=" + m.image_extension + "\n";
}

inline std::string frame_file_name(int frame, const std::string& extension) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06d", frame);
  return buf + extension;
}

/// A sequence directory: manifest plus its frame files.
struct Sequence {
  std::filesystem::path directory;
  SequenceManifest manifest;

  std::filesystem::path frame_path(int frame) const {
    return directory / manifest.image_directory / frame_file_name(frame, manifest.image_extension);
  }

  RawImage load_frame(int frame) const {
    const auto path = frame_path(frame);
    if (!std::filesystem::exists(path)) throw InputError("missing frame image '" + path.string() + "'");
    RawImage img = read_ppm(path.string());
    if ((manifest.im_width > 0 && img.width != manifest.im_width) ||
        (manifest.im_height > 0 && img.height != manifest.im_height))
      throw InputError("frame '" + path.string() + "' does not match the manifest dimensions");
    return img;
  }

  FrameSource frames() const {
    return {manifest.seq_length, [seq = *this](int f) { return seq.load_frame(f); }};
  }
};

/// Reads `<dir>/seqinfo.ini` and checks the frame count against the files.
inline Sequence load_sequence(const std::string& dir) {
  namespace fs = std::filesystem;
  Sequence s;
  s.directory = dir;
  const fs::path ini = s.directory / "seqinfo.ini";
  if (!fs::exists(ini)) throw InputError("sequence '" + dir + "' has no seqinfo.ini");
  s.manifest = parse_manifest(read_text_file(ini.string()), ini.string());
  if (s.manifest.name.empty()) s.manifest.name = s.directory.filename().string();
  const fs::path img_dir = s.directory / s.manifest.image_directory;
  if (!fs::is_directory(img_dir)) throw InputError("image directory '" + img_dir.string() + "' not found");
  int count = 0;
  for (const auto& entry : fs::directory_iterator(img_dir))
    if (entry.is_regular_file() && entry.path().extension() == s.manifest.image_extension) ++count;
  if (count != s.manifest.seq_length)
    throw InputError("sequence '" + dir + "': seqLength " + std::to_string(s.manifest.seq_length) + " but " +
                     std::to_string(count) + " image files present");
  return s;
}

}  // namespace sftrack
