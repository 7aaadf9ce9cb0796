#pragma once

#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "sftrack/config.hpp"
#include "sftrack/io.hpp"
#include "sftrack/metrics.hpp"
#include "sftrack/synthetic.hpp"
#include "sftrack/tracker.hpp"

namespace sftrack {

struct AblationRow {
  int row = 0;
  std::string name;
  bool reid = false;
  bool uav_mc = false;
  bool low_init = false;
  bool traditional = false;
  MetricCounts metrics;
};

struct AblationVariant {
  std::string name;
  bool reid, uav_mc, low_init, traditional;
};

/// BYTE baseline, then each component switched on cumulatively.
inline const std::vector<AblationVariant>& ablation_lattice() {
  static const std::vector<AblationVariant> rows{
      {"byte", false, false, false, false},
      {"+uav_mc", true, true, false, false},
      {"+low_init", true, true, true, false},
      {"+traditional", true, true, true, true},
  };
  return rows;
}

inline TrackerConfig ablation_config(const AblationVariant& v, TrackerConfig base = {}) {
  base.mc_enabled = v.uav_mc;
  base.low_init_enabled = v.low_init;
  base.traditional_second_assoc = v.traditional;
  return base;
}

/// Runs the lattice on a generated scenario held in memory.
inline std::vector<AblationRow> run_ablation(const synth::ScenarioSpec& spec, const TrackerConfig& base = {}) {
  const synth::SyntheticScene scene(spec);
  FrameBoxes gt;
  DetectionsByFrame dets;
  scene.annotate_all(gt, dets);
  std::vector<RawImage> frames(static_cast<std::size_t>(spec.frames) + 1);
  for (int f = 1; f <= spec.frames; ++f) frames[f] = scene.render(f);
  const FrameSource source{spec.frames, [&frames](int f) { return frames[f]; }};

  std::vector<AblationRow> out;
  int index = 0;
  for (const auto& v : ablation_lattice()) {
    const auto results = run_sequence(source, dets, ablation_config(v, base),
                                      v.reid ? EmbeddingProvider::hand_crafted() : EmbeddingProvider::none());
    AblationRow row{++index, v.name, v.reid, v.uav_mc, v.low_init, v.traditional, {}};
    row.metrics = evaluate(gt, results_to_boxes(results, true));
    out.push_back(std::move(row));
  }
  return out;
}

inline constexpr std::string_view kAblationHeader = "row,name,reid,uav_mc,low_init,traditional,mota,idf1,fp,fn,ids";

/// CSV table: the header above, then one line per lattice row; mota in
/// percent and idf1 as a fraction, four decimals each.
inline std::string format_ablation(const std::vector<AblationRow>& rows) {
  std::string out(kAblationHeader);
  out += '\n';
  char line[256];
  for (const auto& r : rows) {
    const int n = std::snprintf(line, sizeof(line), "%d,%s,%d,%d,%d,%d,%.4f,%.4f,%ld,%ld,%ld\n", r.row,
                                r.name.c_str(), r.reid, r.uav_mc, r.low_init, r.traditional, r.metrics.mota,
                                r.metrics.idf1, r.metrics.fp, r.metrics.fn, r.metrics.ids);
    out.append(line, static_cast<std::size_t>(n));
  }
  return out;
}

inline std::vector<AblationRow> parse_ablation(std::string_view text, const std::string& source = {}) {
  std::vector<AblationRow> rows;
  bool header = true;
  detail::for_each_csv_row(text, [&](const std::vector<std::string_view>& f, std::size_t line) {
    if (header) {
      std::string joined;
      for (std::size_t i = 0; i < f.size(); ++i) joined += (i ? "," : "") + std::string(f[i]);
      if (joined != kAblationHeader) throw ParseError(source, line, "unexpected ablation header");
      header = false;
      return;
    }
    if (f.size() != 11) throw ParseError(source, line, "expected 11 fields, got " + std::to_string(f.size()));
    auto flag = [&](std::size_t i, const char* name) {
      const int v = detail::field_int(f[i], source, line, name);
      if (v != 0 && v != 1) throw ParseError(source, line, std::string("field '") + name + "' must be 0 or 1");
      return v == 1;
    };
    AblationRow r;
    r.row = detail::field_int(f[0], source, line, "row");
    r.name = std::string(f[1]);
    r.reid = flag(2, "reid");
    r.uav_mc = flag(3, "uav_mc");
    r.low_init = flag(4, "low_init");
    r.traditional = flag(5, "traditional");
    r.metrics.mota = detail::field_double(f[6], source, line, "mota");
    r.metrics.idf1 = detail::field_double(f[7], source, line, "idf1");
    r.metrics.fp = detail::field_int(f[8], source, line, "fp");
    r.metrics.fn = detail::field_int(f[9], source, line, "fn");
    r.metrics.ids = detail::field_int(f[10], source, line, "ids");
    rows.push_back(std::move(r));
  });
  if (header) throw ParseError(source, 0, "empty ablation table");
  return rows;
}

}  // namespace sftrack
