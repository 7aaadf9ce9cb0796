#pragma once

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sftrack/ablation.hpp"
#include "sftrack/appearance.hpp"
#include "sftrack/config.hpp"
#include "sftrack/error.hpp"
#include "sftrack/io.hpp"
#include "sftrack/log.hpp"
#include "sftrack/metrics.hpp"
#include "sftrack/overlay.hpp"
#include "sftrack/synthetic.hpp"
#include "sftrack/tracker.hpp"

namespace sftrack::cli {

enum ExitCode : int { kSuccess = 0, kInternal = 1, kUsage = 2 };

inline constexpr const char* kConfigEnv = "SFTRACK_CONFIG";

struct TrackOptions {
  std::string seq, det, embeddings, config, out;
  bool no_mc = false, no_low_init = false, no_traditional = false;
};

struct EvalOptionsCli {
  std::string gt, res, format = "mot", json;
};

struct SynthOptions {
  std::string preset, spec, out;
};

struct OverlayOptions {
  std::string seq, res, out;
};

struct AblateOptions {
  std::string preset, out;
};

/// Aggregated per-frame diagnostics of a run.
inline std::string summarize(const std::vector<FrameResult>& results, int next_track_id) {
  long high = 0, low = 0, ignored = 0, first = 0, second = 0, new_high = 0, new_low = 0, removed = 0;
  long motion = 0, checks = 0, violations = 0, outputs = 0;
  for (const auto& r : results) {
    const auto& d = r.diagnostics;
    high += d.n_high;
    low += d.n_low;
    ignored += d.n_ignored;
    first += d.n_matched_first;
    second += d.n_matched_second;
    new_high += d.n_new_high;
    new_low += d.n_new_low;
    removed += d.n_removed;
    motion += d.motion_estimated;
    checks += d.aspect_checks;
    violations += d.aspect_violations;
    outputs += static_cast<long>(r.outputs.size());
  }
  std::ostringstream os;
  os << "frames              " << results.size() << '\n'
     << "detections high     " << high << '\n'
     << "detections low      " << low << '\n'
     << "detections ignored  " << ignored << '\n'
     << "matched first       " << first << '\n'
     << "matched second      " << second << '\n'
     << "new tracks high     " << new_high << '\n'
     << "new tracks low      " << new_low << '\n'
     << "tracks created      " << next_track_id - 1 << '\n'
     << "tracks removed      " << removed << '\n'
     << "motion estimated    " << motion << '\n'
     << "aspect checks       " << checks << '\n'
     << "aspect violations   " << violations << '\n'
     << "output boxes        " << outputs << '\n';
  return os.str();
}

/// --config, else $SFTRACK_CONFIG, else built-in defaults.
inline TrackerConfig resolve_config(const std::string& flag) {
  if (!flag.empty()) return load_config(flag);
  if (const char* env = std::getenv(kConfigEnv); env && *env) return load_config(env);
  return TrackerConfig{};
}

inline int cmd_track(const TrackOptions& o, std::ostream& out) {
  TrackerConfig config = resolve_config(o.config);
  if (o.no_mc) config.mc_enabled = false;
  if (o.no_low_init) config.low_init_enabled = false;
  if (o.no_traditional) config.traditional_second_assoc = false;

  const Sequence seq = load_sequence(o.seq);
  const DetectionFile dets = read_mot_detections(o.det);
  EmbeddingProvider provider = o.embeddings.empty() ? EmbeddingProvider::hand_crafted()
                                                    : EmbeddingProvider::from_table(load_embeddings(o.embeddings));

  Tracker tracker(config, std::move(provider));
  std::vector<FrameResult> results;
  const FrameSource frames = seq.frames();
  for (const auto& [f, list] : dets.frames)
    if (f > frames.frame_count)
      throw InputError("detections reference frame " + std::to_string(f) + " but the sequence has " +
                       std::to_string(frames.frame_count) + " frames");
  static const std::vector<Detection> kNone;
  for (int f = 1; f <= frames.frame_count; ++f) {
    auto it = dets.frames.find(f);
    results.push_back(tracker.step(f, frames.load(f), it == dets.frames.end() ? kNone : it->second));
  }
  write_results(o.out, results);
  out << summarize(results, tracker.next_track_id());
  return kSuccess;
}

/// Drops hypothesis frames outside the ground-truth frame range.
inline FrameBoxes clip_to_gt_range(const FrameBoxes& gt, FrameBoxes hyp) {
  const int lo = gt.empty() ? 1 : gt.begin()->first;
  const int hi = gt.empty() ? 0 : gt.rbegin()->first;
  long dropped = 0;
  for (auto it = hyp.begin(); it != hyp.end();) {
    if (it->first < lo || it->first > hi) {
      dropped += static_cast<long>(it->second.size());
      it = hyp.erase(it);
    } else {
      ++it;
    }
  }
  if (dropped > 0)
    log::warn("results extend beyond the ground-truth frame range " + std::to_string(lo) + ".." +
              std::to_string(hi) + "; " + std::to_string(dropped) + " boxes outside it were ignored");
  return hyp;
}

inline int cmd_eval(const EvalOptionsCli& o, std::ostream& out) {
  FrameBoxes gt = o.format == "visdrone"
                      ? read_visdrone(o.gt, VisdroneMode::GroundTruth).ground_truth
                      : parse_mot_boxes(read_text_file(o.gt), MotBoxKind::GroundTruth, o.gt);
  FrameBoxes hyp = clip_to_gt_range(gt, parse_mot_boxes(read_text_file(o.res), MotBoxKind::Results, o.res));
  const MetricCounts m = evaluate(gt, hyp);
  if (m.gt_total <= 0) throw InputError("'" + o.gt + "' contains no evaluable ground-truth boxes");

  const std::filesystem::path gt_path(o.gt);
  std::string name = gt_path.parent_path().filename().string();
  if (name.empty()) name = gt_path.stem().string();
  const MetricsReport report = aggregate({{name, m}});
  out << format_table(report);
  if (!o.json.empty()) write_text_file(o.json, to_json(report));
  return kSuccess;
}

inline int cmd_synth(const SynthOptions& o, std::ostream& out) {
  const synth::ScenarioSpec spec = o.preset.empty() ? synth::load_scenario(o.spec) : synth::preset(o.preset);
  synth::generate(spec, o.out);
  out << "wrote " << spec.frames << " frames of '" << spec.name << "' to " << o.out << '\n';
  return kSuccess;
}

inline int cmd_overlay(const OverlayOptions& o, std::ostream& out) {
  const Sequence seq = load_sequence(o.seq);
  const FrameBoxes res = parse_mot_boxes(read_text_file(o.res), MotBoxKind::Results, o.res);
  render_overlay(seq, res, o.out);
  out << "wrote " << seq.manifest.seq_length << " frames to " << o.out << '\n';
  return kSuccess;
}

inline int cmd_ablate(const AblateOptions& o, std::ostream& out) {
  const auto table = format_ablation(run_ablation(synth::preset(o.preset)));
  write_text_file(o.out, table);
  out << table;
  return kSuccess;
}

/// Entry point shared by the executable and the tests. Exit codes: 0
/// success, 1 internal failure, 2 usage or input error.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Multi-object tracking toolkit for UAV footage", "sftrack"};
  app.require_subcommand(1);

  TrackOptions track;
  auto* t = app.add_subcommand("track", "Track a sequence and write MOT-format results");
  t->add_option("--seq", track.seq, "Sequence directory (seqinfo.ini + frames)")->required();
  t->add_option("--det", track.det, "MOT-format detection file")->required();
  t->add_option("--embeddings", track.embeddings, "Per-detection embedding file");
  t->add_option("--config", track.config, std::string("Tracker config file (fallback: $") + kConfigEnv + ")");
  t->add_option("--out", track.out, "Result file")->required();
  t->add_flag("--no-mc", track.no_mc, "Disable camera motion compensation");
  t->add_flag("--no-low-init", track.no_low_init, "Disable track initiation from low-confidence detections");
  t->add_flag("--no-traditional", track.no_traditional, "IoU-only second association");

  EvalOptionsCli ev;
  auto* e = app.add_subcommand("eval", "Evaluate a result file against ground truth");
  e->add_option("--gt", ev.gt, "Ground-truth file")->required();
  e->add_option("--res", ev.res, "MOT-format result file")->required();
  e->add_option("--format", ev.format, "Ground-truth format")->check(CLI::IsMember({"mot", "visdrone"}));
  e->add_option("--json", ev.json, "Also write the report as JSON");

  SynthOptions sy;
  auto* s = app.add_subcommand("synth", "Generate a synthetic sequence");
  auto* sp = s->add_option("--preset", sy.preset, "Preset name");
  auto* ss = s->add_option("--spec", sy.spec, "Scenario spec file");
  sp->excludes(ss);
  s->add_option("--out", sy.out, "Output directory")->required();

  OverlayOptions ov;
  auto* o = app.add_subcommand("overlay", "Draw result boxes onto copies of the frames");
  o->add_option("--seq", ov.seq, "Sequence directory")->required();
  o->add_option("--res", ov.res, "MOT-format result file")->required();
  o->add_option("--out", ov.out, "Output directory")->required();

  AblateOptions ab;
  auto* a = app.add_subcommand("ablate", "Run the component ablation lattice on a preset");
  a->add_option("--preset", ab.preset, "Preset name")->required();
  a->add_option("--out", ab.out, "Output CSV table")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kSuccess : kUsage;
  }
  if (s->parsed() && sy.preset.empty() && sy.spec.empty()) {
    err << "synth: one of --preset or --spec is required\nRun with --help for more information.\n";
    return kUsage;
  }

  auto previous = log::set_sink([&err](std::string_view msg) { err << "warning: " << msg << '\n'; });
  struct Restore {
    log::Sink& sink;
    ~Restore() { log::set_sink(std::move(sink)); }
  } restore{previous};

  try {
    if (t->parsed()) return cmd_track(track, out);
    if (e->parsed()) return cmd_eval(ev, out);
    if (s->parsed()) return cmd_synth(sy, out);
    if (o->parsed()) return cmd_overlay(ov, out);
    if (a->parsed()) return cmd_ablate(ab, out);
  } catch (const ParseError& ex) {
    err << "error: " << ex.what() << '\n';
    return kUsage;
  } catch (const InputError& ex) {
    err << "error: " << ex.what() << '\n';
    return kUsage;
  } catch (const std::exception& ex) {
    err << "internal error: " << ex.what() << '\n';
    return kInternal;
  }
  return kUsage;
}

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<const char*> argv{"sftrack"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace sftrack::cli
