#include <gtest/gtest.h>

#include <filesystem>

#include "sftrack/io.hpp"
#include "sftrack/metrics.hpp"
#include "sftrack/ppm.hpp"
#include "sftrack/synthetic.hpp"
#include "test_support.hpp"

using namespace sftrack;
namespace fs = std::filesystem;

namespace {

synth::ScenarioSpec small_spec() {
  synth::ScenarioSpec s;
  s.name = "unit";
  s.seed = 5;
  s.frames = 12;
  s.width = 160;
  s.height = 120;
  synth::ObjectSpec a;
  a.width = 20;
  a.height = 14;
  a.x = 60;
  a.y = 50;
  synth::ObjectSpec b = a;
  b.x = 110;
  b.y = 80;
  b.vx = 1.5;
  b.class_id = 1;
  s.objects = {a, b};
  return s;
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = read_binary_file(e.path().string());
  return files;
}

}  // namespace

TEST(Synthetic, ZeroNoiseDetectionsEqualGroundTruth) {
  const synth::SyntheticScene scene(synth::preset("baseline"));
  for (int f = 1; f <= scene.spec().frames; ++f) {
    const auto ann = scene.annotate(f);
    ASSERT_EQ(ann.detections.size(), ann.ground_truth.size());
    for (const auto& d : ann.detections) {
      ASSERT_EQ(d.score, 1.0);
      ASSERT_TRUE(std::any_of(ann.ground_truth.begin(), ann.ground_truth.end(),
                              [&](const synth::GroundTruthRow& g) { return g.box == d.box && g.class_id == d.class_id; }));
    }
  }
}

TEST(Synthetic, ObjectsBelowKneeScoreBelowTau) {
  auto s = small_spec();
  s.noise.enabled = true;
  s.noise.knee_area = 400;  // both objects are 280 px^2
  s.noise.conf_low = 0.5;
  s.noise.conf_noise = 0.05;
  s.noise.position_jitter = 0.5;
  // the truncated noise adds at most 2 std
  EXPECT_LT(synth::base_confidence(s.noise, 280) + 2 * s.noise.conf_noise, 0.7);
  const synth::SyntheticScene scene(s);
  int n = 0;
  for (int f = 1; f <= s.frames; ++f)
    for (const auto& d : scene.annotate(f).detections) {
      ASSERT_LT(d.score, 0.7);
      ++n;
    }
  EXPECT_GT(n, 0);
}

TEST(Synthetic, ConfidenceCurve) {
  synth::NoiseModel n;
  n.conf_low = 0.4;
  n.conf_high = 0.9;
  n.knee_area = 100;
  EXPECT_DOUBLE_EQ(synth::base_confidence(n, 50), 0.4);
  EXPECT_DOUBLE_EQ(synth::base_confidence(n, 100), 0.4);
  EXPECT_DOUBLE_EQ(synth::base_confidence(n, 250), 0.65);
  EXPECT_DOUBLE_EQ(synth::base_confidence(n, 400), 0.9);
  EXPECT_DOUBLE_EQ(synth::base_confidence(n, 1e6), 0.9);
}

TEST(Synthetic, CameraPanMovesStaticObjectsBackwards) {
  auto s = small_spec();
  for (int k = 2; k <= s.frames; ++k) s.camera.push_back({k, 1.0, 0.0, 5.0, 0.0});
  const synth::SyntheticScene scene(s);
  for (int f = 2; f <= s.frames; ++f) {
    const auto prev = scene.object_box(0, f - 1), cur = scene.object_box(0, f);
    ASSERT_NEAR(cur.left - prev.left, -5.0, 1e-9);
    ASSERT_NEAR(cur.top - prev.top, 0.0, 1e-9);
    ASSERT_NEAR(cur.width, prev.width, 1e-9);
  }
}

TEST(Synthetic, InterFrameMotionMatchesScript) {
  auto s = small_spec();
  s.camera.push_back({3, 1.02, 2.0, 4.0, -3.0});
  const synth::SyntheticScene scene(s);
  EXPECT_NEAR(scene.inter_frame_motion(2).scale_x(), 1.0, 1e-12);
  const auto m = scene.inter_frame_motion(3);
  EXPECT_NEAR(m.scale_x(), 1.02, 1e-9);
  EXPECT_NEAR(std::atan2(m.linear(1, 0), m.linear(0, 0)) * 180.0 / std::numbers::pi, -2.0, 1e-9);
}

TEST(Synthetic, Presets) {
  const auto base = synth::preset("baseline");
  EXPECT_EQ(base.objects.size(), 5u);
  EXPECT_TRUE(base.camera.empty());
  EXPECT_FALSE(base.noise.enabled);

  const auto fast = synth::preset("fast_camera");
  double max_rot = 0, max_shift = 0;
  for (const auto& c : fast.camera) {
    max_rot = std::max(max_rot, std::abs(c.rotation_deg));
    max_shift = std::max(max_shift, std::hypot(c.tx, c.ty));
  }
  EXPECT_LE(max_rot, 3.0);
  EXPECT_GT(max_rot, 2.0);
  EXPECT_LE(max_shift, 15.0 + 1e-9);
  EXPECT_GT(max_shift, 10.0);

  const auto small = synth::preset("small_objects");
  EXPECT_EQ(small.width, 640);
  EXPECT_EQ(small.height, 480);
  for (const auto& o : small.objects) {
    EXPECT_GE(o.height, 8);
    EXPECT_LE(o.height, 14);
  }
  const synth::SyntheticScene scene(small);
  for (int f = 1; f <= small.frames; ++f)
    for (const auto& d : scene.annotate(f).detections) {
      ASSERT_GE(d.score, 0.3);
      ASSERT_LE(d.score, 0.65);
    }

  EXPECT_GT(synth::preset("occlusion").occluder_height, 0.0);
  EXPECT_THROW(synth::preset("nope"), InputError);
}

TEST(Synthetic, OcclusionPresetHasIgnoreRowsAndOccludedDetections) {
  const synth::SyntheticScene scene(synth::preset("occlusion"));
  int ignored = 0, partial = 0;
  for (int f = 1; f <= scene.spec().frames; ++f)
    for (const auto& g : scene.annotate(f).ground_truth) {
      ignored += g.ignore;
      partial += g.occlusion == 1;
      ASSERT_EQ(g.ignore, g.occluded_fraction > 0.9);
    }
  EXPECT_GT(ignored, 0);
  EXPECT_GT(partial, 0);
}

TEST(Synthetic, GroundTruthSelfEvaluation) {
  for (const auto& name : synth::preset_names()) {
    const synth::SyntheticScene scene(synth::preset(name));
    FrameBoxes gt;
    DetectionsByFrame dets;
    scene.annotate_all(gt, dets);
    const auto m = evaluate(gt, gt);
    EXPECT_DOUBLE_EQ(m.mota, 100.0) << name;
    EXPECT_DOUBLE_EQ(m.idf1, 1.0) << name;
  }
}

TEST(Synthetic, GenerateIsByteIdentical) {
  test_util::TempDir a("gen_a"), b("gen_b");
  auto s = small_spec();
  s.noise.enabled = true;
  s.noise.fp_rate = 0.5;
  s.camera.push_back({4, 1.01, 1.0, 3.0, 2.0});
  synth::generate(s, a.path().string());
  synth::generate(s, b.path().string());
  const auto fa = read_tree(a.path()), fb = read_tree(b.path());
  EXPECT_EQ(fa.size(), 4u + 12u);  // gt, det, seqinfo, scenario + frames
  EXPECT_EQ(fa, fb);
}

TEST(Synthetic, GeneratedSequenceLoads) {
  test_util::TempDir dir("gen_load");
  const auto s = small_spec();
  synth::generate(s, dir.path().string());
  const auto seq = load_sequence(dir.path().string());
  EXPECT_EQ(seq.manifest.seq_length, 12);
  EXPECT_EQ(seq.load_frame(5), synth::SyntheticScene(s).render(5));
  const auto gt = read_visdrone(dir.file("gt.txt"), VisdroneMode::GroundTruth).ground_truth;
  const auto det = read_mot_detections(dir.file("det.txt"));
  EXPECT_EQ(gt.at(1).size(), 2u);
  EXPECT_EQ(det.count, 24u);
  EXPECT_EQ(det.frames.at(1)[0].score, 1.0);
}

TEST(Synthetic, RenderDiffersAcrossSeeds) {
  auto s = small_spec();
  const auto a = synth::SyntheticScene(s).render(1);
  s.seed = 6;
  EXPECT_NE(a, synth::SyntheticScene(s).render(1));
}

TEST(ScenarioFile, TextRoundTrip) {
  for (const auto& name : synth::preset_names()) {
    const auto spec = synth::preset(name);
    const auto text = synth::to_text(spec);
    const auto back = synth::parse_scenario(text);
    EXPECT_EQ(synth::to_text(back), text) << name;
    EXPECT_EQ(back.objects.size(), spec.objects.size());
    EXPECT_EQ(back.camera.size(), spec.camera.size());
    EXPECT_EQ(synth::SyntheticScene(back).render(7), synth::SyntheticScene(spec).render(7)) << name;
  }
}

TEST(ScenarioFile, Errors) {
  EXPECT_THROW(synth::parse_scenario("frames = 10\n"), ParseError);
  EXPECT_THROW(synth::parse_scenario("seed = 1\nbogus = 2\n"), ParseError);
  EXPECT_THROW(synth::parse_scenario("seed = 1\n[object]\ncolor = 1,2\n"), ParseError);
  EXPECT_THROW(synth::parse_scenario("seed = 1\n[object]\nmotion = zigzag\n"), ParseError);
  EXPECT_THROW(synth::parse_scenario("seed = 1\n[object]\nwidth = 0\n"), ParseError);
  EXPECT_THROW(synth::parse_scenario("seed = 1\n[lights]\nx = 1\n"), ParseError);
  try {
    synth::parse_scenario("seed = 1\n\n[camera]\nzoom = 2\n", "s.txt");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
}

TEST(ScenarioFile, MinimalSpec) {
  const auto s = synth::parse_scenario("seed = 9\nframes = 3\n[object]\nx = 50\ny = 40\n[object]\nx = 90\n");
  EXPECT_EQ(s.seed, 9u);
  ASSERT_EQ(s.objects.size(), 2u);
  EXPECT_EQ(s.objects[1].x, 90);
  EXPECT_EQ(s.objects[1].y, 0);
}
