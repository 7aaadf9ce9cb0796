#include <gtest/gtest.h>

#include <cmath>
#include <array>

#include "sftrack/appearance.hpp"
#include "sftrack/rng.hpp"
#include "test_support.hpp"

using namespace sftrack;

namespace {

RawImage upscale_nearest(const RawImage& src, int factor) {
  RawImage out(src.width * factor, src.height * factor);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) {
      const auto* p = src.pixel(x / factor, y / factor);
      std::copy(p, p + 3, out.pixel(x, y));
    }
  return out;
}

/// Random piecewise-constant image made of 4x4 blocks.
RawImage blocky(Xorshift64Star& rng, int w, int h) {
  RawImage img(w, h);
  std::vector<std::array<std::uint8_t, 3>> palette(static_cast<std::size_t>((w / 4 + 1) * (h / 4 + 1)));
  for (auto& c : palette)
    for (auto& v : c) v = static_cast<std::uint8_t>(rng.below(256));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const auto& c = palette[static_cast<std::size_t>((y / 4) * (w / 4 + 1) + x / 4)];
      std::copy(c.begin(), c.end(), img.pixel(x, y));
    }
  return img;
}

ColorHistogram from_channels(std::vector<double> r, std::vector<double> g, std::vector<double> b) {
  ColorHistogram h;
  h.bins_per_channel = static_cast<int>(r.size());
  h.values = r;
  h.values.insert(h.values.end(), g.begin(), g.end());
  h.values.insert(h.values.end(), b.begin(), b.end());
  h.degenerate = false;
  return h;
}

}  // namespace

TEST(ColorHistogram, AllRedCrop) {
  const auto h = color_histogram(test_util::solid(6, 5, 255, 0, 0));
  EXPECT_FALSE(h.degenerate);
  EXPECT_DOUBLE_EQ(h.at(0, 7), 1.0);
  EXPECT_DOUBLE_EQ(h.at(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(h.at(2, 0), 1.0);
}

TEST(ColorHistogram, BinBoundaryAt32) {
  const auto a = color_histogram(test_util::solid(2, 2, 31, 31, 31));
  const auto b = color_histogram(test_util::solid(2, 2, 32, 32, 32));
  EXPECT_DOUBLE_EQ(a.at(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(b.at(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(color_histogram(test_util::solid(1, 1, 224, 223, 255)).at(0, 7), 1.0);
  EXPECT_DOUBLE_EQ(color_histogram(test_util::solid(1, 1, 224, 223, 255)).at(1, 6), 1.0);
}

TEST(ColorHistogram, EvenMixSplitsMass) {
  RawImage img(4, 1);
  for (int x = 0; x < 4; ++x) img.pixel(x, 0)[1] = x % 2 ? 200 : 10;
  const auto h = color_histogram(img);
  EXPECT_DOUBLE_EQ(h.at(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(h.at(1, 6), 0.5);
}

TEST(ColorHistogram, EmptyCropIsDegenerate) {
  const auto h = color_histogram(RawImage{});
  EXPECT_TRUE(h.degenerate);
  for (double v : h.values) EXPECT_EQ(v, 0.0);
}

TEST(ColorHistogramProperty, ChannelsSumToOneAndMatchCounting) {
  Xorshift64Star rng(31);
  for (int i = 0; i < 200; ++i) {
    const int w = 1 + static_cast<int>(rng.below(30)), h = 1 + static_cast<int>(rng.below(30));
    const auto img = test_util::random_image(rng, w, h);
    const int bins = 1 + static_cast<int>(rng.below(16));
    const auto hist = color_histogram(img, bins);
    for (int c = 0; c < 3; ++c) {
      std::vector<double> counts(bins, 0.0);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          // bin k covers [256k/bins, 256(k+1)/bins)
          const int v = img.pixel(x, y)[c];
          int k = 0;
          while ((k + 1) * 256 <= v * bins) ++k;
          counts[k] += 1.0;
        }
      double sum = 0.0;
      for (int k = 0; k < bins; ++k) {
        ASSERT_NEAR(hist.at(c, k), counts[k] / (w * h), 1e-12);
        sum += hist.at(c, k);
      }
      ASSERT_NEAR(sum, 1.0, 1e-9);
    }
  }
}

TEST(HistSimilarity, IdenticalAndDisjoint) {
  const auto a = color_histogram(test_util::solid(3, 3, 10, 10, 10));
  const auto b = color_histogram(test_util::solid(3, 3, 40, 40, 40));
  EXPECT_DOUBLE_EQ(hist_similarity(a, a), 1.0);
  EXPECT_DOUBLE_EQ(hist_similarity(a, b), 0.0);
}

TEST(HistSimilarity, OneChannelHalfOverlap) {
  const std::vector<double> one{1, 0, 0, 0, 0, 0, 0, 0};
  const std::vector<double> half{0.5, 0.5, 0, 0, 0, 0, 0, 0};
  const auto a = from_channels(one, one, one);
  const auto b = from_channels(half, one, one);
  const double d = std::sqrt(1.0 - std::sqrt(0.5));
  EXPECT_NEAR(d, 0.5412, 5e-5);
  EXPECT_NEAR(hist_similarity(a, b), 1.0 - d / 3.0, 1e-12);
  EXPECT_NEAR(hist_similarity(a, b), 0.8196, 5e-5);
}

TEST(HistSimilarity, DegenerateGivesZero) {
  const auto a = color_histogram(test_util::solid(3, 3, 10, 10, 10));
  EXPECT_EQ(hist_similarity(a, color_histogram(RawImage{})), 0.0);
}

TEST(ScaledMse, ConstantImages) {
  const auto black = test_util::solid(10, 7, 0, 0, 0);
  EXPECT_DOUBLE_EQ(scaled_mse_similarity(black, black), 1.0);
  EXPECT_DOUBLE_EQ(scaled_mse_similarity(black, test_util::solid(3, 9, 255, 255, 255)), 0.0);
  const double s = scaled_mse_similarity(black, test_util::solid(20, 20, 128, 128, 128));
  EXPECT_DOUBLE_EQ(s, 1.0 - 16384.0 / 65025.0);
  EXPECT_NEAR(s, 0.748, 5e-4);
}

TEST(ScaledMse, EmptyCropGivesZero) {
  EXPECT_EQ(scaled_mse_similarity(RawImage{}, test_util::solid(2, 2, 0, 0, 0)), 0.0);
}

TEST(AppearanceProperty, SymmetricAndBounded) {
  Xorshift64Star rng(77);
  for (int i = 0; i < 100; ++i) {
    const auto a = test_util::random_image(rng, 2 + static_cast<int>(rng.below(40)), 2 + static_cast<int>(rng.below(40)));
    const auto b = test_util::random_image(rng, 2 + static_cast<int>(rng.below(40)), 2 + static_cast<int>(rng.below(40)));
    const double h1 = hist_similarity(color_histogram(a), color_histogram(b));
    const double h2 = hist_similarity(color_histogram(b), color_histogram(a));
    ASSERT_EQ(h1, h2);
    ASSERT_GE(h1, 0.0);
    ASSERT_LE(h1, 1.0);
    const double m1 = scaled_mse_similarity(a, b), m2 = scaled_mse_similarity(b, a);
    ASSERT_EQ(m1, m2);
    ASSERT_GE(m1, 0.0);
    ASSERT_LE(m1, 1.0);
    ASSERT_EQ(scaled_mse_similarity(a, a), 1.0);
  }
}

TEST(EmbeddingSimilarity, CosineWithClamp) {
  EXPECT_DOUBLE_EQ(embedding_similarity({0.6, 0.8}, {0.6, 0.8}), 1.0);
  EXPECT_DOUBLE_EQ(embedding_similarity({1, 0}, {0, 1}), 0.0);
  EXPECT_DOUBLE_EQ(embedding_similarity({1, 0}, {-1, 0}), 0.0);
  EXPECT_THROW(embedding_similarity({1, 0}, {1, 0, 0}), InputError);
}

TEST(EmbeddingSimilarity, NonUnitInputRenormalizedWithWarning) {
  log::ScopedCapture capture;
  EXPECT_NEAR(embedding_similarity({3, 4}, {0.6, 0.8}), 1.0, 1e-12);
  EXPECT_EQ(capture.messages().size(), 1u);
}

TEST(ExtractCrop, InsideBounds) {
  Xorshift64Star rng(4);
  const auto frame = test_util::random_image(rng, 20, 10);
  const auto c = extract_crop(frame, {3, 2, 5, 4});
  ASSERT_FALSE(c.degenerate());
  EXPECT_EQ(c.pixels.width, 5);
  EXPECT_EQ(c.pixels.height, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 5; ++x)
      for (int ch = 0; ch < 3; ++ch) ASSERT_EQ(c.pixels.pixel(x, y)[ch], frame.pixel(x + 3, y + 2)[ch]);
}

TEST(ExtractCrop, ClampedAtRightEdge) {
  const auto frame = test_util::solid(20, 10, 1, 2, 3);
  const auto c = extract_crop(frame, {15, 0, 10, 5});
  EXPECT_EQ(c.pixels.width, 5);
  EXPECT_EQ(c.pixels.height, 5);
}

TEST(ExtractCrop, FullyOutsideIsDegenerate) {
  const auto frame = test_util::solid(20, 10, 1, 2, 3);
  const auto c = extract_crop(frame, {30, 30, 5, 5});
  EXPECT_TRUE(c.degenerate());
  EXPECT_EQ(hist_similarity(color_histogram(c.pixels), color_histogram(frame)), 0.0);
  EXPECT_EQ(scaled_mse_similarity(c.pixels, frame), 0.0);
  EXPECT_FALSE(handcrafted_embedding(c.pixels).has_value());
  EXPECT_THROW(extract_crop(RawImage{}, {0, 0, 1, 1}), InputError);
}

TEST(HandcraftedEmbedding, UnitNormAndDimension) {
  Xorshift64Star rng(8);
  const auto e = handcrafted_embedding(test_util::random_image(rng, 16, 32));
  ASSERT_TRUE(e.has_value());
  EXPECT_EQ(e->size(), 192u);
  EXPECT_NEAR(l2_norm(*e), 1.0, 1e-12);
}

TEST(HandcraftedEmbeddingProperty, UpscaleInvarianceOnGridAlignedCrops) {
  Xorshift64Star rng(12);
  for (int i = 0; i < 200; ++i) {
    const auto crop = blocky(rng, 2 * (2 + static_cast<int>(rng.below(20))), 4 * (2 + static_cast<int>(rng.below(10))));
    const auto a = handcrafted_embedding(crop);
    const auto b = handcrafted_embedding(upscale_nearest(crop, 2));
    ASSERT_TRUE(a && b);
    ASSERT_NEAR(embedding_similarity(*a, *b), 1.0, 1e-12);
  }
}

TEST(HandcraftedEmbeddingProperty, UpscaleInvarianceOnArbitraryCrops) {
  // odd sizes shift the 2x4 cell boundaries by half a pixel
  Xorshift64Star rng(13);
  for (int i = 0; i < 500; ++i) {
    const auto crop = blocky(rng, 16 + static_cast<int>(rng.below(48)), 16 + static_cast<int>(rng.below(48)));
    const auto a = handcrafted_embedding(crop);
    const auto b = handcrafted_embedding(upscale_nearest(crop, 2));
    ASSERT_TRUE(a && b);
    ASSERT_GE(embedding_similarity(*a, *b), 0.99);
  }
}

TEST(AppearanceMemory, EmaStaysUnitNorm) {
  Xorshift64Star rng(9);
  AppearanceMemory mem;
  for (int i = 0; i < 200; ++i) {
    Embedding e(16);
    for (auto& v : e) v = rng.gaussian();
    normalize_in_place(e);
    mem.update(ColorHistogram{}, RawImage{}, e, 0.9);
    ASSERT_NEAR(l2_norm(*mem.embedding), 1.0, 1e-9);
  }
}

TEST(AppearanceMemory, EmaBlendsWithMomentum) {
  AppearanceMemory mem;
  mem.update(ColorHistogram{}, RawImage{}, Embedding{1, 0}, 0.9);
  mem.update(ColorHistogram{}, RawImage{}, Embedding{0, 1}, 0.9);
  const double n = std::hypot(0.9, 0.1);
  EXPECT_NEAR((*mem.embedding)[0], 0.9 / n, 1e-12);
  EXPECT_NEAR((*mem.embedding)[1], 0.1 / n, 1e-12);
}

TEST(AppearanceMemory, DegenerateCropKeepsLastDescriptors) {
  AppearanceMemory mem;
  const auto img = test_util::solid(4, 4, 50, 60, 70);
  mem.update(color_histogram(img), img, std::nullopt, 0.9);
  mem.update(color_histogram(RawImage{}), RawImage{}, std::nullopt, 0.9);
  EXPECT_FALSE(mem.histogram.degenerate);
  EXPECT_EQ(mem.patch, img);
}

TEST(LoadEmbeddings, UnitRow) {
  const auto t = parse_embeddings("3,0,0.6,0.8\n");
  ASSERT_EQ(t.size(), 1u);
  const auto& e = t.at({3, 0});
  EXPECT_DOUBLE_EQ(e[0], 0.6);
  EXPECT_DOUBLE_EQ(e[1], 0.8);
}

TEST(LoadEmbeddings, RenormalizesAndSkipsComments) {
  const auto t = parse_embeddings("# frame,det,vec\n1,2,3,4\n\n2,0,0,5\n");
  ASSERT_EQ(t.size(), 2u);
  EXPECT_DOUBLE_EQ(t.at({1, 2})[0], 0.6);
  EXPECT_DOUBLE_EQ(t.at({2, 0})[1], 1.0);
}

TEST(LoadEmbeddings, EmptyFileGivesEmptyTable) { EXPECT_TRUE(parse_embeddings("").empty()); }

TEST(LoadEmbeddings, DimensionMismatchReportsLine) {
  try {
    parse_embeddings("1,0,1,0\n2,0,1,0,0\n", "emb.txt");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(LoadEmbeddings, MalformedRows) {
  EXPECT_THROW(parse_embeddings("1,0\n"), ParseError);
  EXPECT_THROW(parse_embeddings("1,0,abc\n"), ParseError);
  EXPECT_THROW(parse_embeddings("0,0,1\n"), ParseError);
  EXPECT_THROW(parse_embeddings("1.5,0,1\n"), ParseError);
  EXPECT_THROW(parse_embeddings("1,0,0,0\n"), ParseError);
}
