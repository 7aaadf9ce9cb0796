#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sftrack/box.hpp"
#include "sftrack/config.hpp"
#include "sftrack/detection.hpp"
#include "sftrack/error.hpp"
#include "sftrack/image.hpp"
#include "sftrack/log.hpp"

namespace sftrack {

/// Per-channel (R, G, B) marginal histograms, each L1-normalized.
struct ColorHistogram {
  int bins_per_channel = 8;
  std::vector<double> values;  // channel-major: [R bins | G bins | B bins]
  bool degenerate = true;

  double at(int channel, int bin) const { return values[static_cast<std::size_t>(channel) * bins_per_channel + bin]; }
};

/// A crop either holds pixels or is the degenerate marker (empty image).
struct Crop {
  RawImage pixels;
  bool degenerate() const { return pixels.empty(); }
};

/// Rounds the box to the pixel grid and clamps it to the frame.
inline Crop extract_crop(const RawImage& frame, const BoundingBox& box) {
  if (frame.empty()) throw InputError("extract_crop: empty frame");
  if (!box.finite()) return {};
  const long l = std::clamp(std::lround(box.left), 0L, static_cast<long>(frame.width));
  const long t = std::clamp(std::lround(box.top), 0L, static_cast<long>(frame.height));
  const long r = std::clamp(std::lround(box.right()), 0L, static_cast<long>(frame.width));
  const long b = std::clamp(std::lround(box.bottom()), 0L, static_cast<long>(frame.height));
  if (r <= l || b <= t) return {};
  Crop c;
  c.pixels = RawImage(static_cast<int>(r - l), static_cast<int>(b - t));
  for (long y = t; y < b; ++y) {
    const auto* src = frame.pixel(static_cast<int>(l), static_cast<int>(y));
    std::copy(src, src + (r - l) * 3, c.pixels.pixel(0, static_cast<int>(y - t)));
  }
  return c;
}

namespace detail {

inline int bin_of(std::uint8_t v, int bins) { return static_cast<int>(v) * bins / 256; }

/// Accumulates counts of region [x0,x1)x[y0,y1) into dst (3*bins), normalized.
inline bool accumulate_histogram(const RawImage& img, int x0, int y0, int x1, int y1, int bins,
                                 double* dst) {
  std::fill(dst, dst + 3 * bins, 0.0);
  const long n = static_cast<long>(x1 - x0) * (y1 - y0);
  if (n <= 0) return false;
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) {
      const auto* p = img.pixel(x, y);
      for (int c = 0; c < 3; ++c) dst[c * bins + bin_of(p[c], bins)] += 1.0;
    }
  for (int i = 0; i < 3 * bins; ++i) dst[i] /= static_cast<double>(n);
  return true;
}

}  // namespace detail

/// Equal-width intervals of [0,255]: with 8 bins, 0-31 -> bin 0, 32-63 -> bin 1, ...
inline ColorHistogram color_histogram(const RawImage& crop, int bins_per_channel = 8) {
  ColorHistogram h;
  h.bins_per_channel = bins_per_channel;
  h.values.assign(static_cast<std::size_t>(3) * bins_per_channel, 0.0);
  if (crop.empty()) return h;
  h.degenerate = !detail::accumulate_histogram(crop, 0, 0, crop.width, crop.height,
                                               bins_per_channel, h.values.data());
  return h;
}

/// 1 minus the channel-averaged Hellinger form of the Bhattacharyya distance,
/// sqrt(1 - sum_i sqrt(p_i q_i)).
inline double hist_similarity(const ColorHistogram& a, const ColorHistogram& b) {
  if (a.degenerate || b.degenerate) return 0.0;
  if (a.bins_per_channel != b.bins_per_channel)
    throw InputError("hist_similarity: histograms have different bin counts");
  const int bins = a.bins_per_channel;
  double dist_sum = 0.0;
  for (int c = 0; c < 3; ++c) {
    double bc = 0.0;
    for (int i = 0; i < bins; ++i) bc += std::sqrt(a.at(c, i) * b.at(c, i));
    dist_sum += std::sqrt(std::max(0.0, 1.0 - bc));
  }
  return std::clamp(1.0 - dist_sum / 3.0, 0.0, 1.0);
}

/// 1 - MSE/255^2 between two equally sized RGB patches.
inline double patch_similarity(const RawImage& a, const RawImage& b) {
  if (a.empty() || b.empty()) return 0.0;
  if (a.width != b.width || a.height != b.height)
    throw InputError("patch_similarity: patch sizes differ");
  double sse = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = static_cast<double>(a.data[i]) - b.data[i];
    sse += d * d;
  }
  const double mse = sse / static_cast<double>(a.data.size());
  return std::clamp(1.0 - mse / (255.0 * 255.0), 0.0, 1.0);
}

inline RawImage make_patch(const RawImage& crop, const PatchSize& size) {
  if (crop.empty()) return {};
  return resize_bilinear(crop, size.width, size.height);
}

/// Both crops resized to `patch` with bilinear interpolation, then compared
/// by normalized MSE.
inline double scaled_mse_similarity(const RawImage& a, const RawImage& b, const PatchSize& patch = {}) {
  if (a.empty() || b.empty()) return 0.0;
  return patch_similarity(make_patch(a, patch), make_patch(b, patch));
}

/// Cosine similarity with negative values clamped to zero. Inputs that are not
/// unit-norm are renormalized with a warning.
inline double embedding_similarity(const Embedding& a, const Embedding& b) {
  if (a.size() != b.size() || a.empty()) throw InputError("embedding_similarity: dimension mismatch");
  const double na = l2_norm(a), nb = l2_norm(b);
  if (!(na > 0.0) || !(nb > 0.0)) return 0.0;
  if (std::abs(na - 1.0) > 1e-6 || std::abs(nb - 1.0) > 1e-6)
    log::warn("embedding_similarity: non-unit embedding renormalized");
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return std::clamp(dot / (na * nb), 0.0, 1.0);
}

inline constexpr int kEmbeddingGridCols = 2;
inline constexpr int kEmbeddingGridRows = 4;

/// Hand-crafted stand-in for a Re-ID vector: the crop is split into a grid of
/// 2 columns x 4 rows, each cell contributes its per-channel histogram, and
/// the concatenation is L2-normalized. Degenerate crops give std::nullopt.
inline std::optional<Embedding> handcrafted_embedding(const RawImage& crop, int bins_per_channel = 8) {
  if (crop.empty()) return std::nullopt;
  const int cell_dim = 3 * bins_per_channel;
  Embedding e(static_cast<std::size_t>(kEmbeddingGridCols) * kEmbeddingGridRows * cell_dim, 0.0);
  for (int r = 0; r < kEmbeddingGridRows; ++r) {
    const int y0 = r * crop.height / kEmbeddingGridRows;
    const int y1 = (r + 1) * crop.height / kEmbeddingGridRows;
    for (int c = 0; c < kEmbeddingGridCols; ++c) {
      const int x0 = c * crop.width / kEmbeddingGridCols;
      const int x1 = (c + 1) * crop.width / kEmbeddingGridCols;
      detail::accumulate_histogram(crop, x0, y0, x1, y1, bins_per_channel,
                                   &e[static_cast<std::size_t>(r * kEmbeddingGridCols + c) * cell_dim]);
    }
  }
  if (!normalize_in_place(e)) return std::nullopt;
  return e;
}

/// Per-track cache of the last matched crop's descriptors plus an
/// exponentially averaged embedding.
struct AppearanceMemory {
  ColorHistogram histogram;
  RawImage patch;
  std::optional<Embedding> embedding;

  /// Last-crop descriptors are replaced only by non-degenerate crops.
  void update(const ColorHistogram& h, const RawImage& p, const std::optional<Embedding>& emb,
              double momentum) {
    if (!h.degenerate) histogram = h;
    if (!p.empty()) patch = p;
    if (!emb) return;
    if (!embedding || embedding->size() != emb->size()) {
      embedding = emb;
      return;
    }
    Embedding blended(emb->size());
    for (std::size_t i = 0; i < blended.size(); ++i)
      blended[i] = momentum * (*embedding)[i] + (1.0 - momentum) * (*emb)[i];
    if (normalize_in_place(blended)) embedding = std::move(blended);
    else embedding = emb;
  }
};

/// (frame, detection index within that frame) -> unit embedding.
using EmbeddingTable = std::map<std::pair<int, int>, Embedding>;

/// Rows `frame,det_index,v1,...,vD`; vectors are renormalized to unit length.
inline EmbeddingTable parse_embeddings(std::string_view text, const std::string& source = {}) {
  EmbeddingTable table;
  std::size_t dim = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = kv::trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;

    std::vector<double> fields;
    std::size_t start = 0;
    while (start <= line.size()) {
      auto comma = line.find(',', start);
      if (comma == std::string_view::npos) comma = line.size();
      const std::string_view tok = kv::trim(line.substr(start, comma - start));
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (tok.empty() || ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(v))
        throw ParseError(source, line_no, "malformed embedding field '" + std::string(tok) + "'");
      fields.push_back(v);
      start = comma + 1;
    }
    if (fields.size() < 3) throw ParseError(source, line_no, "embedding row needs frame, det_index and a vector");
    const double fr = fields[0], di = fields[1];
    if (fr != std::floor(fr) || di != std::floor(di) || fr < 1 || di < 0)
      throw ParseError(source, line_no, "frame must be a positive integer and det_index non-negative");
    Embedding e(fields.begin() + 2, fields.end());
    if (dim == 0) dim = e.size();
    else if (e.size() != dim)
      throw ParseError(source, line_no,
                       "embedding dimension " + std::to_string(e.size()) + " differs from " + std::to_string(dim));
    if (!normalize_in_place(e)) throw ParseError(source, line_no, "zero embedding vector");
    table[{static_cast<int>(fr), static_cast<int>(di)}] = std::move(e);
  }
  return table;
}

inline EmbeddingTable load_embeddings(const std::string& path) {
  return parse_embeddings(read_text_file(path), path);
}

}  // namespace sftrack
