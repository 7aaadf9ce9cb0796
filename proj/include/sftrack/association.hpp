#pragma once

#include <span>
#include <vector>

#include "sftrack/appearance.hpp"
#include "sftrack/box.hpp"
#include "sftrack/hungarian.hpp"

namespace sftrack {

/// High-confidence stage: IoU times embedding cosine, or IoU alone when either
/// side has no embedding.
inline double fuse_first(double iou_value, std::optional<double> embed_sim) {
  return embed_sim ? iou_value * *embed_sim : iou_value;
}

/// Low-confidence stage: product of IoU, histogram similarity and scaled-image
/// MSE similarity.
inline double fuse_second(double iou_value, double hist_sim, double mse_sim) {
  return iou_value * hist_sim * mse_sim;
}

/// Non-owning view of whatever appearance descriptors one side carries.
struct AppearanceView {
  const ColorHistogram* histogram = nullptr;
  const RawImage* patch = nullptr;
  const Embedding* embedding = nullptr;
};

struct AssociationCandidate {
  BoundingBox box;
  int class_id = 0;
  AppearanceView appearance;
};

enum class Stage { First, Second };

struct StageOptions {
  Stage stage = Stage::First;
  double iou_gate = 0.1;
  bool use_embeddings = true;  // first stage only
  bool traditional = true;     // second stage only
};

struct StageMatrix {
  CostMatrix cost;
  int embedding_terms = 0;  // entries whose similarity used an embedding
};

/// cost = 1 - fused similarity; FORBIDDEN when classes differ or IoU is below
/// the stage gate.
inline StageMatrix build_stage_matrix(std::span<const AssociationCandidate> tracks,
                                      std::span<const AssociationCandidate> detections,
                                      const StageOptions& opt) {
  StageMatrix out{CostMatrix(static_cast<int>(tracks.size()), static_cast<int>(detections.size()), kForbidden), 0};
  for (std::size_t r = 0; r < tracks.size(); ++r) {
    const auto& t = tracks[r];
    for (std::size_t c = 0; c < detections.size(); ++c) {
      const auto& d = detections[c];
      if (t.class_id != d.class_id) continue;
      const double overlap = iou(t.box, d.box);
      if (overlap < opt.iou_gate || overlap <= 0.0) continue;
      double sim = overlap;
      if (opt.stage == Stage::First) {
        std::optional<double> es;
        if (opt.use_embeddings && t.appearance.embedding && d.appearance.embedding) {
          es = embedding_similarity(*t.appearance.embedding, *d.appearance.embedding);
          ++out.embedding_terms;
        }
        sim = fuse_first(overlap, es);
      } else if (opt.traditional) {
        const double hs = (t.appearance.histogram && d.appearance.histogram)
                              ? hist_similarity(*t.appearance.histogram, *d.appearance.histogram)
                              : 0.0;
        const double ms = (t.appearance.patch && d.appearance.patch)
                              ? patch_similarity(*t.appearance.patch, *d.appearance.patch)
                              : 0.0;
        sim = fuse_second(overlap, hs, ms);
      }
      out.cost(static_cast<int>(r), static_cast<int>(c)) = 1.0 - sim;
    }
  }
  return out;
}

}  // namespace sftrack
