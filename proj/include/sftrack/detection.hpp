#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "sftrack/box.hpp"

namespace sftrack {

using Embedding = std::vector<double>;

/// One detector output for one frame.
struct Detection {
  int frame = 0;  // 1-based
  BoundingBox box;
  double score = 0.0;
  int class_id = 1;
  std::optional<Embedding> embedding;
};

inline double l2_norm(const Embedding& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

/// Returns false (leaving v untouched) for a zero vector.
inline bool normalize_in_place(Embedding& v) {
  const double n = l2_norm(v);
  if (!(n > 0.0) || !std::isfinite(n)) return false;
  for (double& x : v) x /= n;
  return true;
}

}  // namespace sftrack
