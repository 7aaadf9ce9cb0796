#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace sftrack {

/// Marker for pairs that must never be matched.
inline constexpr double kForbidden = std::numeric_limits<double>::infinity();

/// Dense row-major cost matrix; rows are tracks, columns detections.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(static_cast<std::size_t>(rows) * cols, fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double& operator()(int r, int c) { return values_[static_cast<std::size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return values_[static_cast<std::size_t>(r) * cols_ + c]; }
  bool forbidden(int r, int c) const { return !std::isfinite((*this)(r, c)); }

  const std::vector<double>& values() const { return values_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> values_;
};

struct Assignment {
  std::vector<std::pair<int, int>> matches;  // (row, col), ascending by row
  std::vector<int> unmatched_rows;
  std::vector<int> unmatched_cols;
};

namespace detail {

/// Shortest-augmenting-path Kuhn-Munkres with row/column potentials, for
/// n <= m. Returns the column assigned to each row. O(n^2 m).
template <typename T, typename CostFn>
std::vector<int> kuhn_munkres(int n, int m, CostFn&& cost) {
  const T inf = std::numeric_limits<T>::max() / 4;
  std::vector<T> u(n + 1, T{}), v(m + 1, T{});
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  std::vector<T> minv(m + 1);
  std::vector<char> used(m + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      T delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const T cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= m; ++j)
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace detail

/// Minimum-cost assignment of the smaller side of a rectangular matrix.
/// Returns row -> column (or -1). Works on any ordered arithmetic type; with
/// integer-valued costs the result is exact.
template <typename T>
std::vector<int> solve_min_cost(const std::vector<T>& cost, int rows, int cols) {
  if (rows == 0 || cols == 0) return std::vector<int>(rows, -1);
  if (rows <= cols)
    return detail::kuhn_munkres<T>(rows, cols, [&](int r, int c) { return cost[static_cast<std::size_t>(r) * cols + c]; });
  const auto col_to_row =
      detail::kuhn_munkres<T>(cols, rows, [&](int c, int r) { return cost[static_cast<std::size_t>(r) * cols + c]; });
  std::vector<int> row_to_col(rows, -1);
  for (int c = 0; c < cols; ++c)
    if (col_to_row[c] >= 0) row_to_col[col_to_row[c]] = c;
  return row_to_col;
}

/// Optimal assignment over a cost matrix with FORBIDDEN entries. Forbidden
/// entries are replaced by a penalty larger than any sum of finite costs, so
/// the solver first maximizes the number of feasible pairs and then minimizes
/// their cost; pairs landing on a penalty are reported unmatched. Matches whose
/// similarity (1 - cost) is below `min_similarity` are demoted afterwards.
inline Assignment hungarian(const CostMatrix& cost,
                            double min_similarity = -std::numeric_limits<double>::infinity()) {
  Assignment out;
  const int rows = cost.rows(), cols = cost.cols();
  if (cost.empty()) {
    for (int r = 0; r < rows; ++r) out.unmatched_rows.push_back(r);
    for (int c = 0; c < cols; ++c) out.unmatched_cols.push_back(c);
    return out;
  }

  double max_abs = 0.0;
  for (double v : cost.values())
    if (std::isfinite(v)) max_abs = std::max(max_abs, std::abs(v));
  const double penalty = (max_abs + 1.0) * (std::min(rows, cols) + 1) * 2.0;
  std::vector<double> work(cost.values());
  for (double& v : work)
    if (!std::isfinite(v)) v = penalty;

  const auto row_to_col = solve_min_cost(work, rows, cols);
  std::vector<char> col_used(cols, 0);
  for (int r = 0; r < rows; ++r) {
    const int c = row_to_col[r];
    if (c < 0 || cost.forbidden(r, c) || (1.0 - cost(r, c)) < min_similarity) {
      out.unmatched_rows.push_back(r);
      continue;
    }
    out.matches.emplace_back(r, c);
    col_used[c] = 1;
  }
  for (int c = 0; c < cols; ++c)
    if (!col_used[c]) out.unmatched_cols.push_back(c);
  return out;
}

}  // namespace sftrack
