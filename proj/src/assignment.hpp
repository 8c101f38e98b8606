#pragma once

// Dense Hungarian algorithm (potentials + shortest augmenting paths), used by
// the evaluator to pair transitions inside one endpoint class.

#include <cstdint>
#include <limits>
#include <vector>

namespace smforge::detail {

/// Maximum-weight assignment on a rows x cols weight matrix where every pair
/// is admissible. Assigns min(rows, cols) pairs. Returns, per row, the
/// assigned column or -1.
inline std::vector<int> max_weight_assignment(
    const std::vector<std::vector<std::int64_t>>& weight) {
  const int rows = static_cast<int>(weight.size());
  if (rows == 0) return {};
  const int cols = static_cast<int>(weight.front().size());
  if (cols == 0) return std::vector<int>(rows, -1);

  const bool transpose = rows > cols;
  const int n = transpose ? cols : rows;  // n <= m
  const int m = transpose ? rows : cols;
  auto cost = [&](int i, int j) -> std::int64_t {
    return transpose ? -weight[j][i] : -weight[i][j];
  };

  constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;
  std::vector<std::int64_t> u(n + 1, 0), v(m + 1, 0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<std::int64_t> minv(m + 1, kInf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      std::int64_t delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const std::int64_t cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
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

  std::vector<int> result(rows, -1);
  for (int j = 1; j <= m; ++j) {
    if (p[j] == 0) continue;
    const int i = p[j] - 1;
    const int col = j - 1;
    if (transpose) {
      result[col] = i;
    } else {
      result[i] = col;
    }
  }
  return result;
}

}  // namespace smforge::detail
