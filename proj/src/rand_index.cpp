#include <algorithm>
#include <limits>

#include "imae/eval.hpp"

namespace imae {

std::vector<int> max_weight_matching(const std::vector<std::vector<std::int64_t>>& weight) {
  const std::size_t n = weight.size();
  for (const auto& row : weight) {
    if (row.size() != n) throw ArgumentError("max_weight_matching: matrix must be square");
  }
  if (n == 0) return {};

  // Shortest augmenting path formulation with potentials on cost = -weight,
  // 1-based with a virtual column 0.
  constexpr std::int64_t inf = std::numeric_limits<std::int64_t>::max() / 4;
  std::vector<std::int64_t> u(n + 1, 0), v(n + 1, 0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      std::int64_t delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const std::int64_t cur = -weight[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
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
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (std::size_t j = 1; j <= n; ++j) row_to_col[p[j] - 1] = static_cast<int>(j - 1);
  return row_to_col;
}

std::vector<std::vector<std::int64_t>> contingency(std::span<const int> assignments,
                                                   std::span<const int> labels, int k) {
  if (k < 1) throw ArgumentError("contingency: k must be >= 1");
  if (assignments.size() != labels.size()) {
    throw ArgumentError("rand_index: " + std::to_string(assignments.size()) + " assignments vs " +
                        std::to_string(labels.size()) + " labels");
  }
  std::vector<std::vector<std::int64_t>> table(static_cast<std::size_t>(k),
                                               std::vector<std::int64_t>(static_cast<std::size_t>(k), 0));
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    const int c = assignments[i];
    const int l = labels[i];
    if (c < 0 || c >= k || l < 0 || l >= k) {
      throw ArgumentError("rand_index: cluster/label value outside [0, " + std::to_string(k) + ")");
    }
    ++table[static_cast<std::size_t>(c)][static_cast<std::size_t>(l)];
  }
  return table;
}

double rand_index(std::span<const int> assignments, std::span<const int> labels, int k) {
  const auto table = contingency(assignments, labels, k);
  if (assignments.empty()) throw ArgumentError("rand_index: no points");
  const auto match = max_weight_matching(table);
  std::int64_t hits = 0;
  for (std::size_t c = 0; c < match.size(); ++c) hits += table[c][static_cast<std::size_t>(match[c])];
  return static_cast<double>(hits) / static_cast<double>(assignments.size());
}

}  // namespace imae
