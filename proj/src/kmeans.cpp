#include <limits>

#include "imae/eval.hpp"

namespace imae {

namespace {

double squared_distance(const Matrix& a, Index i, const Matrix& b, Index j) {
  return (a.row(i) - b.row(j)).squaredNorm();
}

Matrix seed_plus_plus(const Matrix& points, int k, Rng& rng) {
  const Index n = points.rows();
  Matrix centroids(k, points.cols());
  centroids.row(0) = points.row(static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(n))));
  Vector d2(n);
  for (Index i = 0; i < n; ++i) d2[i] = squared_distance(points, i, centroids, 0);
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Index pick = n - 1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (Index i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
    }
    centroids.row(c) = points.row(pick);
    for (Index i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(points, i, centroids, c));
  }
  return centroids;
}

// Returns true if any assignment changed.
bool assign(const Matrix& points, const Matrix& centroids, std::vector<int>& assignment,
            Vector& dist, double& inertia) {
  bool changed = false;
  inertia = 0.0;
  for (Index i = 0; i < points.rows(); ++i) {
    int best = 0;
    double best_d = squared_distance(points, i, centroids, 0);
    for (Index c = 1; c < centroids.rows(); ++c) {
      const double d = squared_distance(points, i, centroids, c);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    if (assignment[static_cast<std::size_t>(i)] != best) changed = true;
    assignment[static_cast<std::size_t>(i)] = best;
    dist[i] = best_d;
    inertia += best_d;
  }
  return changed;
}

}  // namespace

ClusterResult kmeans(const Matrix& points, int k, Rng& rng, int max_iters) {
  if (k < 1) throw ArgumentError("kmeans: k must be >= 1");
  if (k > points.rows()) {
    throw ArgumentError("kmeans: k=" + std::to_string(k) + " exceeds point count " + std::to_string(points.rows()));
  }
  if (max_iters < 0) throw ArgumentError("kmeans: max_iters must be >= 0");

  const Index n = points.rows();
  ClusterResult r;
  r.centroids = seed_plus_plus(points, k, rng);
  r.assignments.assign(static_cast<std::size_t>(n), -1);
  Vector dist(n);
  assign(points, r.centroids, r.assignments, dist, r.inertia);
  r.inertia_history.push_back(r.inertia);

  std::vector<Index> counts(static_cast<std::size_t>(k));
  for (int it = 0; it < max_iters; ++it) {
    r.centroids.setZero();
    std::fill(counts.begin(), counts.end(), 0);
    for (Index i = 0; i < n; ++i) {
      const int c = r.assignments[static_cast<std::size_t>(i)];
      r.centroids.row(c) += points.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        r.centroids.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
        continue;
      }
      Index far = 0;
      for (Index i = 1; i < n; ++i) {
        if (dist[i] > dist[far]) far = i;
      }
      r.centroids.row(c) = points.row(far);
      dist[far] = 0.0;  // not picked again for another empty cluster
    }
    const bool changed = assign(points, r.centroids, r.assignments, dist, r.inertia);
    r.inertia_history.push_back(r.inertia);
    ++r.iterations;
    if (!changed) break;
  }
  return r;
}

}  // namespace imae
