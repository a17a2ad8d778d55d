#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "imae/data.hpp"
#include "imae/nn.hpp"

namespace imae {

// ---------------------------------------------------------------------------
// Clustering
// ---------------------------------------------------------------------------

struct ClusterResult {
  std::vector<int> assignments;  // cluster id in [0, k) per row
  Matrix centroids;              // k x dim
  double inertia = 0.0;          // sum of squared distances to the assigned centroid
  int iterations = 0;            // Lloyd updates performed
  std::vector<double> inertia_history;  // after the seeding and after every update
};

/// Lloyd iterations from k-means++ seeding until the assignment stops changing
/// or `max_iters` updates have run. A cluster that empties is re-seeded at the
/// point farthest from its current centroid. Ties go to the lower cluster id.
ClusterResult kmeans(const Matrix& points, int k, Rng& rng, int max_iters = 300);

/// Row -> column assignment maximizing the summed weight of a square matrix
/// (Hungarian method, O(n^3), exact on integer weights).
std::vector<int> max_weight_matching(const std::vector<std::vector<std::int64_t>>& weight);

/// k x k table, entry [c][l] counts points in cluster c with label l.
std::vector<std::vector<std::int64_t>> contingency(std::span<const int> assignments,
                                                   std::span<const int> labels, int k);

/// Best fraction of points whose cluster maps to their label under a
/// one-to-one cluster -> label map (cluster matching accuracy).
double rand_index(std::span<const int> assignments, std::span<const int> labels, int k);

// ---------------------------------------------------------------------------
// Model diagnostics
// ---------------------------------------------------------------------------

/// Mean over samples and latent units of s (1 - s), s the sigmoid latent
/// activation. ConfigError for a non-sigmoid latent layer.
double sigma_prime(const Network& net, const Matrix& data);

/// Deterministic reconstruction (a VAE decodes its mean), in chunks of rows.
Matrix reconstruct(const Network& net, const Matrix& batch);

struct RobustnessRow {
  NoiseSpec noise;
  double mean_l2 = 0.0;
};

/// Test-time noise grid: mask p in {0, 0.3, 0.5, 0.75} then Gaussian sigma in
/// {0.03, 0.15, 0.35, 0.45}.
std::vector<NoiseSpec> default_robustness_grid();

/// For each spec: corrupt the test images once, reconstruct, and report the
/// per-image mean squared L2 distance to the clean images.
std::vector<RobustnessRow> robustness_sweep(const Network& net, const Dataset& test,
                                            const std::vector<NoiseSpec>& specs, Rng& rng);

struct ClusterEvalOptions {
  int iterations = 50;
  Index n = 1000;
  int k = 10;
  int max_iters = 300;
  /// Corruption for the noisy pass; kind none skips it.
  NoiseSpec noise = NoiseSpec::gaussian(0.2);

  friend bool operator==(const ClusterEvalOptions&, const ClusterEvalOptions&) = default;
};

struct ClusterEvalResult {
  double rand_clean = 0.0;
  std::optional<double> rand_noisy;
  std::vector<double> per_iteration_clean;
  std::vector<double> per_iteration_noisy;
  std::vector<std::uint64_t> seeds;  // one per iteration
};

/// Each iteration draws its own seed from `rng`, samples n test points,
/// encodes them, clusters the codes with k-means and scores the clusters
/// against the labels; the noisy pass corrupts the same sample, re-encodes
/// and re-clusters. Means are accumulated in iteration order.
ClusterEvalResult cluster_eval(const Network& net, const Dataset& test, const ClusterEvalOptions& opt,
                               Rng& rng);

struct EvalReport {
  std::string model;
  std::vector<RobustnessRow> robustness;
  std::optional<double> rand_clean;
  std::optional<double> rand_noisy;
  std::string cluster_noise = "none";
  std::optional<double> sigma_prime;
  int iterations = 0;
  std::vector<std::uint64_t> seeds;
  std::string config;  // resolved configuration text the report was produced under

  std::string to_json() const;
  /// Long format: `model,metric,noise,value`.
  std::string to_csv() const;
  void write(const std::filesystem::path& json_path, const std::filesystem::path& csv_path) const;
};

/// `label,z0,...,z{l-1}` with 12 significant digits.
void export_codes(const Network& net, const Dataset& data, const std::filesystem::path& path);

struct CodeTable {
  std::vector<int> labels;
  Matrix codes;
};

CodeTable read_codes(const std::filesystem::path& path);

}  // namespace imae
