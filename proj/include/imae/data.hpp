#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "imae/ndcore.hpp"

namespace imae {

/// Images normalized to [0,1], one per row, with aligned integer labels.
struct Dataset {
  Matrix images;
  std::vector<int> labels;
  std::string name;

  Index size() const { return images.rows(); }
  Index features() const { return images.cols(); }

  /// Rows `indices` in the given order, labels aligned.
  Dataset select(const std::vector<Index>& indices) const;
  /// First `n` rows in file order.
  Dataset head(Index n) const;
};

enum class NoiseKind { none, mask, gaussian };

/// `level` is the zeroing probability p for mask noise and the standard
/// deviation for Gaussian noise.
struct NoiseSpec {
  NoiseKind kind = NoiseKind::none;
  double level = 0.0;

  static NoiseSpec none() { return {}; }
  static NoiseSpec mask(double p) { return {NoiseKind::mask, p}; }
  static NoiseSpec gaussian(double sigma) { return {NoiseKind::gaussian, sigma}; }

  void validate() const;
  std::string to_string() const;  // "none", "mask:0.3", "gaussian:0.3"
  static NoiseSpec parse(const std::string& text);

  friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

struct IdxPaths {
  std::filesystem::path images;
  std::filesystem::path labels;
};

/// Canonical MNIST file names inside `dir`. `train` selects the 60k split.
IdxPaths mnist_paths(const std::filesystem::path& dir, bool train);

/// Reads an IDX image/label pair. Pixels are scaled by 1/255.
Dataset load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path, std::string name = {});

/// Writes `ds` back to IDX; pixels are mapped with round(x*255) clamped to a byte.
void write_idx(const Dataset& ds, const std::filesystem::path& images_path,
               const std::filesystem::path& labels_path, int image_rows = 28, int image_cols = 28);

/// Returns a corrupted copy; the input is never modified and nothing is clipped.
Matrix corrupt(const Matrix& batch, const NoiseSpec& noise, Rng& rng);

/// Partition of [0, n) into consecutive batches; the last one may be short.
/// With `shuffle` the order is a Fisher-Yates permutation drawn from `rng`.
std::vector<std::vector<Index>> batches(Index n, Index batch_size, Rng& rng, bool shuffle);

/// `n` rows drawn without replacement, in draw order.
Dataset sample_subset(const Dataset& ds, Index n, Rng& rng);

/// Fisher-Yates permutation of [0, n) (first `k` positions when k < n).
std::vector<Index> permutation(Index n, Rng& rng, Index k = -1);

}  // namespace imae
