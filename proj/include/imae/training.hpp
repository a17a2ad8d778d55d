#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "imae/config.hpp"
#include "imae/data.hpp"
#include "imae/nn.hpp"

namespace imae {

/// Everything needed to reproduce one training run.
struct TrainConfig {
  Architecture arch;
  LossSpec loss;
  double learning_rate = 0.05;
  std::int64_t epochs = 2000;
  std::int64_t batch_size = 500;
  std::uint64_t seed = 0;
  bool shuffle = false;

  void validate() const;

  /// `[model]` and `[train]` sections; doubles are written round-trip exact.
  std::string to_text() const;
  void write(ConfigWriter& out) const;
  /// Reads the sections written by `write`; keys missing from `cfg` keep the
  /// values already in `*this`.
  void read(const ConfigFile& cfg);
  static TrainConfig from_text(const std::string& text);

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

std::string layers_to_string(const std::vector<LayerSpec>& layers);
std::vector<LayerSpec> parse_layers(const std::string& text);

struct EpochRecord {
  std::int64_t epoch = 0;  // 1-based
  LossBreakdown loss;      // sample-weighted mean over the epoch's batches
  double seconds = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
};

struct TrainResult {
  Network net;
  TrainHistory history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mini-batch gradient descent, theta <- theta - lr * grad after every batch.
///
/// Sub-streams for initialization, batch order, corruption and VAE sampling
/// are derived from `cfg.seed`, so the result is a pure function of the
/// config and the dataset. DAE batches are corrupted afresh each time they
/// are visited and the loss is taken against the clean batch. A non-finite
/// loss aborts with DivergenceError.
TrainResult train(const TrainConfig& cfg, const Dataset& ds, const EpochCallback& on_epoch = {});

/// Same as `train` but starting from `init` instead of a fresh initialization.
TrainResult train_from(Network init, const TrainConfig& cfg, const Dataset& ds,
                       const EpochCallback& on_epoch = {});

/// `epoch,total,reconstruction,latent,seconds`
void write_history_csv(const TrainHistory& history, const std::filesystem::path& path);

// Checkpoint layout, all integers little-endian:
//   "IMAE" | u32 version | u32 n | n bytes of TrainConfig::to_text()
//   | u32 block count | per block: u32 name length, name, u32 rows, u32 cols,
//     rows*cols IEEE-754 binary64 values (row-major)
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const Network& net, const TrainConfig& cfg, const std::filesystem::path& path);

struct Checkpoint {
  Network net;
  TrainConfig config;
};

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace imae
