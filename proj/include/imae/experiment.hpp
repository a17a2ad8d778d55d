#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "imae/config.hpp"
#include "imae/eval.hpp"
#include "imae/gradcheck.hpp"
#include "imae/training.hpp"

namespace imae {

enum class Scale { desk, paper };

std::string to_string(Scale scale);
Scale parse_scale(const std::string& text);

/// Model names used by experiments: AE, CAE, DAE-b (mask noise), DAE-g
/// (Gaussian noise), DAE (alias of DAE-b), IMAE and VAE.
LossSpec loss_for_model(const std::string& model);

/// Architecture presets: "shallow200", "shallow1000" and "deep" (with nh).
Architecture preset_architecture(const std::string& preset, Index nh, Index input_width = 784);

/// Dataset directory from IMAE_DATA_DIR, else "data/mnist".
std::filesystem::path default_data_dir();

/// One experiment with every default materialized.
///
/// Sections and keys:
///   [experiment] seed, scale, out
///   [data]       dir, dataset, train_images, test_images
///   [model]      variant, preset, nh, lambda, noise, tied, biases
///   [train]      learning_rate, epochs, batch_size, shuffle
///   [eval]       iterations, sample_size, clusters, max_iters, cluster_noise
struct ExperimentConfig {
  std::uint64_t seed = 0;
  Scale scale = Scale::desk;
  std::filesystem::path out = "runs";

  std::filesystem::path data_dir;
  std::string dataset = "mnist";
  Index train_images = 10000;
  Index test_images = 10000;

  std::string model = "IMAE";
  std::string preset = "shallow200";
  Index nh = 200;
  LossSpec loss = LossSpec::imae(1.0);
  bool tied = true;
  bool biases = true;

  double learning_rate = 0.05;
  std::int64_t epochs = 300;
  std::int64_t batch_size = 500;
  bool shuffle = false;

  ClusterEvalOptions cluster;

  /// Fills every key missing from `cfg` with the default implied by the
  /// scale, preset and model, then rejects keys that were never read.
  static ExperimentConfig resolve(const ConfigFile& cfg);
  static ExperimentConfig resolve_text(const std::string& text);

  /// Snapshot that resolves back to an identical config.
  std::string to_text() const;

  /// Training seed is derived from the master seed and the model name.
  TrainConfig train_config() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

struct ExperimentData {
  Dataset train;
  Dataset test;
};

/// Loads the first train_images / test_images rows of the train and test
/// splits. IoError names the expected files when they are missing.
ExperimentData load_experiment_data(const ExperimentConfig& cfg);

struct TrainArtifacts {
  std::filesystem::path checkpoint;
  std::filesystem::path history;
  std::filesystem::path config;
};

/// Trains one model and writes checkpoint.bin, history.csv and config.cfg
/// into `dir`.
TrainArtifacts run_training(const ExperimentConfig& cfg, const ExperimentData& data,
                            const std::filesystem::path& dir, std::ostream* log = nullptr);

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

/// `train`: resolves the config (overrides take precedence), trains and
/// writes the artifacts into the configured output directory.
TrainArtifacts cmd_train(const ConfigFile& cfg, std::ostream& log);

enum class Protocol { robustness, cluster, codes };

std::string to_string(Protocol protocol);
Protocol parse_protocol(const std::string& text);

struct EvalCommand {
  std::filesystem::path checkpoint;
  Protocol protocol = Protocol::robustness;
  std::filesystem::path data_dir;
  std::filesystem::path out = ".";
  std::uint64_t seed = 0;
  Index test_images = 10000;
  ClusterEvalOptions cluster;
  /// Cluster noise when not given: gaussian 0.2 for sigmoid shallow codes,
  /// gaussian 0.01 for the deep preset.
  bool cluster_noise_set = false;
};

/// `eval`: writes eval_<protocol>.json/.csv (or codes.csv) into `out` and
/// returns the paths written.
std::vector<std::filesystem::path> cmd_eval(const EvalCommand& cmd, std::ostream& log);

struct GradcheckCommand {
  std::vector<Variant> variants;  // empty means all five
  std::uint64_t seed = 0;
  int seeds = 20;
  GradcheckOptions options;
  /// Replaces the analytic gradient; used to exercise the failure path.
  GradientFn analytic;
};

/// `gradcheck`: one line per variant and block with the maximum error.
/// Returns true when every check passed.
bool cmd_gradcheck(const GradcheckCommand& cmd, std::ostream& out);

// ---------------------------------------------------------------------------
// Table reproduction
// ---------------------------------------------------------------------------

struct ReproduceOptions {
  /// table1, table2, table3, or shallow (tables 1 and 2 from one set of runs).
  std::string table = "table2";
  Scale scale = Scale::desk;
  std::optional<Index> nh;  // 200 for the shallow tables, 10 for table3
  std::uint64_t seed = 0;
  std::filesystem::path out = "runs";
  /// "section.key=value" applied to every sub-run after the table defaults.
  std::vector<std::string> overrides;
  /// Reuse a checkpoint already in the output directory when its embedded
  /// config matches the run that would produce it.
  bool reuse = true;
};

struct ModelRun {
  ExperimentConfig config;
  Network net;
  bool reused = false;
};

struct TableOutput {
  std::string id;    // table1, table2 or table3
  std::string csv;
  std::filesystem::path path;
};

struct ReproduceResult {
  std::vector<ModelRun> runs;
  std::vector<EvalReport> reports;  // one per run, same order
  std::vector<TableOutput> tables;
};

/// Resolved configs of every sub-run, in training order.
std::vector<ExperimentConfig> reproduce_plan(const ReproduceOptions& opt);

/// Trains (or reuses) every model of the table, evaluates them and writes
/// <table>.csv and reproduce.json into `opt.out`. DivergenceError from any
/// sub-run propagates.
ReproduceResult cmd_reproduce(const ReproduceOptions& opt, std::ostream& log);

/// Published numbers for side-by-side reading; nullopt where none was given.
std::optional<double> published_rand(const std::string& model, Index nh, bool noisy, const std::string& dataset);
std::optional<double> published_sigma_prime(const std::string& model, Index nh);
std::optional<double> published_robustness(const std::string& model, Index nh, const NoiseSpec& noise);

}  // namespace imae
