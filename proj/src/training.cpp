#include "imae/training.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

namespace imae {

void TrainConfig::validate() const {
  arch.validate();
  loss.validate();
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("train: learning_rate must be finite and >= 0");
  }
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if ((loss.variant == Variant::VAE) != arch.vae) {
    throw ConfigError("train: VAE loss and VAE architecture must be used together");
  }
}

std::string layers_to_string(const std::vector<LayerSpec>& layers) {
  std::string out;
  for (const auto& l : layers) {
    if (!out.empty()) out += ",";
    out += std::to_string(l.width) + ":" + std::string(to_string(l.activation));
  }
  return out;
}

std::vector<LayerSpec> parse_layers(const std::string& text) {
  std::vector<LayerSpec> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError("layers: expected width:activation, got '" + item + "'");
    LayerSpec l;
    try {
      l.width = std::stoll(item.substr(0, colon));
    } catch (const std::exception&) {
      throw ConfigError("layers: bad width in '" + item + "'");
    }
    l.activation = parse_activation(item.substr(colon + 1));
    out.push_back(l);
  }
  return out;
}

void TrainConfig::write(ConfigWriter& out) const {
  out.section("model")
      .put("variant", std::string(to_string(loss.variant)))
      .put("lambda", loss.lambda)
      .put("noise", loss.noise.to_string())
      .put("input_width", static_cast<std::int64_t>(arch.input_width))
      .put("layers", layers_to_string(arch.layers))
      .put("latent_index", static_cast<std::int64_t>(arch.latent_index))
      .put("tied", arch.tied)
      .put("vae", arch.vae)
      .put("biases", arch.biases);
  out.section("train")
      .put("learning_rate", learning_rate)
      .put("epochs", epochs)
      .put("batch_size", batch_size)
      .put("seed", seed)
      .put("shuffle", shuffle);
}

std::string TrainConfig::to_text() const {
  ConfigWriter w;
  write(w);
  return w.str();
}

void TrainConfig::read(const ConfigFile& cfg) {
  if (auto v = cfg.get("model", "variant")) loss.variant = parse_variant(*v);
  loss.lambda = cfg.get_double("model", "lambda", loss.lambda);
  if (auto v = cfg.get("model", "noise")) loss.noise = NoiseSpec::parse(*v);
  arch.input_width = cfg.get_int("model", "input_width", arch.input_width);
  if (auto v = cfg.get("model", "layers")) arch.layers = parse_layers(*v);
  arch.latent_index = cfg.get_int("model", "latent_index", arch.latent_index);
  arch.tied = cfg.get_bool("model", "tied", arch.tied);
  arch.vae = cfg.get_bool("model", "vae", arch.vae);
  arch.biases = cfg.get_bool("model", "biases", arch.biases);
  learning_rate = cfg.get_double("train", "learning_rate", learning_rate);
  epochs = cfg.get_int("train", "epochs", epochs);
  batch_size = cfg.get_int("train", "batch_size", batch_size);
  seed = cfg.get_u64("train", "seed", seed);
  shuffle = cfg.get_bool("train", "shuffle", shuffle);
}

TrainConfig TrainConfig::from_text(const std::string& text) {
  const ConfigFile cfg = ConfigFile::parse(text, "<embedded config>");
  TrainConfig out;
  out.read(cfg);
  cfg.reject_unused();
  return out;
}

namespace {

Matrix gather_rows(const Matrix& m, const std::vector<Index>& rows) {
  // Batches from an unshuffled order are contiguous; copy them in one block.
  bool contiguous = true;
  for (std::size_t i = 1; i < rows.size() && contiguous; ++i) contiguous = rows[i] == rows[i - 1] + 1;
  if (contiguous) return m.middleRows(rows.front(), static_cast<Index>(rows.size()));
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
  return out;
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const Dataset& ds, const EpochCallback& on_epoch) {
  cfg.validate();
  Rng init_rng(derive_seed(cfg.seed, "init"));
  return train_from(init_params<double>(cfg.arch, init_rng), cfg, ds, on_epoch);
}

TrainResult train_from(Network init, const TrainConfig& cfg, const Dataset& ds,
                       const EpochCallback& on_epoch) {
  cfg.validate();
  if (cfg.arch.input_width != ds.features()) {
    throw ShapeError("train: architecture input width " + std::to_string(cfg.arch.input_width) +
                     " does not match dataset feature width " + std::to_string(ds.features()));
  }
  if (cfg.batch_size > ds.size()) throw ArgumentError("train: batch_size exceeds dataset size");
  if (!(init.architecture() == cfg.arch)) throw ConfigError("train: initial network does not match config");
  check_compatible(init, cfg.loss);

  Rng batch_rng(derive_seed(cfg.seed, "batching"));
  Rng noise_rng(derive_seed(cfg.seed, "corruption"));
  Rng sample_rng(derive_seed(cfg.seed, "sampling"));
  const bool denoising = cfg.loss.variant == Variant::DAE;

  TrainResult result{std::move(init), {}};
  Network& net = result.net;
  for (std::int64_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    LossBreakdown sum;
    for (const auto& rows : batches(ds.size(), cfg.batch_size, batch_rng, cfg.shuffle)) {
      const Matrix clean = gather_rows(ds.images, rows);
      const Matrix input = denoising ? corrupt(clean, cfg.loss.noise, noise_rng) : clean;
      const ForwardTrace trace = forward(net, input, net.is_vae() ? &sample_rng : nullptr);
      const LossBreakdown loss = total_loss(net, cfg.loss, trace, clean);
      if (!std::isfinite(loss.total)) {
        std::ostringstream os;
        os << "training diverged at epoch " << epoch << ": reconstruction=" << loss.reconstruction
           << " latent=" << loss.latent << " total=" << loss.total;
        throw DivergenceError(os.str());
      }
      const double w = static_cast<double>(rows.size());
      sum.reconstruction += w * loss.reconstruction;
      sum.latent += w * loss.latent;
      sum.total += w * loss.total;
      apply_gradient_step(net, backward(net, trace, cfg.loss, clean), cfg.learning_rate);
    }
    const double n = static_cast<double>(ds.size());
    EpochRecord rec{epoch, {sum.reconstruction / n, sum.latent / n, sum.total / n},
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()};
    result.history.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return result;
}

void write_history_csv(const TrainHistory& history, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "epoch,total,reconstruction,latent,seconds\n";
  for (const auto& e : history.epochs) {
    out << e.epoch << ',' << format_double(e.loss.total) << ',' << format_double(e.loss.reconstruction)
        << ',' << format_double(e.loss.latent) << ',' << format_double(e.seconds) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace imae
