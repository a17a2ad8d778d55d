#include "imae/experiment.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>

#include "json.hpp"

namespace imae {

namespace fs = std::filesystem;

std::string to_string(Scale scale) { return scale == Scale::desk ? "desk" : "paper"; }

Scale parse_scale(const std::string& text) {
  if (text == "desk") return Scale::desk;
  if (text == "paper") return Scale::paper;
  throw ConfigError("unknown scale '" + text + "' (expected desk or paper)");
}

LossSpec loss_for_model(const std::string& model) {
  if (model == "AE") return LossSpec::ae();
  if (model == "CAE") return LossSpec::cae(0.1);
  if (model == "DAE" || model == "DAE-b") return LossSpec::dae(NoiseSpec::mask(0.3));
  if (model == "DAE-g") return LossSpec::dae(NoiseSpec::gaussian(0.3));
  if (model == "IMAE") return LossSpec::imae(1.0);
  if (model == "VAE") return LossSpec::vae();
  throw ConfigError("unknown model '" + model + "' (expected AE, CAE, DAE-b, DAE-g, DAE, IMAE or VAE)");
}

namespace {

bool is_deep(const std::string& preset) { return preset == "deep"; }

Index preset_width(const std::string& preset) {
  if (preset == "shallow200") return 200;
  if (preset == "shallow1000") return 1000;
  if (preset == "deep") return 10;
  throw ConfigError("unknown preset '" + preset + "' (expected shallow200, shallow1000 or deep)");
}

}  // namespace

Architecture preset_architecture(const std::string& preset, Index nh, Index input_width) {
  if (is_deep(preset)) {
    if (nh < 1) throw ConfigError("deep preset: nh must be >= 1");
    return Architecture::deep(input_width, nh, false);
  }
  const Index width = preset_width(preset);
  if (nh != width) {
    throw ConfigError("preset " + preset + " has " + std::to_string(width) + " hidden units, not " +
                      std::to_string(nh));
  }
  return Architecture::shallow(input_width, width, true);
}

fs::path default_data_dir() {
  if (const char* env = std::getenv("IMAE_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return "data/mnist";
}

ExperimentConfig ExperimentConfig::resolve(const ConfigFile& cfg) {
  ExperimentConfig c;
  c.seed = cfg.get_u64("experiment", "seed", 0);
  c.scale = parse_scale(cfg.get_string("experiment", "scale", "desk"));
  c.out = cfg.get_string("experiment", "out", "runs");
  const bool paper = c.scale == Scale::paper;

  c.data_dir = cfg.get_string("data", "dir", default_data_dir().string());
  c.dataset = cfg.get_string("data", "dataset", "mnist");
  if (c.dataset != "mnist" && c.dataset != "fmnist") {
    throw ConfigError("data.dataset must be mnist or fmnist, got '" + c.dataset + "'");
  }
  c.train_images = cfg.get_int("data", "train_images", paper ? 60000 : 10000);
  c.test_images = cfg.get_int("data", "test_images", 10000);
  if (c.train_images < 1 || c.test_images < 1) throw ConfigError("data: image counts must be >= 1");

  c.model = cfg.get_string("model", "variant", "IMAE");
  const LossSpec base = loss_for_model(c.model);
  c.preset = cfg.get_string("model", "preset", "shallow200");
  const bool deep = is_deep(c.preset);
  c.nh = cfg.get_int("model", "nh", preset_width(c.preset));
  c.loss = base;
  c.loss.lambda = cfg.get_double("model", "lambda", base.lambda);
  if (const auto noise = cfg.get("model", "noise")) c.loss.noise = NoiseSpec::parse(*noise);
  c.loss.validate();
  c.tied = cfg.get_bool("model", "tied", !deep);
  c.biases = cfg.get_bool("model", "biases", true);

  c.learning_rate = cfg.get_double("train", "learning_rate", deep ? 0.005 : 0.05);
  c.epochs = cfg.get_int("train", "epochs", paper ? 2000 : (deep ? 150 : 300));
  c.batch_size = cfg.get_int("train", "batch_size", 500);
  c.shuffle = cfg.get_bool("train", "shuffle", false);

  c.cluster.iterations = static_cast<int>(cfg.get_int("eval", "iterations", deep && !paper ? 10 : 50));
  c.cluster.n = cfg.get_int("eval", "sample_size", 1000);
  c.cluster.k = static_cast<int>(cfg.get_int("eval", "clusters", 10));
  c.cluster.max_iters = static_cast<int>(cfg.get_int("eval", "max_iters", 300));
  const NoiseSpec default_noise =
      deep ? NoiseSpec::gaussian(c.dataset == "fmnist" ? 0.1 : 0.01) : NoiseSpec::gaussian(0.2);
  c.cluster.noise = NoiseSpec::parse(cfg.get_string("eval", "cluster_noise", default_noise.to_string()));
  c.cluster.noise.validate();
  if (c.cluster.iterations < 1 || c.cluster.n < 1 || c.cluster.k < 1 || c.cluster.max_iters < 0) {
    throw ConfigError("eval: iterations, sample_size and clusters must be >= 1");
  }

  cfg.reject_unused();
  c.train_config().validate();
  return c;
}

ExperimentConfig ExperimentConfig::resolve_text(const std::string& text) {
  return resolve(ConfigFile::parse(text));
}

std::string ExperimentConfig::to_text() const {
  ConfigWriter w;
  w.section("experiment").put("seed", seed).put("scale", to_string(scale)).put("out", out.string());
  w.section("data")
      .put("dir", data_dir.string())
      .put("dataset", dataset)
      .put("train_images", static_cast<std::int64_t>(train_images))
      .put("test_images", static_cast<std::int64_t>(test_images));
  w.section("model")
      .put("variant", model)
      .put("preset", preset)
      .put("nh", static_cast<std::int64_t>(nh))
      .put("lambda", loss.lambda)
      .put("noise", loss.noise.to_string())
      .put("tied", tied)
      .put("biases", biases);
  w.section("train")
      .put("learning_rate", learning_rate)
      .put("epochs", epochs)
      .put("batch_size", batch_size)
      .put("shuffle", shuffle);
  w.section("eval")
      .put("iterations", cluster.iterations)
      .put("sample_size", static_cast<std::int64_t>(cluster.n))
      .put("clusters", cluster.k)
      .put("max_iters", cluster.max_iters)
      .put("cluster_noise", cluster.noise.to_string());
  return w.str();
}

TrainConfig ExperimentConfig::train_config() const {
  TrainConfig t;
  t.arch = preset_architecture(preset, nh);
  t.arch.tied = tied;
  t.arch.biases = biases;
  if (loss.variant == Variant::VAE) {
    if (!is_deep(preset)) throw ConfigError("VAE requires the deep preset");
    t.arch = Architecture::deep(t.arch.input_width, nh, true);
    t.arch.tied = tied;
    t.arch.biases = biases;
  }
  t.loss = loss;
  t.learning_rate = learning_rate;
  t.epochs = epochs;
  t.batch_size = batch_size;
  t.seed = derive_seed(seed, "train/" + model);
  t.shuffle = shuffle;
  return t;
}

ExperimentData load_experiment_data(const ExperimentConfig& cfg) {
  ExperimentData d;
  for (const bool train : {true, false}) {
    const IdxPaths p = mnist_paths(cfg.data_dir, train);
    for (const auto& f : {p.images, p.labels}) {
      if (!fs::exists(f)) {
        throw IoError("dataset file missing: " + f.string() +
                      " (set IMAE_DATA_DIR or data.dir to a directory holding train-images-idx3-ubyte, "
                      "train-labels-idx1-ubyte, t10k-images-idx3-ubyte, t10k-labels-idx1-ubyte)");
      }
    }
    Dataset ds = load_idx(p.images, p.labels, cfg.dataset + (train ? "-train" : "-test"));
    const Index want = train ? cfg.train_images : cfg.test_images;
    if (want > ds.size()) {
      throw ConfigError("requested " + std::to_string(want) + " images but " + p.images.string() + " holds " +
                        std::to_string(ds.size()));
    }
    (train ? d.train : d.test) = ds.head(want);
  }
  return d;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

EpochCallback progress(std::ostream* log, const std::string& model, std::int64_t epochs) {
  if (log == nullptr) return {};
  return [log, model, epochs](const EpochRecord& r) {
    if (r.epoch == 1 || r.epoch % 25 == 0 || r.epoch == epochs) {
      *log << "  " << model << " epoch " << r.epoch << "/" << epochs << " loss " << r.loss.total
           << " (rec " << r.loss.reconstruction << ", latent " << r.loss.latent << ")\n";
      log->flush();
    }
  };
}

}  // namespace

TrainArtifacts run_training(const ExperimentConfig& cfg, const ExperimentData& data, const fs::path& dir,
                            std::ostream* log) {
  fs::create_directories(dir);
  const TrainConfig tc = cfg.train_config();
  TrainArtifacts a{dir / "checkpoint.bin", dir / "history.csv", dir / "config.cfg"};
  write_text(a.config, cfg.to_text());
  const TrainResult r = train(tc, data.train, progress(log, cfg.model, tc.epochs));
  save_checkpoint(r.net, tc, a.checkpoint);
  write_history_csv(r.history, a.history);
  return a;
}

TrainArtifacts cmd_train(const ConfigFile& cfg, std::ostream& log) {
  const ExperimentConfig c = ExperimentConfig::resolve(cfg);
  log << "resolved config:\n" << c.to_text() << "\n";
  if (c.scale == Scale::paper) log << "warning: paper scale trains for " << c.epochs << " epochs on the full set\n";
  const ExperimentData data = load_experiment_data(c);
  const TrainArtifacts a = run_training(c, data, c.out, &log);
  log << "wrote " << a.checkpoint.string() << "\n";
  return a;
}

std::string to_string(Protocol protocol) {
  switch (protocol) {
    case Protocol::robustness: return "robustness";
    case Protocol::cluster: return "cluster";
    case Protocol::codes: return "codes";
  }
  return "?";
}

Protocol parse_protocol(const std::string& text) {
  if (text == "robustness") return Protocol::robustness;
  if (text == "cluster") return Protocol::cluster;
  if (text == "codes") return Protocol::codes;
  throw ConfigError("unknown protocol '" + text + "' (expected robustness, cluster or codes)");
}

namespace {

bool deep_net(const Network& net) { return net.layer_count() > 2; }

Dataset load_test(const fs::path& dir, Index n) {
  const IdxPaths p = mnist_paths(dir, false);
  if (!fs::exists(p.images) || !fs::exists(p.labels)) {
    throw IoError("dataset file missing: " + p.images.string() + " or " + p.labels.string());
  }
  Dataset ds = load_idx(p.images, p.labels, "test");
  return ds.head(std::min(n, ds.size()));
}

}  // namespace

std::vector<fs::path> cmd_eval(const EvalCommand& cmd, std::ostream& log) {
  const Checkpoint ck = load_checkpoint(cmd.checkpoint);
  const Network& net = ck.net;
  const Dataset test = load_test(cmd.data_dir, cmd.test_images);
  if (test.features() != net.architecture().input_width) {
    throw ConfigError("checkpoint expects " + std::to_string(net.architecture().input_width) +
                      " inputs but the dataset has " + std::to_string(test.features()));
  }
  fs::create_directories(cmd.out);
  const std::string name(to_string(ck.config.loss.variant));
  Rng rng(derive_seed(cmd.seed, "eval/" + to_string(cmd.protocol)));

  if (cmd.protocol == Protocol::codes) {
    const fs::path path = cmd.out / "codes.csv";
    export_codes(net, test, path);
    log << "wrote " << path.string() << "\n";
    return {path};
  }

  EvalReport report;
  report.model = name;
  report.config = ck.config.to_text();
  if (cmd.protocol == Protocol::robustness) {
    report.robustness = robustness_sweep(net, test, default_robustness_grid(), rng);
    for (const auto& row : report.robustness) log << row.noise.to_string() << "  " << row.mean_l2 << "\n";
  } else {
    ClusterEvalOptions opt = cmd.cluster;
    if (!cmd.cluster_noise_set) opt.noise = NoiseSpec::gaussian(deep_net(net) ? 0.01 : 0.2);
    const ClusterEvalResult r = cluster_eval(net, test, opt, rng);
    report.rand_clean = r.rand_clean;
    report.rand_noisy = r.rand_noisy;
    report.cluster_noise = opt.noise.to_string();
    report.iterations = opt.iterations;
    report.seeds = r.seeds;
    if (!net.is_vae() && net.latent_activation() == Activation::sigmoid) {
      report.sigma_prime = sigma_prime(net, test.images);
    }
    log << "rand_clean " << r.rand_clean;
    if (r.rand_noisy) log << "  rand_noisy " << *r.rand_noisy;
    log << "\n";
  }
  const fs::path json = cmd.out / ("eval_" + to_string(cmd.protocol) + ".json");
  const fs::path csv = cmd.out / ("eval_" + to_string(cmd.protocol) + ".csv");
  report.write(json, csv);
  log << "wrote " << json.string() << " and " << csv.string() << "\n";
  return {json, csv};
}

bool cmd_gradcheck(const GradcheckCommand& cmd, std::ostream& out) {
  std::vector<Variant> variants = cmd.variants;
  if (variants.empty()) variants = {Variant::AE, Variant::CAE, Variant::DAE, Variant::IMAE, Variant::VAE};
  bool all_ok = true;
  for (const Variant v : variants) {
    std::map<std::string, double> worst;
    std::vector<std::string> order;
    bool ok = true;
    double max_error = 0.0;
    for (int s = 0; s < cmd.seeds; ++s) {
      const GradcheckReport r = gradcheck(v, cmd.seed + static_cast<std::uint64_t>(s), cmd.options, cmd.analytic);
      ok = ok && r.passed;
      max_error = std::max(max_error, r.max_error);
      for (const auto& b : r.blocks) {
        if (!worst.contains(b.name)) order.push_back(b.name);
        worst[b.name] = std::max(worst[b.name], b.max_error);
      }
    }
    out << (ok ? "PASS " : "FAIL ") << to_string(v) << "  seeds=" << cmd.seeds << "  max_rel_err=" << max_error
        << "\n";
    for (const auto& name : order) out << "    " << name << "  " << worst[name] << "\n";
    all_ok = all_ok && ok;
  }
  return all_ok;
}

// ---------------------------------------------------------------------------
// Published values
// ---------------------------------------------------------------------------

namespace {

using ModelValues = std::map<std::string, std::vector<double>>;

// Rand index (percent), columns: clean, noisy.
const std::map<Index, ModelValues>& shallow_rand() {
  static const std::map<Index, ModelValues> v = {
      {200,
       {{"AE", {53.5, 53.5}}, {"CAE", {17.9, 17.8}}, {"DAE-b", {53.8, 54.0}}, {"DAE-g", {51.3, 50.2}},
        {"IMAE", {54.4, 55.2}}}},
      {1000,
       {{"AE", {55.7, 55.6}}, {"CAE", {17.3, 17.3}}, {"DAE-b", {55.6, 55.3}}, {"DAE-g", {51.4, 50.5}},
        {"IMAE", {55.8, 55.6}}}},
  };
  return v;
}

// sigma' (units of 1e-2); CAE has no published value.
const std::map<Index, std::map<std::string, double>>& shallow_sigma() {
  static const std::map<Index, std::map<std::string, double>> v = {
      {200, {{"AE", 1.9}, {"DAE-b", 1.5}, {"DAE-g", 1.11}, {"IMAE", 5.9}}},
      {1000, {{"AE", 3.9}, {"DAE-b", 4.5}, {"DAE-g", 2.5}, {"IMAE", 5.8}}},
  };
  return v;
}

// Mean reconstruction loss on the robustness grid, in grid order.
const std::map<Index, ModelValues>& shallow_robustness() {
  static const std::map<Index, ModelValues> v = {
      {200,
       {{"AE", {37.4, 97.4, 133.0, 176.3, 50.4, 122.2, 163.6, 176.6}},
        {"CAE", {141.1, 148.3, 157.7, 206.4, 143.4, 151.6, 158.5, 160.7}},
        {"DAE-b", {71.3, 70.5, 97.1, 152.0, 86.6, 154.6, 193.0, 205.3}},
        {"DAE-g", {158.2, 148.7, 167.2, 226.4, 133.5, 72.2, 77.9, 91.5}},
        {"IMAE", {103.8, 125.0, 138.9, 155.8, 112.5, 135.7, 148.1, 152.7}}}},
      {1000,
       {{"AE", {12.8, 110.2, 145.7, 183.1, 44.3, 130.5, 178.1, 190.9}},
        {"CAE", {129.4, 140.0, 157.7, 254.3, 133.2, 149.1, 156.9, 159.5}},
        {"DAE-b", {70.5, 68.9, 97.6, 151.7, 86.6, 165.4, 210.0, 226.1}},
        {"DAE-g", {263.3, 247.4, 283.6, 419.6, 202.4, 78.6, 77.5, 92.0}},
        {"IMAE", {53.7, 106.5, 132.9, 161.8, 73.4, 126.9, 156.6, 166.4}}}},
  };
  return v;
}

// Deep models, keyed by dataset then nh; columns clean, noisy.
const std::map<std::string, std::map<Index, ModelValues>>& deep_rand() {
  static const std::map<std::string, std::map<Index, ModelValues>> v = {
      {"mnist",
       {{5, {{"VAE", {70.1, 61.0}}, {"IMAE", {76.8, 68.7}}}},
        {10, {{"VAE", {57.2, 51.7}}, {"IMAE", {75.7, 60.5}}}},
        {20, {{"VAE", {52.9, 36.0}}, {"IMAE", {54.8, 42.2}}}}}},
      {"fmnist",
       {{5, {{"VAE", {40.3, 38.1}}, {"IMAE", {55.5, 55.0}}}},
        {10, {{"VAE", {42.3, 41.8}}, {"IMAE", {59.3, 55.3}}}},
        {20, {{"VAE", {42.4, 41.3}}, {"IMAE", {56.0, 55.3}}}}}},
  };
  return v;
}

template <typename Map, typename Key>
const typename Map::mapped_type* find(const Map& m, const Key& k) {
  const auto it = m.find(k);
  return it == m.end() ? nullptr : &it->second;
}

}  // namespace

std::optional<double> published_rand(const std::string& model, Index nh, bool noisy, const std::string& dataset) {
  const std::size_t col = noisy ? 1 : 0;
  if (model == "VAE" || (model == "IMAE" && nh <= 20)) {
    const auto* by_nh = find(deep_rand(), dataset);
    const auto* models = by_nh ? find(*by_nh, nh) : nullptr;
    const auto* vals = models ? find(*models, model) : nullptr;
    return vals ? std::optional((*vals)[col]) : std::nullopt;
  }
  if (dataset != "mnist") return std::nullopt;
  const auto* models = find(shallow_rand(), nh);
  const auto* vals = models ? find(*models, model) : nullptr;
  return vals ? std::optional((*vals)[col]) : std::nullopt;
}

std::optional<double> published_sigma_prime(const std::string& model, Index nh) {
  const auto* models = find(shallow_sigma(), nh);
  const auto* v = models ? find(*models, model) : nullptr;
  return v ? std::optional(*v * 1e-2) : std::nullopt;
}

std::optional<double> published_robustness(const std::string& model, Index nh, const NoiseSpec& noise) {
  const auto* models = find(shallow_robustness(), nh);
  const auto* vals = models ? find(*models, model) : nullptr;
  if (vals == nullptr) return std::nullopt;
  const auto grid = default_robustness_grid();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] == noise) return (*vals)[i];
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Reproduction
// ---------------------------------------------------------------------------

namespace {

struct TableSpec {
  std::vector<std::string> models;
  std::string preset;
  Index nh = 0;
  bool robustness = false;
  bool cluster = false;
};

TableSpec table_spec(const ReproduceOptions& opt) {
  TableSpec t;
  if (opt.table == "table3") {
    t.models = {"VAE", "IMAE"};
    t.preset = "deep";
    t.nh = opt.nh.value_or(10);
    t.cluster = true;
    return t;
  }
  if (opt.table != "table1" && opt.table != "table2" && opt.table != "shallow") {
    throw ConfigError("unknown table '" + opt.table + "' (expected table1, table2, table3 or shallow)");
  }
  t.models = {"AE", "CAE", "DAE-b", "DAE-g", "IMAE"};
  t.nh = opt.nh.value_or(200);
  if (t.nh != 200 && t.nh != 1000) throw ConfigError("shallow tables use nh 200 or 1000");
  t.preset = "shallow" + std::to_string(t.nh);
  t.robustness = opt.table != "table2";
  t.cluster = opt.table != "table1";
  return t;
}

std::string cell(std::optional<double> v) { return v ? format_double(*v) : std::string(); }

std::string table1_csv(const ReproduceResult& r, Index nh) {
  const auto grid = default_robustness_grid();
  std::string s = "model";
  for (const auto& g : grid) s += "," + g.to_string();
  for (const auto& g : grid) s += ",published_" + g.to_string();
  s += "\n";
  for (std::size_t m = 0; m < r.runs.size(); ++m) {
    const std::string& model = r.runs[m].config.model;
    s += model;
    for (const auto& row : r.reports[m].robustness) s += "," + format_double(row.mean_l2);
    for (const auto& g : grid) s += "," + cell(published_robustness(model, nh, g));
    s += "\n";
  }
  return s;
}

// Rand indices are reported in percent, sigma' as a plain fraction.
std::string cluster_csv(const ReproduceResult& r, Index nh, bool with_sigma) {
  std::string s = "row";
  for (const auto& run : r.runs) s += "," + run.config.model;
  for (const auto& run : r.runs) s += ",published_" + run.config.model;
  s += "\n";
  const auto pct = [](std::optional<double> v) { return v ? std::optional(*v * 100.0) : std::nullopt; };
  const auto row = [&](const std::string& label, auto ours, auto published) {
    s += label;
    for (std::size_t m = 0; m < r.runs.size(); ++m) s += "," + cell(ours(m));
    for (const auto& run : r.runs) s += "," + cell(published(run.config));
    s += "\n";
  };
  row("R", [&](std::size_t m) { return pct(r.reports[m].rand_clean); },
      [&](const ExperimentConfig& c) { return published_rand(c.model, nh, false, c.dataset); });
  row("R_nu", [&](std::size_t m) { return pct(r.reports[m].rand_noisy); },
      [&](const ExperimentConfig& c) { return published_rand(c.model, nh, true, c.dataset); });
  if (with_sigma) {
    row("sigma_prime", [&](std::size_t m) { return r.reports[m].sigma_prime; },
        [&](const ExperimentConfig& c) { return published_sigma_prime(c.model, nh); });
  }
  return s;
}

std::optional<Network> reusable(const fs::path& dir, const ExperimentConfig& cfg) {
  const fs::path ck = dir / "checkpoint.bin";
  const fs::path snap = dir / "config.cfg";
  if (!fs::exists(ck) || !fs::exists(snap)) return std::nullopt;
  std::ifstream in(snap, std::ios::binary);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (text != cfg.to_text()) return std::nullopt;
  Checkpoint c = load_checkpoint(ck);
  if (!(c.config == cfg.train_config())) return std::nullopt;
  return std::move(c.net);
}

}  // namespace

std::vector<ExperimentConfig> reproduce_plan(const ReproduceOptions& opt) {
  const TableSpec t = table_spec(opt);
  std::vector<ExperimentConfig> plan;
  for (const auto& model : t.models) {
    ConfigFile cfg;
    cfg.set("experiment", "seed", std::to_string(opt.seed));
    cfg.set("experiment", "scale", to_string(opt.scale));
    cfg.set("experiment", "out", (opt.out / "models" / model).string());
    cfg.set("model", "variant", model);
    cfg.set("model", "preset", t.preset);
    cfg.set("model", "nh", std::to_string(t.nh));
    for (const auto& o : opt.overrides) cfg.set_override(o);
    plan.push_back(ExperimentConfig::resolve(cfg));
  }
  return plan;
}

ReproduceResult cmd_reproduce(const ReproduceOptions& opt, std::ostream& log) {
  const TableSpec t = table_spec(opt);
  const std::vector<ExperimentConfig> plan = reproduce_plan(opt);
  log << "reproducing " << opt.table << " at " << to_string(opt.scale) << " scale with master seed " << opt.seed
      << "\n";
  if (opt.scale == Scale::paper) {
    log << "warning: paper scale trains every model for " << plan.front().epochs
        << " epochs on the full training set; expect many CPU-hours\n";
  }
  log << "resolved defaults (" << plan.front().model << "):\n" << plan.front().to_text() << "\n";
  log.flush();

  const ExperimentData data = load_experiment_data(plan.front());
  ReproduceResult r;
  for (const auto& cfg : plan) {
    const fs::path dir = cfg.out;
    ModelRun run{cfg, Network{}, false};
    if (opt.reuse) {
      if (auto net = reusable(dir, cfg)) {
        run.net = std::move(*net);
        run.reused = true;
        log << cfg.model << ": reusing " << (dir / "checkpoint.bin").string() << "\n";
      }
    }
    if (!run.reused) {
      log << cfg.model << ": training " << cfg.epochs << " epochs on " << data.train.size() << " images\n";
      TrainArtifacts a;
      try {
        a = run_training(cfg, data, dir, &log);
      } catch (const DivergenceError& e) {
        throw DivergenceError(cfg.model + ": " + e.what());
      }
      run.net = load_checkpoint(a.checkpoint).net;
    }
    r.runs.push_back(std::move(run));
  }

  for (const auto& run : r.runs) {
    const ExperimentConfig& cfg = run.config;
    EvalReport rep;
    rep.model = cfg.model;
    rep.config = cfg.to_text();
    if (t.robustness) {
      Rng rng(derive_seed(cfg.seed, "eval/robustness/" + cfg.model));
      rep.robustness = robustness_sweep(run.net, data.test, default_robustness_grid(), rng);
    }
    if (t.cluster) {
      Rng rng(derive_seed(cfg.seed, "eval/cluster/" + cfg.model));
      const ClusterEvalResult c = cluster_eval(run.net, data.test, cfg.cluster, rng);
      rep.rand_clean = c.rand_clean;
      rep.rand_noisy = c.rand_noisy;
      rep.cluster_noise = cfg.cluster.noise.to_string();
      rep.iterations = cfg.cluster.iterations;
      rep.seeds = c.seeds;
      if (!run.net.is_vae()) rep.sigma_prime = sigma_prime(run.net, data.test.images);
      log << cfg.model << ": R " << c.rand_clean * 100.0;
      if (c.rand_noisy) log << "  R_nu " << *c.rand_noisy * 100.0;
      if (rep.sigma_prime) log << "  sigma' " << *rep.sigma_prime;
      log << "\n";
    }
    r.reports.push_back(std::move(rep));
  }

  fs::create_directories(opt.out);
  const auto emit = [&](const std::string& id, std::string csv) {
    const fs::path path = opt.out / (id + ".csv");
    write_text(path, csv);
    log << "wrote " << path.string() << "\n";
    r.tables.push_back({id, std::move(csv), path});
  };
  if (opt.table == "table3") {
    emit("table3", cluster_csv(r, t.nh, false));
  } else {
    if (t.robustness) emit("table1", table1_csv(r, t.nh));
    if (t.cluster) emit("table2", cluster_csv(r, t.nh, true));
  }

  nlohmann::ordered_json j;
  j["table"] = opt.table;
  j["scale"] = to_string(opt.scale);
  j["seed"] = opt.seed;
  j["nh"] = t.nh;
  j["runs"] = nlohmann::ordered_json::array();
  for (std::size_t m = 0; m < r.runs.size(); ++m) {
    j["runs"].push_back({{"model", r.runs[m].config.model},
                         {"reused", r.runs[m].reused},
                         {"report", nlohmann::ordered_json::parse(r.reports[m].to_json())}});
  }
  write_text(opt.out / (opt.table + ".json"), j.dump(2) + "\n");
  return r;
}

}  // namespace imae
