#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "imae/experiment.hpp"

namespace {

enum Exit { ok = 0, usage = 1, numerical = 2 };

void apply_common(imae::ConfigFile& cfg, const std::vector<std::string>& sets, const std::string& seed,
                  const std::string& out, const std::string& scale) {
  if (!seed.empty()) cfg.set("experiment", "seed", seed);
  if (!out.empty()) cfg.set("experiment", "out", out);
  if (!scale.empty()) cfg.set("experiment", "scale", scale);
  for (const auto& s : sets) cfg.set_override(s);
}

imae::Variant variant_arg(const std::string& s) {
  try {
    return imae::parse_variant(s);
  } catch (const imae::Error&) {
    throw imae::ArgumentError("unknown variant '" + s + "' (expected AE, CAE, DAE, IMAE, VAE or all)");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Autoencoder training and evaluation"};
  app.require_subcommand(1);

  std::string config_path, seed, out, scale;
  std::vector<std::string> sets;

  auto* train = app.add_subcommand("train", "train one model from a config file");
  train->add_option("--config", config_path, "config file");
  train->add_option("--seed", seed, "master seed");
  train->add_option("--out", out, "output directory");
  train->add_option("--scale", scale, "desk or paper");
  train->add_option("--set", sets, "section.key=value override (repeatable)");

  imae::EvalCommand ev;
  ev.data_dir = imae::default_data_dir();
  std::string protocol = "robustness", cluster_noise;
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval->add_option("checkpoint", ev.checkpoint, "checkpoint file")->required();
  eval->add_option("--protocol", protocol, "robustness, cluster or codes");
  eval->add_option("--out", ev.out, "output directory");
  eval->add_option("--seed", ev.seed, "master seed");
  eval->add_option("--data", ev.data_dir, "dataset directory");
  eval->add_option("--test-images", ev.test_images, "number of test images");
  eval->add_option("--iterations", ev.cluster.iterations, "clustering repetitions");
  eval->add_option("--sample-size", ev.cluster.n, "points per clustering run");
  eval->add_option("--clusters", ev.cluster.k, "k");
  eval->add_option("--cluster-noise", cluster_noise, "noise for the corrupted pass, e.g. gaussian:0.2");

  imae::GradcheckCommand gc;
  std::string variant = "all";
  bool broken = false;
  auto* grad = app.add_subcommand("gradcheck", "finite-difference gradient check");
  grad->add_option("variant", variant, "AE, CAE, DAE, IMAE, VAE or all");
  grad->add_option("--seed", gc.seed, "first seed");
  grad->add_option("--seeds", gc.seeds, "number of seeds");
  grad->add_flag("--tied", gc.options.tied, "tie decoder weights");
  grad->add_flag("--broken", broken, "perturb the analytic gradient (failure path check)");

  imae::ReproduceOptions rp;
  std::string rp_scale = "desk";
  imae::Index nh = 0;
  bool no_reuse = false;
  auto* repro = app.add_subcommand("reproduce", "train and evaluate the models of a results table");
  repro->add_option("table", rp.table, "table1, table2, table3 or shallow")->required();
  repro->add_option("--scale", rp_scale, "desk or paper");
  repro->add_option("--nh", nh, "hidden units (200/1000 shallow, latent size deep)");
  repro->add_option("--seed", rp.seed, "master seed");
  repro->add_option("--out", rp.out, "output directory");
  repro->add_option("--set", rp.overrides, "section.key=value override for every run (repeatable)");
  repro->add_flag("--no-reuse", no_reuse, "retrain even when matching checkpoints exist");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? Exit::ok : Exit::usage;
  }

  try {
    if (*train) {
      imae::ConfigFile cfg = config_path.empty() ? imae::ConfigFile{} : imae::ConfigFile::load(config_path);
      apply_common(cfg, sets, seed, out, scale);
      imae::cmd_train(cfg, std::cerr);
    } else if (*eval) {
      ev.protocol = imae::parse_protocol(protocol);
      if (!cluster_noise.empty()) {
        ev.cluster.noise = imae::NoiseSpec::parse(cluster_noise);
        ev.cluster_noise_set = true;
      }
      imae::cmd_eval(ev, std::cout);
    } else if (*grad) {
      if (variant != "all") gc.variants = {variant_arg(variant)};
      if (broken) {
        gc.analytic = [](const imae::Network& net, const imae::ForwardTrace& trace, const imae::LossSpec& loss,
                         const imae::Matrix& clean) {
          imae::ParamGrads g = imae::backward(net, trace, loss, clean);
          g.layers.front().weights *= 1.01;
          return g;
        };
      }
      if (!imae::cmd_gradcheck(gc, std::cout)) return Exit::numerical;
    } else if (*repro) {
      rp.scale = imae::parse_scale(rp_scale);
      if (nh > 0) rp.nh = nh;
      rp.reuse = !no_reuse;
      imae::cmd_reproduce(rp, std::cerr);
    }
  } catch (const imae::DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return Exit::numerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return Exit::usage;
  }
  return Exit::ok;
}
