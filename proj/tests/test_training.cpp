#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "imae/training.hpp"

using namespace imae;
namespace fs = std::filesystem;

namespace {

Dataset random_dataset(std::uint64_t seed, Index n, Index d) {
  Rng rng(seed);
  Dataset ds;
  ds.images.resize(n, d);
  for (Index i = 0; i < ds.images.size(); ++i) ds.images.data()[i] = rng.uniform() < 0.8 ? 0.0 : rng.uniform();
  for (Index i = 0; i < n; ++i) ds.labels.push_back(static_cast<int>(i % 10));
  return ds;
}

TrainConfig small_config(const LossSpec& loss, bool vae = false) {
  TrainConfig c;
  c.arch = vae ? Architecture::deep(20, 3, true) : Architecture::shallow(20, 6);
  if (vae) {
    c.arch.layers[0].width = 12;
    c.arch.layers[1].width = 8;
    c.arch.layers[3].width = 8;
    c.arch.layers[4].width = 12;
  }
  c.loss = loss;
  c.learning_rate = 0.01;
  c.epochs = 3;
  c.batch_size = 7;
  c.seed = 42;
  return c;
}

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "imae_test_training";
  fs::create_directories(dir);
  return dir / name;
}

std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(Train, ZeroLearningRateKeepsInitialParameters) {
  const Dataset ds = random_dataset(1, 30, 20);
  TrainConfig cfg = small_config(LossSpec::imae(1.0));
  cfg.learning_rate = 0.0;
  Rng rng(derive_seed(cfg.seed, "init"));
  const Network init = init_params<double>(cfg.arch, rng);
  const TrainResult r = train(cfg, ds);
  EXPECT_EQ(r.net, init);
}

TEST(Train, TinyAutoencoderDescends) {
  const Dataset ds = random_dataset(2, 20, 784);
  TrainConfig cfg;
  cfg.arch = Architecture::shallow(784, 16);
  cfg.loss = LossSpec::ae();
  cfg.learning_rate = 0.05;
  cfg.epochs = 200;
  cfg.batch_size = 20;
  cfg.seed = 3;
  const TrainResult r = train(cfg, ds);
  ASSERT_EQ(r.history.epochs.size(), 200u);
  EXPECT_LT(r.history.epochs.back().loss.reconstruction, r.history.epochs.front().loss.reconstruction);
}

TEST(Train, DeterministicForEveryVariant) {
  const Dataset ds = random_dataset(4, 30, 20);
  for (const auto& [loss, vae] : {std::pair{LossSpec::ae(), false}, std::pair{LossSpec::cae(0.1), false},
                                  std::pair{LossSpec::dae(NoiseSpec::mask(0.3)), false},
                                  std::pair{LossSpec::imae(1.0), false}, std::pair{LossSpec::vae(), true}}) {
    const TrainConfig cfg = small_config(loss, vae);
    const TrainResult a = train(cfg, ds);
    const TrainResult b = train(cfg, ds);
    EXPECT_EQ(a.net, b.net) << to_string(loss.variant);
    ASSERT_EQ(a.history.epochs.size(), b.history.epochs.size());
    for (std::size_t e = 0; e < a.history.epochs.size(); ++e) {
      EXPECT_EQ(a.history.epochs[e].loss.total, b.history.epochs[e].loss.total);
    }
  }
}

TEST(Train, DivergenceIsReported) {
  const Dataset ds = random_dataset(5, 30, 20);
  TrainConfig cfg = small_config(LossSpec::ae());
  cfg.learning_rate = 1e6;
  cfg.epochs = 50;
  try {
    (void)train(cfg, ds);
    FAIL() << "expected DivergenceError";
  } catch (const DivergenceError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos) << e.what();
  }
}

TEST(Train, LineSearchDecreasesImaeLoss) {
  const Dataset ds = random_dataset(6, 8, 20);
  Rng rng(7);
  Network net = init_params<double>(Architecture::shallow(20, 6), rng);
  const LossSpec loss = LossSpec::imae(1.0);
  const auto trace = forward(net, ds.images);
  const double before = total_loss(net, loss, trace, ds.images).total;
  const ParamGrads g = backward(net, trace, loss, ds.images);
  double eta = 1.0;
  bool decreased = false;
  for (int halving = 0; halving <= 20 && !decreased; ++halving, eta /= 2) {
    Network step = net;
    apply_gradient_step(step, g, eta);
    decreased = total_loss(step, loss, forward(step, ds.images), ds.images).total < before;
  }
  EXPECT_TRUE(decreased);
}

TEST(TrainConfig, TextRoundTrip) {
  TrainConfig c = small_config(LossSpec::dae(NoiseSpec::gaussian(0.3)));
  c.learning_rate = 0.1 + 0.2;
  c.shuffle = true;
  EXPECT_EQ(TrainConfig::from_text(c.to_text()), c);
  const TrainConfig v = small_config(LossSpec::vae(), true);
  EXPECT_EQ(TrainConfig::from_text(v.to_text()), v);
}

TEST(TrainConfig, UnknownKeyRejected) {
  const std::string text = small_config(LossSpec::ae()).to_text() + "[train]\nmomentum = 0.9\n";
  EXPECT_THROW((void)TrainConfig::from_text(text), ConfigError);
}

TEST(History, CsvHasOneRowPerEpoch) {
  const Dataset ds = random_dataset(8, 30, 20);
  const TrainResult r = train(small_config(LossSpec::imae(1.0)), ds);
  const fs::path p = temp_file("history.csv");
  write_history_csv(r.history, p);
  const std::string text = read_all(p);
  EXPECT_EQ(text.rfind("epoch,total,reconstruction,latent,seconds\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
}

TEST(Checkpoint, RoundTripIsExact) {
  const Dataset ds = random_dataset(9, 30, 20);
  for (const bool vae : {false, true}) {
    const TrainConfig cfg = vae ? small_config(LossSpec::vae(), true) : small_config(LossSpec::cae(0.1));
    const TrainResult r = train(cfg, ds);
    const fs::path p = temp_file(vae ? "vae.bin" : "cae.bin");
    save_checkpoint(r.net, cfg, p);
    const Checkpoint ck = load_checkpoint(p);
    EXPECT_EQ(ck.net, r.net);
    EXPECT_EQ(ck.config, cfg);
    Rng a(1), b(1);
    EXPECT_EQ(forward(ck.net, ds.images, &a).output(), forward(r.net, ds.images, &b).output());
    const fs::path p2 = temp_file(vae ? "vae2.bin" : "cae2.bin");
    save_checkpoint(ck.net, ck.config, p2);
    EXPECT_EQ(read_all(p), read_all(p2));
  }
}

TEST(Checkpoint, CorruptionIsDetected) {
  const TrainConfig cfg = small_config(LossSpec::ae());
  Rng rng(10);
  const Network net = init_params<double>(cfg.arch, rng);
  const fs::path p = temp_file("good.bin");
  save_checkpoint(net, cfg, p);
  const std::string good = read_all(p);

  const auto write = [](const fs::path& q, const std::string& s) { std::ofstream(q, std::ios::binary) << s; };
  std::string bad = good;
  bad[0] = 'X';
  write(temp_file("magic.bin"), bad);
  EXPECT_THROW((void)load_checkpoint(temp_file("magic.bin")), FormatError);

  bad = good;
  bad[4] = 9;
  write(temp_file("version.bin"), bad);
  EXPECT_THROW((void)load_checkpoint(temp_file("version.bin")), FormatError);

  write(temp_file("trunc.bin"), good.substr(0, good.size() - 3));
  EXPECT_THROW((void)load_checkpoint(temp_file("trunc.bin")), IoError);

  write(temp_file("short.bin"), good.substr(0, 6));
  EXPECT_THROW((void)load_checkpoint(temp_file("short.bin")), IoError);
}
