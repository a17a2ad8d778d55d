#include <gtest/gtest.h>

#include <cmath>

#include "imae/gradcheck.hpp"
#include "imae/nn.hpp"

using namespace imae;

namespace {

const Variant kVariants[] = {Variant::AE, Variant::CAE, Variant::DAE, Variant::IMAE, Variant::VAE};

}  // namespace

TEST(Architecture, Presets) {
  const Architecture s = Architecture::shallow(784, 200);
  ASSERT_EQ(s.layers.size(), 2u);
  EXPECT_EQ(s.layers[0].width, 200);
  EXPECT_EQ(s.layers[0].activation, Activation::sigmoid);
  EXPECT_EQ(s.layers[1].width, 784);
  EXPECT_EQ(s.layers[1].activation, Activation::identity);
  EXPECT_TRUE(s.tied);

  const Architecture d = Architecture::deep(784, 10, false);
  const std::vector<Index> widths = {1100, 700, 10, 700, 1100, 784};
  ASSERT_EQ(d.layers.size(), widths.size());
  for (std::size_t k = 0; k < widths.size(); ++k) EXPECT_EQ(d.layers[k].width, widths[k]);
  EXPECT_EQ(d.latent_index, 2);
  EXPECT_EQ(d.layers[2].activation, Activation::sigmoid);
  EXPECT_EQ(Architecture::deep(784, 10, true).layers[2].activation, Activation::identity);
}

TEST(Architecture, RejectsInconsistentShapes) {
  Architecture a = Architecture::shallow(10, 4);
  a.layers[1].width = 9;
  EXPECT_ANY_THROW(a.validate());
  Architecture v = Architecture::deep(10, 3, true);
  v.tied = true;
  EXPECT_ANY_THROW(v.validate());
}

TEST(Forward, ZeroNetwork) {
  Network net(Architecture::shallow(6, 4));
  Rng rng(1);
  const Matrix x = gaussian<double>(rng, 3, 6, 0.0, 1.0);
  const auto t = forward(net, x);
  EXPECT_TRUE((t.latent().array() == 0.5).all());
  EXPECT_TRUE((t.output().array() == 0.0).all());
}

TEST(Forward, IdentityLayer) {
  Architecture a;
  a.input_width = 5;
  a.layers = {{5, Activation::identity}};
  Network net(a);
  net.layer(0).weights = Matrix::Identity(5, 5);
  Rng rng(2);
  const Matrix x = gaussian<double>(rng, 4, 5, 0.0, 1.0);
  EXPECT_EQ(forward(net, x).output(), x);
}

TEST(Forward, SigmoidLatentInUnitInterval) {
  Rng rng(3);
  const Network net = init_params<double>(Architecture::shallow(784, 200), rng);
  const Matrix x = gaussian<double>(rng, 8, 784, 0.5, 0.5);
  const Matrix y = forward(net, x).latent();
  EXPECT_TRUE((y.array() > 0.0).all() && (y.array() < 1.0).all());
}

TEST(Forward, VaeNeedsRng) {
  Rng rng(4);
  const Network net = init_params<double>(Architecture::deep(12, 3, true), rng);
  const Matrix x = gaussian<double>(rng, 2, 12, 0.0, 1.0);
  EXPECT_THROW((void)forward(net, x), ConfigError);
  Rng a(5), b(5);
  EXPECT_EQ(forward(net, x, &a).output(), forward(net, x, &b).output());
}

TEST(Backward, MatchesFiniteDifferencesUntied) {
  for (const Variant v : kVariants) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const GradcheckReport r = gradcheck(v, seed);
      ASSERT_TRUE(r.passed) << to_string(v) << " seed " << seed << " max error " << r.max_error;
    }
  }
}

TEST(Backward, MatchesFiniteDifferencesTied) {
  GradcheckOptions opt;
  opt.tied = true;
  for (const Variant v : {Variant::AE, Variant::CAE, Variant::DAE, Variant::IMAE}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const GradcheckReport r = gradcheck(v, seed, opt);
      ASSERT_TRUE(r.passed) << to_string(v) << " seed " << seed << " max error " << r.max_error;
    }
  }
}

TEST(Backward, MatchesFiniteDifferencesOnOtherSmallShapes) {
  Rng shapes(6);
  for (int t = 0; t < 10; ++t) {
    GradcheckOptions opt;
    opt.input_width = 2 + static_cast<Index>(shapes.uniform_index(11));
    opt.hidden_width = 1 + static_cast<Index>(shapes.uniform_index(12));
    opt.batch = 1 + static_cast<Index>(shapes.uniform_index(8));
    for (const Variant v : kVariants) {
      const GradcheckReport r = gradcheck(v, 100 + static_cast<std::uint64_t>(t), opt);
      EXPECT_TRUE(r.passed) << to_string(v) << " " << opt.input_width << "-" << opt.hidden_width << " batch "
                            << opt.batch << " max error " << r.max_error;
    }
  }
}

TEST(Backward, BrokenGradientIsDetected) {
  const GradientFn broken = [](const Network& net, const ForwardTrace& t, const LossSpec& loss, const Matrix& x) {
    ParamGrads g = backward(net, t, loss, x);
    g.layers.back().bias *= 1.01;
    return g;
  };
  EXPECT_FALSE(gradcheck(Variant::IMAE, 0, {}, broken).passed);
}

TEST(Backward, PerfectReconstructionGivesZeroGradient) {
  Architecture a;
  a.input_width = 4;
  a.layers = {{4, Activation::identity}};
  Network net(a);
  net.layer(0).weights = Matrix::Identity(4, 4);
  Rng rng(7);
  const Matrix x = gaussian<double>(rng, 3, 4, 0.0, 1.0);
  const auto t = forward(net, x);
  const ParamGrads g = backward(net, t, LossSpec::ae(), x);
  EXPECT_EQ(g.layers[0].weights.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(g.layers[0].bias.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Backward, TiedEqualsSumOfUntiedAppearances) {
  Rng rng(8);
  for (const LossSpec& loss : {LossSpec::ae(), LossSpec::cae(0.1), LossSpec::imae(1.0)}) {
    Network tied = init_params<double>(Architecture::shallow(9, 5, true), rng);
    tied.layer(0).bias = gaussian<double>(rng, 1, 5, 0.0, 0.2);
    tied.layer(1).bias = gaussian<double>(rng, 1, 9, 0.0, 0.2);
    const Network untied = tied.untied();
    ASSERT_EQ(untied.layer(1).weights, Matrix(tied.layer(0).weights.transpose()));

    const Matrix x = (gaussian<double>(rng, 6, 9, 0.0, 1.0).array().abs() / 2.0).matrix();
    const ParamGrads gt = backward(tied, forward(tied, x), loss, x);
    const ParamGrads gu = backward(untied, forward(untied, x), loss, x);
    const Matrix expected = gu.layers[0].weights + gu.layers[1].weights.transpose();
    EXPECT_LE((gt.layers[0].weights - expected).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((gt.layers[1].bias - gu.layers[1].bias).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Init, SeedDeterminesNetwork) {
  Rng a(9), b(9), c(10);
  const Architecture arch = Architecture::shallow(30, 7);
  EXPECT_EQ(init_params<double>(arch, a), init_params<double>(arch, b));
  EXPECT_FALSE(init_params<double>(arch, c) == init_params<double>(Architecture(arch), a));
}

TEST(Init, GlorotBoundAndMean) {
  Rng rng(11);
  const Network net = init_params<double>(Architecture::shallow(784, 200), rng);
  const Matrix& w = net.layer(0).weights;
  EXPECT_LE(w.cwiseAbs().maxCoeff(), std::sqrt(6.0 / 984.0));
  EXPECT_GE(w.size(), 100000);
  EXPECT_NEAR(w.mean(), 0.0, 0.005);
  EXPECT_TRUE((net.layer(0).bias.array() == 0.0).all());
}

TEST(Params, BlocksSkipSharedWeights) {
  Rng rng(12);
  Network tied = init_params<double>(Architecture::shallow(8, 3, true), rng);
  std::vector<std::string> names;
  for (const auto& b : parameter_blocks(tied)) names.push_back(b.name);
  EXPECT_EQ(names, (std::vector<std::string>{"layer0.weights", "layer0.bias", "layer1.bias"}));
}

TEST(Params, GradientStepMovesAgainstGradient) {
  Rng rng(13);
  Network net = init_params<double>(Architecture::shallow(8, 3, false), rng);
  const Matrix x = (gaussian<double>(rng, 4, 8, 0.0, 1.0).array().abs()).matrix();
  const ParamGrads g = backward(net, forward(net, x), LossSpec::ae(), x);
  const Network before = net;
  apply_gradient_step(net, g, 0.1);
  EXPECT_LE((net.layer(0).weights - (before.layer(0).weights - 0.1 * g.layers[0].weights)).cwiseAbs().maxCoeff(),
            1e-15);
  apply_gradient_step(net, g, 0.0);
  EXPECT_TRUE(all_finite(net.layer(1).weights));
}
