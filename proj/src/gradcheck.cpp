#include "imae/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace imae {

double gradient_entry_error(double analytic, double numeric, const GradcheckOptions& opt) {
  const double diff = std::abs(analytic - numeric);
  const double denom = std::max({std::abs(analytic), std::abs(numeric), opt.abs_floor / opt.rel_tol});
  return diff / denom;
}

LossSpec default_loss(Variant variant) {
  switch (variant) {
    case Variant::AE: return LossSpec::ae();
    case Variant::CAE: return LossSpec::cae(0.1);
    case Variant::DAE: return LossSpec::dae(NoiseSpec::mask(0.3));
    case Variant::IMAE: return LossSpec::imae(1.0);
    case Variant::VAE: return LossSpec::vae();
  }
  return LossSpec::ae();
}

GradcheckReport gradcheck(Variant variant, std::uint64_t seed, const GradcheckOptions& opt,
                          const GradientFn& analytic) {
  const LossSpec loss = default_loss(variant);
  const bool vae = variant == Variant::VAE;

  Architecture arch;
  arch.input_width = opt.input_width;
  arch.layers = {{opt.hidden_width, vae ? Activation::identity : Activation::sigmoid},
                 {opt.input_width, Activation::identity}};
  arch.latent_index = 0;
  arch.vae = vae;
  arch.tied = opt.tied && !vae;

  Rng rng(seed);
  Network net = init_params<double>(arch, rng);
  // Non-zero biases so their gradients are exercised away from the symmetric point.
  for (auto& block : parameter_blocks(net)) {
    if (block.name.ends_with(".bias")) {
      for (Index i = 0; i < block.size(); ++i) block.data[i] = 0.2 * (2.0 * rng.uniform() - 1.0);
    }
  }
  Matrix clean(opt.batch, opt.input_width);
  for (Index i = 0; i < clean.size(); ++i) clean.data()[i] = rng.uniform();
  Rng noise_rng = rng.split();
  const Matrix input = corrupt(clean, loss.noise, noise_rng);
  const Rng sample_rng = rng.split();

  const auto evaluate = [&](const Network& n) {
    Rng r = sample_rng;
    const ForwardTrace t = forward(n, input, vae ? &r : nullptr);
    return total_loss(n, loss, t, clean).total;
  };

  Rng r = sample_rng;
  const ForwardTrace trace = forward(net, input, vae ? &r : nullptr);
  ParamGrads grads = analytic ? analytic(net, trace, loss, clean) : backward(net, trace, loss, clean);

  GradcheckReport report;
  report.variant = variant;
  report.seed = seed;
  report.tied = arch.tied;
  auto params = parameter_blocks(net);
  auto gblocks = gradient_blocks(net, grads);
  for (std::size_t b = 0; b < params.size(); ++b) {
    BlockError err{params[b].name};
    for (Index i = 0; i < params[b].size(); ++i) {
      double& theta = params[b].data[i];
      const double saved = theta;
      theta = saved + opt.step;
      const double up = evaluate(net);
      theta = saved - opt.step;
      const double down = evaluate(net);
      theta = saved;
      const double numeric = (up - down) / (2.0 * opt.step);
      const double a = gblocks[b].data[i];
      err.max_error = std::max(err.max_error, gradient_entry_error(a, numeric, opt));
      err.max_abs_diff = std::max(err.max_abs_diff, std::abs(a - numeric));
    }
    report.max_error = std::max(report.max_error, err.max_error);
    report.blocks.push_back(std::move(err));
  }
  report.passed = report.max_error <= opt.rel_tol;
  return report;
}

}  // namespace imae
