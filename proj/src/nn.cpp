#include "imae/nn.hpp"

#include <cmath>

namespace imae {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::AE: return "AE";
    case Variant::CAE: return "CAE";
    case Variant::DAE: return "DAE";
    case Variant::IMAE: return "IMAE";
    case Variant::VAE: return "VAE";
  }
  return "?";
}

Variant parse_variant(std::string_view s) {
  if (s == "AE" || s == "ae") return Variant::AE;
  if (s == "CAE" || s == "cae") return Variant::CAE;
  if (s == "DAE" || s == "dae") return Variant::DAE;
  if (s == "IMAE" || s == "imae") return Variant::IMAE;
  if (s == "VAE" || s == "vae") return Variant::VAE;
  throw ArgumentError("unknown model variant '" + std::string(s) + "'");
}

void LossSpec::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("loss: lambda must be finite and >= 0");
  const bool weighted = variant == Variant::CAE || variant == Variant::IMAE;
  if (!weighted && lambda != 0.0) {
    throw ConfigError(std::string("loss: lambda is not used by ") + std::string(to_string(variant)));
  }
  const bool noisy = noise.kind != NoiseKind::none;
  if (variant == Variant::DAE && !noisy) throw ConfigError("loss: DAE requires a training noise");
  if (variant != Variant::DAE && noisy) {
    throw ConfigError(std::string("loss: training noise is only used by DAE, not ") +
                      std::string(to_string(variant)));
  }
  noise.validate();
}

Architecture Architecture::shallow(Index input_width, Index hidden, bool tied) {
  Architecture a;
  a.input_width = input_width;
  a.layers = {{hidden, Activation::sigmoid}, {input_width, Activation::identity}};
  a.latent_index = 0;
  a.tied = tied;
  return a;
}

Architecture Architecture::deep(Index input_width, Index nh, bool vae) {
  Architecture a;
  a.input_width = input_width;
  a.layers = {{1100, Activation::softplus},
              {700, Activation::softplus},
              {nh, vae ? Activation::identity : Activation::sigmoid},
              {700, Activation::softplus},
              {1100, Activation::softplus},
              {input_width, Activation::identity}};
  a.latent_index = 2;
  a.vae = vae;
  return a;
}

void Architecture::validate() const {
  if (input_width < 1) throw ArgumentError("architecture: input width must be >= 1");
  if (layers.empty()) throw ArgumentError("architecture: no layers");
  for (const auto& l : layers) {
    if (l.width < 1) throw ArgumentError("architecture: layer widths must be >= 1");
  }
  if (latent_index < 0 || latent_index >= static_cast<Index>(layers.size())) {
    throw ArgumentError("architecture: latent index out of range");
  }
  if (tied) {
    if (layers.size() % 2 != 0) throw ConfigError("architecture: tied weights need an even layer count");
    if (vae) throw ConfigError("architecture: tied weights are not supported with VAE heads");
    const std::size_t n = layers.size();
    for (std::size_t k = n / 2; k < n; ++k) {
      const std::size_t m = n - 1 - k;
      if (layers[k].width != in_width(m) || in_width(k) != layers[m].width) {
        throw ConfigError("architecture: tied layer " + std::to_string(k) +
                          " does not mirror layer " + std::to_string(m));
      }
    }
  }
  if (vae && layers[static_cast<std::size_t>(latent_index)].activation != Activation::identity) {
    throw ConfigError("architecture: VAE mean/log-variance heads must be linear");
  }
}

template <typename Scalar>
BasicNetwork<Scalar>::BasicNetwork(const Architecture& arch) : arch_(arch) {
  arch_.validate();
  layers_.resize(arch_.layers.size());
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    auto& l = layers_[k];
    l.activation = arch_.layers[k].activation;
    l.bias = RowVectorX<Scalar>::Zero(arch_.layers[k].width);
    if (!shares_weights(k)) l.weights = MatrixX<Scalar>::Zero(arch_.layers[k].width, arch_.in_width(k));
  }
  if (arch_.vae) {
    const auto& latent = layers_[latent_index()];
    logvar_head_ = DenseLayer<Scalar>{MatrixX<Scalar>::Zero(latent.weights.rows(), latent.weights.cols()),
                                      RowVectorX<Scalar>::Zero(latent.bias.size()),
                                      Activation::identity};
  }
}

template <typename Scalar>
MatrixX<Scalar> BasicNetwork<Scalar>::effective_weights(std::size_t k) const {
  if (shares_weights(k)) return layers_[mirror_of(k)].weights.transpose();
  return layers_.at(k).weights;
}

template <typename Scalar>
BasicNetwork<Scalar> BasicNetwork<Scalar>::untied() const {
  BasicNetwork out = *this;
  out.arch_.tied = false;
  for (std::size_t k = 0; k < layers_.size(); ++k) out.layers_[k].weights = effective_weights(k);
  return out;
}

template <typename Scalar>
std::vector<ParamBlock<Scalar>> parameter_blocks(BasicNetwork<Scalar>& net) {
  std::vector<ParamBlock<Scalar>> out;
  const auto add = [&](const std::string& prefix, DenseLayer<Scalar>& l, bool with_weights) {
    if (with_weights) out.push_back({prefix + ".weights", l.weights.data(), l.weights.rows(), l.weights.cols()});
    if (net.has_biases()) out.push_back({prefix + ".bias", l.bias.data(), 1, l.bias.size()});
  };
  for (std::size_t k = 0; k < net.layer_count(); ++k) {
    add("layer" + std::to_string(k), net.layer(k), !net.shares_weights(k));
  }
  if (net.is_vae()) add("logvar", net.logvar_head(), true);
  return out;
}

template <typename Scalar>
std::vector<ParamBlock<Scalar>> gradient_blocks(BasicNetwork<Scalar>& net,
                                                BasicParamGrads<Scalar>& grads) {
  std::vector<ParamBlock<Scalar>> out;
  const auto add = [&](const std::string& prefix, LayerGrads<Scalar>& g, bool with_weights) {
    if (with_weights) out.push_back({prefix + ".weights", g.weights.data(), g.weights.rows(), g.weights.cols()});
    if (net.has_biases()) out.push_back({prefix + ".bias", g.bias.data(), 1, g.bias.size()});
  };
  for (std::size_t k = 0; k < net.layer_count(); ++k) {
    add("layer" + std::to_string(k), grads.layers.at(k), !net.shares_weights(k));
  }
  if (net.is_vae()) add("logvar", grads.logvar_head.value(), true);
  return out;
}

template <typename Scalar>
BasicNetwork<Scalar> init_params(const Architecture& arch, Rng& rng, InitScheme scheme) {
  (void)scheme;  // glorot_uniform is the only scheme
  BasicNetwork<Scalar> net(arch);
  const auto fill = [&rng](MatrixX<Scalar>& w) {
    const Scalar s = std::sqrt(Scalar(6) / static_cast<Scalar>(w.rows() + w.cols()));
    Scalar* p = w.data();
    for (Index i = 0; i < w.size(); ++i) p[i] = s * static_cast<Scalar>(2.0 * rng.uniform() - 1.0);
  };
  for (std::size_t k = 0; k < net.layer_count(); ++k) {
    if (!net.shares_weights(k)) fill(net.layer(k).weights);
  }
  if (net.is_vae()) fill(net.logvar_head().weights);
  return net;
}

namespace {

// Z = A W^T + b, reading tied decoder weights straight from the encoder.
template <typename Scalar>
MatrixX<Scalar> affine(const BasicNetwork<Scalar>& net, std::size_t k, const MatrixX<Scalar>& a) {
  const auto& l = net.layer(k);
  MatrixX<Scalar> z(a.rows(), l.bias.size());
  if (net.shares_weights(k)) {
    const auto& w = net.layer(net.mirror_of(k)).weights;
    if (a.cols() != w.rows()) {
      throw ShapeError("forward: layer " + std::to_string(k) + " expects width " +
                       std::to_string(w.rows()) + ", got " + shape_string(a));
    }
    z.noalias() = a * w;
  } else {
    if (a.cols() != l.weights.cols()) {
      throw ShapeError("forward: layer " + std::to_string(k) + " expects width " +
                       std::to_string(l.weights.cols()) + ", got " + shape_string(a));
    }
    z.noalias() = a * l.weights.transpose();
  }
  if (net.has_biases()) z.rowwise() += l.bias;
  return z;
}

template <typename Scalar>
MatrixX<Scalar> head_affine(const DenseLayer<Scalar>& l, const MatrixX<Scalar>& a, bool biases) {
  MatrixX<Scalar> z(a.rows(), l.weights.rows());
  z.noalias() = a * l.weights.transpose();
  if (biases) z.rowwise() += l.bias;
  return z;
}

template <typename Scalar>
MatrixX<Scalar> activate_all(Activation act, const MatrixX<Scalar>& z) {
  switch (act) {
    case Activation::identity: return z;
    case Activation::sigmoid: return z.unaryExpr([](Scalar x) { return sigmoid(x); });
    case Activation::softplus: return z.unaryExpr([](Scalar x) { return softplus(x); });
  }
  return z;
}

template <typename Scalar>
MatrixX<Scalar> slope_all(Activation act, const MatrixX<Scalar>& pre, const MatrixX<Scalar>& post) {
  switch (act) {
    case Activation::identity: return MatrixX<Scalar>::Ones(pre.rows(), pre.cols());
    case Activation::sigmoid: return sigmoid_derivative(post);
    case Activation::softplus: return pre.unaryExpr([](Scalar x) { return sigmoid(x); });
  }
  return MatrixX<Scalar>::Ones(pre.rows(), pre.cols());
}

}  // namespace

template <typename Scalar>
BasicForwardTrace<Scalar> forward(const BasicNetwork<Scalar>& net, const MatrixX<Scalar>& batch,
                                  Rng* rng) {
  if (net.is_vae() && rng == nullptr) throw ConfigError("forward: a VAE network needs an rng");
  BasicForwardTrace<Scalar> t;
  t.input = batch;
  t.latent_index = net.latent_index();
  const std::size_t n = net.layer_count();
  t.pre.resize(n);
  t.post.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const MatrixX<Scalar>& a = k == 0 ? t.input : t.post[k - 1];
    t.pre[k] = affine(net, k, a);
    if (net.is_vae() && k == net.latent_index()) {
      t.logvar = head_affine(net.logvar_head(), a, net.has_biases());
      t.eps = gaussian<Scalar>(*rng, t.pre[k].rows(), t.pre[k].cols(), Scalar(0), Scalar(1));
      t.post[k] = reparameterize(t.pre[k], t.logvar, t.eps);
    } else {
      t.post[k] = activate_all(net.layer(k).activation, t.pre[k]);
    }
  }
  return t;
}

template <typename Scalar>
MatrixX<Scalar> forward_mean(const BasicNetwork<Scalar>& net, const MatrixX<Scalar>& batch) {
  MatrixX<Scalar> a = batch;
  for (std::size_t k = 0; k < net.layer_count(); ++k) {
    MatrixX<Scalar> z = affine(net, k, a);
    a = net.is_vae() && k == net.latent_index() ? std::move(z) : activate_all(net.layer(k).activation, z);
  }
  return a;
}

template <typename Scalar>
MatrixX<Scalar> encode_pre(const BasicNetwork<Scalar>& net, const MatrixX<Scalar>& batch) {
  MatrixX<Scalar> a = batch;
  for (std::size_t k = 0; k < net.latent_index(); ++k) {
    a = activate_all(net.layer(k).activation, affine(net, k, a));
  }
  return affine(net, net.latent_index(), a);
}

template <typename Scalar>
MatrixX<Scalar> encode(const BasicNetwork<Scalar>& net, const MatrixX<Scalar>& batch) {
  MatrixX<Scalar> z = encode_pre(net, batch);
  if (net.is_vae()) return z;
  return activate_all(net.latent_activation(), z);
}

template <typename Scalar>
void check_compatible(const BasicNetwork<Scalar>& net, const LossSpec& loss) {
  loss.validate();
  if (loss.variant == Variant::VAE && !net.is_vae()) {
    throw ConfigError("VAE loss needs a network with mean/log-variance heads");
  }
  if (loss.variant != Variant::VAE && net.is_vae()) {
    throw ConfigError(std::string(to_string(loss.variant)) + " loss on a VAE network");
  }
  if ((loss.variant == Variant::CAE || loss.variant == Variant::IMAE) &&
      net.latent_activation() != Activation::sigmoid) {
    throw ConfigError(std::string(to_string(loss.variant)) + " loss needs a sigmoid latent layer");
  }
}

template <typename Scalar>
LossBreakdown total_loss(const BasicNetwork<Scalar>& net, const LossSpec& loss,
                         const BasicForwardTrace<Scalar>& trace, const MatrixX<Scalar>& clean) {
  check_compatible(net, loss);
  if (trace.post.size() != net.layer_count()) throw ConfigError("total_loss: trace does not match network");
  LossBreakdown out;
  out.reconstruction = static_cast<double>(reconstruction_l2(clean, trace.output()));
  switch (loss.variant) {
    case Variant::AE:
    case Variant::DAE:
      break;
    case Variant::CAE:
      out.latent = loss.lambda * static_cast<double>(
                                     cae_penalty(trace.latent(), net.effective_weights(net.latent_index())));
      break;
    case Variant::IMAE:
      out.latent = -loss.lambda * static_cast<double>(imae_latent_entropy(trace.latent_pre()));
      break;
    case Variant::VAE:
      out.latent = static_cast<double>(vae_kl(trace.mu(), trace.logvar));
      break;
  }
  out.total = out.reconstruction + out.latent;
  return out;
}

template <typename Scalar>
BasicParamGrads<Scalar> backward(const BasicNetwork<Scalar>& net,
                                 const BasicForwardTrace<Scalar>& trace, const LossSpec& loss,
                                 const MatrixX<Scalar>& clean) {
  check_compatible(net, loss);
  const std::size_t n = net.layer_count();
  if (trace.post.size() != n) throw ConfigError("backward: trace does not match network");
  const std::size_t latent = net.latent_index();
  const Scalar lambda = static_cast<Scalar>(loss.lambda);

  BasicParamGrads<Scalar> g;
  g.layers.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& l = net.layer(k);
    g.layers[k].weights = MatrixX<Scalar>::Zero(l.weights.rows(), l.weights.cols());
    g.layers[k].bias = RowVectorX<Scalar>::Zero(l.bias.size());
  }
  if (net.is_vae()) {
    const auto& h = net.logvar_head();
    g.logvar_head = LayerGrads<Scalar>{MatrixX<Scalar>::Zero(h.weights.rows(), h.weights.cols()),
                                       RowVectorX<Scalar>::Zero(h.bias.size())};
  }

  // d loss / d post[k], walking from the output back to the input.
  MatrixX<Scalar> d_post = reconstruction_l2_grad(clean, trace.output());
  for (std::size_t k = n; k-- > 0;) {
    const MatrixX<Scalar>& a_prev = k == 0 ? trace.input : trace.post[k - 1];
    const auto& l = net.layer(k);

    if (net.is_vae() && k == latent) {
      const auto kl = vae_kl_grads(trace.mu(), trace.logvar);
      const MatrixX<Scalar> d_mu = d_post + kl.mu;
      const MatrixX<Scalar> d_logvar =
          (Scalar(0.5) * d_post.array() * trace.eps.array() * (Scalar(0.5) * trace.logvar.array()).exp()).matrix() +
          kl.logvar;
      g.layers[k].weights.noalias() += d_mu.transpose() * a_prev;
      g.layers[k].bias += d_mu.colwise().sum();
      g.logvar_head->weights.noalias() += d_logvar.transpose() * a_prev;
      g.logvar_head->bias += d_logvar.colwise().sum();
      if (k > 0) {
        MatrixX<Scalar> next(a_prev.rows(), a_prev.cols());
        next.noalias() = d_mu * l.weights;
        next.noalias() += d_logvar * net.logvar_head().weights;
        d_post = std::move(next);
      }
      continue;
    }

    MatrixX<Scalar> d_pre = d_post.cwiseProduct(slope_all(l.activation, trace.pre[k], trace.post[k]));
    if (k == latent) {
      if (loss.variant == Variant::IMAE) {
        d_pre -= lambda * imae_latent_entropy_grad(trace.pre[k]);
      } else if (loss.variant == Variant::CAE) {
        const auto cae = cae_penalty_grads(trace.post[k], net.effective_weights(k));
        d_pre += lambda * cae.pre;
        // Direct dependence on the encoder weights; k is never a shared layer
        // because the latent layer sits in the encoder half.
        g.layers[k].weights += lambda * cae.weights;
      }
    }

    if (net.shares_weights(k)) {
      const std::size_t m = net.mirror_of(k);
      g.layers[m].weights.noalias() += a_prev.transpose() * d_pre;
    } else {
      g.layers[k].weights.noalias() += d_pre.transpose() * a_prev;
    }
    g.layers[k].bias += d_pre.colwise().sum();

    if (k > 0) {
      MatrixX<Scalar> next(a_prev.rows(), a_prev.cols());
      if (net.shares_weights(k)) {
        next.noalias() = d_pre * net.layer(net.mirror_of(k)).weights.transpose();
      } else {
        next.noalias() = d_pre * l.weights;
      }
      d_post = std::move(next);
    }
  }

  if (!net.has_biases()) {
    for (auto& lg : g.layers) lg.bias.setZero();
    if (g.logvar_head) g.logvar_head->bias.setZero();
  }
  return g;
}

template <typename Scalar>
void apply_gradient_step(BasicNetwork<Scalar>& net, const BasicParamGrads<Scalar>& grads,
                         Scalar learning_rate) {
  for (std::size_t k = 0; k < net.layer_count(); ++k) {
    auto& l = net.layer(k);
    if (!net.shares_weights(k)) l.weights -= learning_rate * grads.layers[k].weights;
    if (net.has_biases()) l.bias -= learning_rate * grads.layers[k].bias;
  }
  if (net.is_vae()) {
    net.logvar_head().weights -= learning_rate * grads.logvar_head->weights;
    if (net.has_biases()) net.logvar_head().bias -= learning_rate * grads.logvar_head->bias;
  }
}

template class BasicNetwork<double>;
template std::vector<ParamBlock<double>> parameter_blocks(BasicNetwork<double>&);
template std::vector<ParamBlock<double>> gradient_blocks(BasicNetwork<double>&, BasicParamGrads<double>&);
template BasicNetwork<double> init_params(const Architecture&, Rng&, InitScheme);
template BasicForwardTrace<double> forward(const BasicNetwork<double>&, const MatrixX<double>&, Rng*);
template MatrixX<double> forward_mean(const BasicNetwork<double>&, const MatrixX<double>&);
template MatrixX<double> encode(const BasicNetwork<double>&, const MatrixX<double>&);
template MatrixX<double> encode_pre(const BasicNetwork<double>&, const MatrixX<double>&);
template void check_compatible(const BasicNetwork<double>&, const LossSpec&);
template LossBreakdown total_loss(const BasicNetwork<double>&, const LossSpec&,
                                  const BasicForwardTrace<double>&, const MatrixX<double>&);
template BasicParamGrads<double> backward(const BasicNetwork<double>&, const BasicForwardTrace<double>&,
                                          const LossSpec&, const MatrixX<double>&);
template void apply_gradient_step(BasicNetwork<double>&, const BasicParamGrads<double>&, double);

}  // namespace imae
