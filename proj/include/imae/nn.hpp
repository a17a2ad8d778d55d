#pragma once

#include <optional>
#include <string>
#include <vector>

#include "imae/activation.hpp"
#include "imae/ndcore.hpp"
#include "imae/objectives.hpp"

namespace imae {

struct LayerSpec {
  Index width = 0;
  Activation activation = Activation::identity;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Widths and activations of a feed-forward autoencoder.
///
/// `layers[latent_index]` produces the hidden representation. With `vae` that
/// layer becomes the mean head (identity activation) and a log-variance head of
/// the same shape is added. With `tied` the decoder half reuses the transposed
/// encoder weights and only the biases are separate.
struct Architecture {
  Index input_width = 0;
  std::vector<LayerSpec> layers;
  Index latent_index = 0;
  bool tied = false;
  bool vae = false;
  bool biases = true;

  /// d -> hidden (sigmoid) -> d (identity).
  static Architecture shallow(Index input_width, Index hidden, bool tied = true);
  /// d -> 1100 -> 700 -> nh -> 700 -> 1100 -> d, softplus in the wide layers.
  /// The nh layer is sigmoid, or the linear Gaussian heads when `vae`.
  static Architecture deep(Index input_width, Index nh, bool vae);

  Index in_width(std::size_t k) const { return k == 0 ? input_width : layers[k - 1].width; }
  Index latent_width() const { return layers.at(static_cast<std::size_t>(latent_index)).width; }

  /// Throws ArgumentError/ConfigError on an unusable architecture.
  void validate() const;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

template <typename Scalar>
struct DenseLayer {
  MatrixX<Scalar> weights;  // out x in; left empty for a tied decoder layer
  RowVectorX<Scalar> bias;  // out
  Activation activation = Activation::identity;

  friend bool operator==(const DenseLayer& a, const DenseLayer& b) {
    return a.activation == b.activation && a.weights.rows() == b.weights.rows() &&
           a.weights.cols() == b.weights.cols() && a.bias.size() == b.bias.size() &&
           a.weights == b.weights && a.bias == b.bias;
  }
};

template <typename Scalar>
class BasicNetwork {
 public:
  BasicNetwork() = default;
  /// All-zero parameters with the shapes of `arch`.
  explicit BasicNetwork(const Architecture& arch);

  const Architecture& architecture() const { return arch_; }

  std::size_t layer_count() const { return layers_.size(); }
  DenseLayer<Scalar>& layer(std::size_t k) { return layers_.at(k); }
  const DenseLayer<Scalar>& layer(std::size_t k) const { return layers_.at(k); }
  const std::vector<DenseLayer<Scalar>>& layers() const { return layers_; }

  bool is_vae() const { return logvar_head_.has_value(); }
  bool is_tied() const { return arch_.tied; }
  bool has_biases() const { return arch_.biases; }
  std::size_t latent_index() const { return static_cast<std::size_t>(arch_.latent_index); }
  Activation latent_activation() const { return layers_[latent_index()].activation; }

  DenseLayer<Scalar>& logvar_head() { return logvar_head_.value(); }
  const DenseLayer<Scalar>& logvar_head() const { return logvar_head_.value(); }

  /// True when layer k shares (transposed) weights with an encoder layer.
  bool shares_weights(std::size_t k) const { return arch_.tied && k >= layers_.size() / 2; }
  /// Index of the encoder layer whose weights layer k reuses.
  std::size_t mirror_of(std::size_t k) const { return layers_.size() - 1 - k; }

  /// Materialized out x in weights of layer k.
  MatrixX<Scalar> effective_weights(std::size_t k) const;

  /// Equivalent network with every tied weight copied out explicitly.
  BasicNetwork untied() const;

  friend bool operator==(const BasicNetwork&, const BasicNetwork&) = default;

 private:
  Architecture arch_;
  std::vector<DenseLayer<Scalar>> layers_;
  std::optional<DenseLayer<Scalar>> logvar_head_;
};

/// Activations of one forward pass. `pre[k]` and `post[k]` are batch x width of
/// layer k. For a VAE, `pre[latent]` is the mean head output, `logvar` the
/// log-variance head, `eps` the noise draw and `post[latent]` the sample.
template <typename Scalar>
struct BasicForwardTrace {
  MatrixX<Scalar> input;
  std::vector<MatrixX<Scalar>> pre;
  std::vector<MatrixX<Scalar>> post;
  MatrixX<Scalar> logvar;
  MatrixX<Scalar> eps;
  std::size_t latent_index = 0;

  const MatrixX<Scalar>& output() const { return post.back(); }
  const MatrixX<Scalar>& latent_pre() const { return pre[latent_index]; }
  const MatrixX<Scalar>& latent() const { return post[latent_index]; }
  const MatrixX<Scalar>& mu() const { return pre[latent_index]; }
};

template <typename Scalar>
struct LayerGrads {
  MatrixX<Scalar> weights;
  RowVectorX<Scalar> bias;
};

/// Same layout as the network; tied decoder layers carry empty weight
/// gradients because their contribution is folded into the encoder's.
template <typename Scalar>
struct BasicParamGrads {
  std::vector<LayerGrads<Scalar>> layers;
  std::optional<LayerGrads<Scalar>> logvar_head;
};

/// A named view onto one contiguous parameter (or gradient) array.
template <typename Scalar>
struct ParamBlock {
  std::string name;
  Scalar* data;
  Index rows;
  Index cols;

  Eigen::Map<MatrixX<Scalar>> map() const { return {data, rows, cols}; }
  Index size() const { return rows * cols; }
};

/// Trainable parameters in a fixed order. Shared decoder weights appear once
/// (under the encoder layer); biases are skipped when the net has none.
template <typename Scalar>
std::vector<ParamBlock<Scalar>> parameter_blocks(BasicNetwork<Scalar>& net);

/// Gradient arrays in the same order and with the same names as parameter_blocks.
template <typename Scalar>
std::vector<ParamBlock<Scalar>> gradient_blocks(BasicNetwork<Scalar>& net,
                                                BasicParamGrads<Scalar>& grads);

/// Per-term loss values; `total == reconstruction + latent`. `latent` is the
/// signed contribution to the total (e.g. -lambda * h for IMAE).
struct LossBreakdown {
  double reconstruction = 0.0;
  double latent = 0.0;
  double total = 0.0;
};

enum class InitScheme { glorot_uniform };

/// Weights ~ U(-s, s), s = sqrt(6 / (fan_in + fan_out)), drawn layer by layer in
/// row-major order (log-variance head last); biases zero.
template <typename Scalar>
BasicNetwork<Scalar> init_params(const Architecture& arch, Rng& rng,
                                 InitScheme scheme = InitScheme::glorot_uniform);

/// Full forward pass. `rng` supplies the reparameterization noise and is
/// required exactly when the network has VAE heads.
template <typename Scalar>
BasicForwardTrace<Scalar> forward(const BasicNetwork<Scalar>& net, const MatrixX<Scalar>& batch,
                                  Rng* rng = nullptr);

/// Reconstruction without sampling: a VAE decodes its mean head.
template <typename Scalar>
MatrixX<Scalar> forward_mean(const BasicNetwork<Scalar>& net, const MatrixX<Scalar>& batch);

/// Hidden representation used for clustering: the latent activations, or
/// the mean head for a VAE. Runs the encoder half only.
template <typename Scalar>
MatrixX<Scalar> encode(const BasicNetwork<Scalar>& net, const MatrixX<Scalar>& batch);

/// Latent pre-activations (encoder half only).
template <typename Scalar>
MatrixX<Scalar> encode_pre(const BasicNetwork<Scalar>& net, const MatrixX<Scalar>& batch);

/// Throws ConfigError when `loss` cannot be trained on `net`.
template <typename Scalar>
void check_compatible(const BasicNetwork<Scalar>& net, const LossSpec& loss);

/// Total training loss of a forward trace against the clean targets.
template <typename Scalar>
LossBreakdown total_loss(const BasicNetwork<Scalar>& net, const LossSpec& loss,
                         const BasicForwardTrace<Scalar>& trace, const MatrixX<Scalar>& clean);

/// Gradient of total_loss with respect to every parameter, averaged over the batch.
template <typename Scalar>
BasicParamGrads<Scalar> backward(const BasicNetwork<Scalar>& net,
                                 const BasicForwardTrace<Scalar>& trace, const LossSpec& loss,
                                 const MatrixX<Scalar>& clean);

/// theta <- theta - lr * grad over every trainable block.
template <typename Scalar>
void apply_gradient_step(BasicNetwork<Scalar>& net, const BasicParamGrads<Scalar>& grads,
                         Scalar learning_rate);

using Network = BasicNetwork<double>;
using ForwardTrace = BasicForwardTrace<double>;
using ParamGrads = BasicParamGrads<double>;

extern template class BasicNetwork<double>;

}  // namespace imae
