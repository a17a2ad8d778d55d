#pragma once

#include <Eigen/Core>

#include <string>
#include <string_view>

#include "imae/activation.hpp"
#include "imae/data.hpp"
#include "imae/ndcore.hpp"

namespace imae {

enum class Variant { AE, CAE, DAE, IMAE, VAE };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view s);

/// Which latent loss is trained, and its weight.
///
/// `lambda` only applies to CAE and IMAE and must be zero otherwise; `noise`
/// is the training corruption and must be set exactly for DAE.
struct LossSpec {
  Variant variant = Variant::AE;
  double lambda = 0.0;
  NoiseSpec noise;

  static LossSpec ae() { return {Variant::AE, 0.0, {}}; }
  static LossSpec cae(double lambda = 0.1) { return {Variant::CAE, lambda, {}}; }
  static LossSpec dae(NoiseSpec noise) { return {Variant::DAE, 0.0, noise}; }
  static LossSpec imae(double lambda = 1.0) { return {Variant::IMAE, lambda, {}}; }
  static LossSpec vae() { return {Variant::VAE, 0.0, {}}; }

  /// Throws ConfigError when the invariants above are violated.
  void validate() const;

  friend bool operator==(const LossSpec&, const LossSpec&) = default;
};

// ---------------------------------------------------------------------------
// Loss terms. Each is a sum over units (pixels or latent units) and a mean
// over the batch rows, with a matching gradient helper that returns the
// derivative with respect to the term's matrix arguments.
// ---------------------------------------------------------------------------

/// Mean over rows of the squared Euclidean distance between x and xhat.
template <typename DX, typename DY>
typename DX::Scalar reconstruction_l2(const Eigen::MatrixBase<DX>& x,
                                      const Eigen::MatrixBase<DY>& xhat) {
  require_same_shape(x, xhat, "reconstruction_l2");
  return (x - xhat).squaredNorm() / static_cast<typename DX::Scalar>(x.rows());
}

/// d reconstruction_l2 / d xhat.
template <typename DX, typename DY>
MatrixX<typename DX::Scalar> reconstruction_l2_grad(const Eigen::MatrixBase<DX>& x,
                                                    const Eigen::MatrixBase<DY>& xhat) {
  require_same_shape(x, xhat, "reconstruction_l2_grad");
  using Scalar = typename DX::Scalar;
  return (xhat - x) * (Scalar(2) / static_cast<Scalar>(x.rows()));
}

/// Latent entropy surrogate of the InfoMax model, from the latent
/// pre-activations y0 (rows = samples):
///
///   h = mean_rows sum_i [ s_i (1 - s_i) - (log cosh y0_i)^2 ],  s = sigmoid(y0)
///
/// The first term is the log-Jacobian of the sigmoid, the second a log-cosh
/// sparsity penalty. Each summand is maximal (0.25) at y0_i = 0.
template <typename D>
typename D::Scalar imae_latent_entropy(const Eigen::MatrixBase<D>& y0) {
  using Scalar = typename D::Scalar;
  const auto term = [](Scalar z) {
    const Scalar s = sigmoid(z);
    const Scalar lc = log_cosh(z);
    return s * (Scalar(1) - s) - lc * lc;
  };
  return y0.unaryExpr(term).sum() / static_cast<Scalar>(y0.rows());
}

/// d imae_latent_entropy / d y0.
template <typename D>
MatrixX<typename D::Scalar> imae_latent_entropy_grad(const Eigen::MatrixBase<D>& y0) {
  using Scalar = typename D::Scalar;
  const Scalar inv_b = Scalar(1) / static_cast<Scalar>(y0.rows());
  const auto slope = [inv_b](Scalar z) {
    const Scalar s = sigmoid(z);
    const Scalar g = s * (Scalar(1) - s);
    return inv_b * (g * (Scalar(1) - Scalar(2) * s) - Scalar(2) * log_cosh(z) * std::tanh(z));
  };
  return y0.unaryExpr(slope);
}

/// Squared Frobenius norm of the Jacobian of x -> sigmoid(W0 x + b), averaged
/// over rows, written through the hidden activations y = sigmoid(.):
///
///   ||J||_F^2 = sum_i (y_i (1 - y_i))^2 sum_j W0_ij^2
///
/// `w0` is out x in, so y.cols() must equal w0.rows().
template <typename DY, typename DW>
typename DY::Scalar cae_penalty(const Eigen::MatrixBase<DY>& y, const Eigen::MatrixBase<DW>& w0) {
  using Scalar = typename DY::Scalar;
  if (y.cols() != w0.rows()) {
    throw ShapeError("cae_penalty: latent width " + shape_string(y) + " does not match encoder " +
                     shape_string(w0));
  }
  const VectorX<Scalar> row_norms = w0.rowwise().squaredNorm();
  const MatrixX<Scalar> g = y.cwiseProduct((Scalar(1) - y.array()).matrix());
  return (g.cwiseAbs2() * row_norms).sum() / static_cast<Scalar>(y.rows());
}

template <typename Scalar>
struct CaeGrads {
  MatrixX<Scalar> pre;      // d / d (latent pre-activation)
  MatrixX<Scalar> weights;  // d / d w0, direct dependence only
};

template <typename DY, typename DW>
CaeGrads<typename DY::Scalar> cae_penalty_grads(const Eigen::MatrixBase<DY>& y,
                                                const Eigen::MatrixBase<DW>& w0) {
  using Scalar = typename DY::Scalar;
  if (y.cols() != w0.rows()) throw ShapeError("cae_penalty_grads: shape mismatch");
  const Scalar inv_b = Scalar(1) / static_cast<Scalar>(y.rows());
  const RowVectorX<Scalar> row_norms = w0.rowwise().squaredNorm().transpose();
  const auto ya = y.array();
  const Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> g2 =
      (ya * (Scalar(1) - ya)).square();
  CaeGrads<Scalar> out;
  // d(g^2)/dz = 2 g^2 (1 - 2y) since dg/dz = g (1 - 2y).
  out.pre = ((Scalar(2) * inv_b) * g2 * (Scalar(1) - Scalar(2) * ya)).matrix() *
            row_norms.asDiagonal();
  const VectorX<Scalar> g2_colsum = g2.colwise().sum().transpose();
  out.weights = (Scalar(2) * inv_b) * (g2_colsum.asDiagonal() * w0);
  return out;
}

/// VAE latent loss, per sample sum_i mu_i^2 + exp(logvar_i) - logvar_i - 1,
/// averaged over rows. This is twice the KL divergence to N(0, I).
template <typename DM, typename DL>
typename DM::Scalar vae_kl(const Eigen::MatrixBase<DM>& mu, const Eigen::MatrixBase<DL>& logvar) {
  using Scalar = typename DM::Scalar;
  require_same_shape(mu, logvar, "vae_kl");
  const auto lv = logvar.array();
  return (mu.array().square() + lv.exp() - lv - Scalar(1)).sum() / static_cast<Scalar>(mu.rows());
}

template <typename Scalar>
struct KlGrads {
  MatrixX<Scalar> mu;
  MatrixX<Scalar> logvar;
};

template <typename DM, typename DL>
KlGrads<typename DM::Scalar> vae_kl_grads(const Eigen::MatrixBase<DM>& mu,
                                          const Eigen::MatrixBase<DL>& logvar) {
  using Scalar = typename DM::Scalar;
  require_same_shape(mu, logvar, "vae_kl_grads");
  const Scalar inv_b = Scalar(1) / static_cast<Scalar>(mu.rows());
  return {(Scalar(2) * inv_b) * mu, (inv_b * (logvar.array().exp() - Scalar(1))).matrix()};
}

/// mu + exp(logvar / 2) * eps with a caller-supplied eps.
template <typename DM, typename DL, typename DE>
MatrixX<typename DM::Scalar> reparameterize(const Eigen::MatrixBase<DM>& mu,
                                            const Eigen::MatrixBase<DL>& logvar,
                                            const Eigen::MatrixBase<DE>& eps) {
  using Scalar = typename DM::Scalar;
  require_same_shape(mu, logvar, "reparameterize");
  require_same_shape(mu, eps, "reparameterize");
  return mu + ((Scalar(0.5) * logvar.array()).exp() * eps.array()).matrix();
}

/// Draws eps ~ N(0, I) from `rng` (row-major order).
template <typename DM, typename DL>
MatrixX<typename DM::Scalar> reparameterize(const Eigen::MatrixBase<DM>& mu,
                                            const Eigen::MatrixBase<DL>& logvar, Rng& rng) {
  using Scalar = typename DM::Scalar;
  require_same_shape(mu, logvar, "reparameterize");
  const MatrixX<Scalar> eps = gaussian<Scalar>(rng, mu.rows(), mu.cols(), Scalar(0), Scalar(1));
  return reparameterize(mu, logvar, eps);
}

/// Entrywise y (1 - y), the sigmoid slope written through its output.
template <typename D>
MatrixX<typename D::Scalar> sigmoid_derivative(const Eigen::MatrixBase<D>& y) {
  using Scalar = typename D::Scalar;
  return (y.array() * (Scalar(1) - y.array())).matrix();
}

}  // namespace imae
