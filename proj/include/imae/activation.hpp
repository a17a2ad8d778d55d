#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "imae/errors.hpp"

namespace imae {

enum class Activation { sigmoid, softplus, identity };

inline std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::sigmoid: return "sigmoid";
    case Activation::softplus: return "softplus";
    case Activation::identity: return "identity";
  }
  return "?";
}

inline Activation parse_activation(std::string_view s) {
  if (s == "sigmoid") return Activation::sigmoid;
  if (s == "softplus") return Activation::softplus;
  if (s == "identity") return Activation::identity;
  throw ArgumentError("unknown activation '" + std::string(s) + "'");
}

// Scalar kernels. All are evaluated without forming exp of a large positive
// argument, so they stay finite for |x| well past 700.

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  if (x >= 0) return Scalar(1) / (Scalar(1) + std::exp(-x));
  const Scalar e = std::exp(x);
  return e / (Scalar(1) + e);
}

template <typename Scalar>
Scalar softplus(Scalar x) {
  return std::max(x, Scalar(0)) + std::log1p(std::exp(-std::abs(x)));
}

template <typename Scalar>
Scalar log_cosh(Scalar x) {
  const Scalar a = std::abs(x);
  return a + std::log1p(std::exp(Scalar(-2) * a)) - std::numbers::ln2_v<Scalar>;
}

template <typename Scalar>
Scalar activate(Activation act, Scalar x) {
  switch (act) {
    case Activation::sigmoid: return sigmoid(x);
    case Activation::softplus: return softplus(x);
    case Activation::identity: return x;
  }
  return x;
}

/// d act / d pre, given both the pre-activation and the activation value.
template <typename Scalar>
Scalar activation_slope(Activation act, Scalar pre, Scalar post) {
  switch (act) {
    case Activation::sigmoid: return post * (Scalar(1) - post);
    case Activation::softplus: return sigmoid(pre);
    case Activation::identity: return Scalar(1);
  }
  return Scalar(1);
}

}  // namespace imae
