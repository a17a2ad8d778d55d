#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>

#include "imae/errors.hpp"

namespace imae {

// One sample per row throughout; storage is row-major so a sample is a
// contiguous slice.
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using RowVectorX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using RowVector = RowVectorX<double>;
using Vector = VectorX<double>;
using Index = Eigen::Index;

template <typename Derived>
std::string shape_string(const Eigen::EigenBase<Derived>& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

template <typename A, typename B>
void require_same_shape(const Eigen::EigenBase<A>& a, const Eigen::EigenBase<B>& b,
                        std::string_view what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(what) + ": shape mismatch " + shape_string(a) + " vs " +
                     shape_string(b));
  }
}

/// xoshiro256** seeded through splitmix64.
///
/// The output stream depends only on the seed and the sequence of calls, so
/// results are reproducible across compilers and standard libraries (the
/// <random> distributions are not).
class Rng {
 public:
  static constexpr std::string_view algorithm_id = "xoshiro256**/splitmix64";

  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  explicit Rng(std::uint64_t seed = 0) : seed_(seed) {
    std::uint64_t x = seed;
    for (auto& s : state_) s = splitmix64(x);
  }

  std::uint64_t seed() const { return seed_; }

  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
  std::uint64_t uniform_index(std::uint64_t n) {
    if (n == 0) throw ArgumentError("uniform_index: empty range");
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// A new independent stream; advances this one by a single draw.
  Rng split() { return Rng(next_u64()); }

  friend bool operator==(const Rng&, const Rng&) = default;

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Deterministic sub-seed for a named purpose ("init", "batching", ...).
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  Rng mix(master ^ h);
  return mix.next_u64();
}

template <typename A, typename B>
auto matmul(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  using Scalar = typename A::Scalar;
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions differ, " + shape_string(a) + " x " +
                     shape_string(b));
  }
  MatrixX<Scalar> out(a.rows(), b.cols());
  out.noalias() = a * b;
  return out;
}

enum class ElementOp { add, sub, mul };

template <typename A, typename B>
auto elementwise(ElementOp op, const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  using Scalar = typename A::Scalar;
  require_same_shape(a, b, "elementwise");
  MatrixX<Scalar> out(a.rows(), a.cols());
  switch (op) {
    case ElementOp::add: out = a + b; break;
    case ElementOp::sub: out = a - b; break;
    case ElementOp::mul: out = a.cwiseProduct(b); break;
  }
  return out;
}

template <typename A>
auto scale(const Eigen::MatrixBase<A>& a, typename A::Scalar s) {
  return MatrixX<typename A::Scalar>(a * s);
}

template <typename A, typename F>
auto map_unary(const Eigen::MatrixBase<A>& a, F&& f) {
  return MatrixX<typename A::Scalar>(a.unaryExpr(std::forward<F>(f)));
}

/// Independent normal draws filled in row-major order.
template <typename Scalar = double>
MatrixX<Scalar> gaussian(Rng& rng, Index rows, Index cols, Scalar mean, Scalar stddev) {
  if (!(stddev >= 0)) throw ArgumentError("gaussian: std must be >= 0");
  MatrixX<Scalar> out(rows, cols);
  Scalar* p = out.data();
  for (Index i = 0; i < out.size(); ++i) p[i] = mean + stddev * static_cast<Scalar>(rng.normal());
  return out;
}

/// Entries are 1 with probability keep_prob, else 0.
template <typename Scalar = double>
MatrixX<Scalar> bernoulli_mask(Rng& rng, Index rows, Index cols, double keep_prob) {
  if (!(keep_prob >= 0.0 && keep_prob <= 1.0)) {
    throw ArgumentError("bernoulli_mask: keep_prob must lie in [0, 1]");
  }
  MatrixX<Scalar> out(rows, cols);
  Scalar* p = out.data();
  for (Index i = 0; i < out.size(); ++i) p[i] = rng.uniform() < keep_prob ? Scalar(1) : Scalar(0);
  return out;
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.allFinite();
}

}  // namespace imae
