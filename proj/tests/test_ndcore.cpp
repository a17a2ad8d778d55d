#include <gtest/gtest.h>

#include "imae/ndcore.hpp"

using namespace imae;

namespace {

Matrix random_matrix(Rng& rng, Index r, Index c) { return gaussian<double>(rng, r, c, 0.0, 1.0); }

Matrix triple_loop(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows(), b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < b.cols(); ++j)
      for (Index k = 0; k < a.cols(); ++k) out(i, j) += a(i, k) * b(k, j);
  return out;
}

}  // namespace

TEST(Matmul, IdentityLeavesMatrixUnchanged) {
  Rng rng(1);
  const Matrix a = random_matrix(rng, 3, 4);
  EXPECT_EQ(Matrix(matmul(Matrix::Identity(3, 3), a)), a);
}

TEST(Matmul, HandCheckedTwoByTwo) {
  Matrix a(2, 2), b(2, 1);
  a << 1, 2, 3, 4;
  b << 0, 1;
  const Matrix c = matmul(a, b);
  EXPECT_EQ(c(0, 0), 2.0);
  EXPECT_EQ(c(1, 0), 4.0);
}

TEST(Matmul, MatchesTripleLoop) {
  Rng rng(2);
  const Matrix a = random_matrix(rng, 5, 7);
  const Matrix b = random_matrix(rng, 7, 3);
  const Matrix c = matmul(a, b);
  const Matrix ref = triple_loop(a, b);
  EXPECT_LE((c - ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Matmul, AssociativeAgainstOracle) {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const Matrix a = random_matrix(rng, 4, 6), b = random_matrix(rng, 6, 5), c = random_matrix(rng, 5, 3);
    const Matrix lhs = matmul(Matrix(matmul(a, b)), c);
    const Matrix rhs = triple_loop(a, triple_loop(b, c));
    EXPECT_LE((lhs - rhs).norm() / rhs.norm(), 1e-10);
  }
}

TEST(Matmul, ShapeErrorNamesBothShapes) {
  const Matrix a(2, 3), b(4, 5);
  try {
    (void)matmul(a, b);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("2x3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("4x5"), std::string::npos) << msg;
  }
}

TEST(Elementwise, Basics) {
  Rng rng(4);
  const Matrix a = random_matrix(rng, 3, 3);
  EXPECT_EQ(Matrix(elementwise(ElementOp::add, a, Matrix::Zero(3, 3))), a);
  Matrix x(1, 2), y(1, 2);
  x << 2, 3;
  y << 4, 5;
  const Matrix p = elementwise(ElementOp::mul, x, y);
  EXPECT_EQ(p(0, 0), 8.0);
  EXPECT_EQ(p(0, 1), 15.0);
  EXPECT_EQ(Matrix(scale(a, 0.0)), Matrix::Zero(3, 3));
  EXPECT_THROW((void)elementwise(ElementOp::sub, a, Matrix(2, 3)), ShapeError);
  const Matrix sq = map_unary(x, [](double v) { return v * v; });
  EXPECT_EQ(sq(0, 1), 9.0);
}

TEST(Elementwise, DoubleTransposeIsIdentity) {
  Rng rng(5);
  const Matrix a = random_matrix(rng, 4, 7);
  EXPECT_EQ(Matrix(a.transpose().transpose()), a);
}

TEST(Gaussian, ZeroStdIsConstant) {
  Rng rng(6);
  const Matrix g = gaussian<double>(rng, 3, 4, 1.5, 0.0);
  EXPECT_TRUE((g.array() == 1.5).all());
  EXPECT_THROW((void)gaussian<double>(rng, 1, 1, 0.0, -0.1), ArgumentError);
}

TEST(Gaussian, SampleMoments) {
  Rng rng(7);
  const Matrix g = gaussian<double>(rng, 1000, 100, 0.0, 0.3);
  const double mean = g.mean();
  const double sd = std::sqrt((g.array() - mean).square().sum() / static_cast<double>(g.size() - 1));
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_NEAR(sd, 0.3, 0.01);
}

TEST(Gaussian, SameSeedSameMatrix) {
  Rng a(8), b(8);
  EXPECT_EQ(gaussian<double>(a, 5, 5, 0.0, 1.0), gaussian<double>(b, 5, 5, 0.0, 1.0));
}

TEST(BernoulliMask, Extremes) {
  Rng rng(9);
  EXPECT_TRUE((bernoulli_mask<double>(rng, 10, 10, 1.0).array() == 1.0).all());
  EXPECT_TRUE((bernoulli_mask<double>(rng, 10, 10, 0.0).array() == 0.0).all());
  EXPECT_THROW((void)bernoulli_mask<double>(rng, 2, 2, 1.5), ArgumentError);
  EXPECT_THROW((void)bernoulli_mask<double>(rng, 2, 2, -0.1), ArgumentError);
}

TEST(BernoulliMask, KeepFraction) {
  Rng rng(10);
  const Matrix m = bernoulli_mask<double>(rng, 1000, 100, 0.7);
  EXPECT_TRUE(((m.array() == 0.0) || (m.array() == 1.0)).all());
  EXPECT_NEAR(m.mean(), 0.7, 0.01);
}

TEST(Rng, StreamIsReproducible) {
  Rng a(11), b(11);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
  Rng c(12);
  EXPECT_NE(Rng(11).next_u64(), c.next_u64());
}

TEST(Rng, UniformRange) {
  Rng rng(13);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(rng.uniform_index(7), 7u);
  }
}

TEST(Rng, DerivedSeedsDiffer) {
  EXPECT_NE(derive_seed(1, "init"), derive_seed(1, "batching"));
  EXPECT_NE(derive_seed(1, "init"), derive_seed(2, "init"));
  EXPECT_EQ(derive_seed(1, "init"), derive_seed(1, "init"));
}
