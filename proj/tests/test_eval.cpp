#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>

#include "imae/eval.hpp"

using namespace imae;
namespace fs = std::filesystem;

namespace {

std::size_t brute_force_matches(const std::vector<int>& a, const std::vector<int>& l, int k) {
  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t best = 0;
  do {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < a.size(); ++i) hits += perm[static_cast<std::size_t>(a[i])] == l[i];
    best = std::max(best, hits);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::vector<int> random_labels(Rng& rng, std::size_t n, int k) {
  std::vector<int> v(n);
  for (auto& x : v) x = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(k)));
  return v;
}

Network identity_net(Index d) {
  Architecture a;
  a.input_width = d;
  a.layers = {{d, Activation::identity}};
  Network net(a);
  net.layer(0).weights = Matrix::Identity(d, d);
  return net;
}

Dataset random_images(std::uint64_t seed, Index n, Index d) {
  Rng rng(seed);
  Dataset ds;
  ds.images.resize(n, d);
  for (Index i = 0; i < ds.images.size(); ++i) ds.images.data()[i] = rng.uniform();
  for (Index i = 0; i < n; ++i) ds.labels.push_back(static_cast<int>(i % 10));
  return ds;
}

}  // namespace

TEST(RandIndex, MatchesBruteForce) {
  Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    const int k = 1 + static_cast<int>(rng.uniform_index(6));
    const std::size_t n = 1 + rng.uniform_index(50);
    const auto a = random_labels(rng, n, k);
    const auto l = random_labels(rng, n, k);
    EXPECT_EQ(rand_index(a, l, k), static_cast<double>(brute_force_matches(a, l, k)) / static_cast<double>(n));
  }
}

TEST(RandIndex, ClosedForms) {
  Rng rng(2);
  const auto l = random_labels(rng, 40, 5);
  EXPECT_EQ(rand_index(l, l, 5), 1.0);
  std::vector<int> relabeled(l.size());
  const int perm[] = {3, 0, 4, 1, 2};
  for (std::size_t i = 0; i < l.size(); ++i) relabeled[i] = perm[l[i]];
  EXPECT_EQ(rand_index(relabeled, l, 5), 1.0);

  std::vector<int> balanced, one(100, 0);
  for (int i = 0; i < 100; ++i) balanced.push_back(i % 10);
  EXPECT_DOUBLE_EQ(rand_index(one, balanced, 10), 0.1);
  EXPECT_THROW((void)rand_index(std::vector<int>{0, 1}, std::vector<int>{0}, 2), ArgumentError);
}

TEST(RandIndex, InvariantUnderClusterRelabeling) {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const auto a = random_labels(rng, 200, 10);
    const auto l = random_labels(rng, 200, 10);
    std::vector<int> perm(10);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<int> b(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) b[i] = perm[static_cast<std::size_t>(a[i])];
    EXPECT_EQ(rand_index(a, l, 10), rand_index(b, l, 10));
  }
}

TEST(RandIndex, HungarianBeatsGreedy) {
  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    const int k = 2 + static_cast<int>(rng.uniform_index(9));
    const auto a = random_labels(rng, 100, k);
    const auto l = random_labels(rng, 100, k);
    const auto table = contingency(a, l, k);
    std::vector<char> used(static_cast<std::size_t>(k), 0);
    std::int64_t greedy = 0;
    for (const auto& row : table) {
      std::int64_t best = -1;
      std::size_t col = 0;
      for (std::size_t j = 0; j < row.size(); ++j) {
        if (!used[j] && row[j] > best) {
          best = row[j];
          col = j;
        }
      }
      used[col] = 1;
      greedy += best;
    }
    EXPECT_GE(rand_index(a, l, k) * 100.0 + 1e-9, static_cast<double>(greedy));
  }
}

TEST(KMeans, SeparatedBlobs) {
  Rng rng(5);
  Matrix pts(100, 2);
  std::vector<int> truth;
  for (Index i = 0; i < 100; ++i) {
    const int blob = i < 50 ? 0 : 1;
    truth.push_back(blob);
    pts(i, 0) = (blob ? 10.0 : -10.0) + 0.5 * rng.normal();
    pts(i, 1) = 0.5 * rng.normal();
  }
  const ClusterResult r = kmeans(pts, 2, rng);
  EXPECT_EQ(rand_index(r.assignments, truth, 2), 1.0);
}

TEST(KMeans, KEqualsPointCountGivesZeroInertia) {
  Rng rng(6);
  const Matrix pts = gaussian<double>(rng, 12, 3, 0.0, 1.0);
  EXPECT_EQ(kmeans(pts, 12, rng).inertia, 0.0);
  EXPECT_THROW((void)kmeans(pts, 0, rng), ArgumentError);
  EXPECT_THROW((void)kmeans(pts, 13, rng), ArgumentError);
}

TEST(KMeans, InertiaNonIncreasingAndNearestAssignment) {
  Rng rng(7);
  for (int t = 0; t < 10; ++t) {
    const Matrix pts = gaussian<double>(rng, 300, 4, 0.0, 1.0);
    const ClusterResult r = kmeans(pts, 8, rng);
    for (std::size_t i = 1; i < r.inertia_history.size(); ++i) {
      EXPECT_LE(r.inertia_history[i], r.inertia_history[i - 1] * (1 + 1e-12));
    }
    double inertia = 0.0;
    for (Index i = 0; i < pts.rows(); ++i) {
      const int c = r.assignments[static_cast<std::size_t>(i)];
      const double own = (pts.row(i) - r.centroids.row(c)).squaredNorm();
      for (Index j = 0; j < r.centroids.rows(); ++j) {
        EXPECT_LE(own, (pts.row(i) - r.centroids.row(j)).squaredNorm() + 1e-12);
      }
      inertia += own;
    }
    EXPECT_NEAR(inertia, r.inertia, 1e-9 * inertia);
  }
}

TEST(KMeans, DeterministicForSeed) {
  Rng data(8);
  const Matrix pts = gaussian<double>(data, 200, 3, 0.0, 1.0);
  Rng a(9), b(9);
  EXPECT_EQ(kmeans(pts, 5, a).assignments, kmeans(pts, 5, b).assignments);
}

TEST(SigmaPrime, ZeroAndSaturatedNets) {
  const Dataset ds = random_images(10, 20, 8);
  EXPECT_EQ(sigma_prime(Network(Architecture::shallow(8, 4)), ds.images), 0.25);
  Network big(Architecture::shallow(8, 4));
  big.layer(0).weights = Matrix::Constant(4, 8, 1000.0);
  EXPECT_LT(sigma_prime(big, ds.images), 1e-100);
  EXPECT_THROW((void)sigma_prime(identity_net(8), ds.images), ConfigError);
}

TEST(Robustness, IdentityNetwork) {
  const Dataset test = random_images(11, 2000, 50);
  const Network net = identity_net(50);
  Rng rng(12);
  const auto rows = robustness_sweep(net, test, {NoiseSpec::none(), NoiseSpec::mask(0.3)}, rng);
  EXPECT_EQ(rows[0].mean_l2, 0.0);
  const double expected = 0.3 * test.images.rowwise().squaredNorm().mean();
  EXPECT_NEAR(rows[1].mean_l2, expected, 0.02 * expected);
}

TEST(Robustness, NoNoiseEqualsPlainReconstruction) {
  Rng rng(13);
  const Network net = init_params<double>(Architecture::shallow(30, 7), rng);
  const Dataset test = random_images(14, 2500, 30);
  const auto rows = robustness_sweep(net, test, {NoiseSpec::none()}, rng);
  const auto t = forward(net, test.images);
  EXPECT_EQ(rows[0].mean_l2, reconstruction_l2(test.images, t.output()));
  EXPECT_EQ(default_robustness_grid().size(), 8u);
}

TEST(ClusterEval, ReproducibleWithFixedSeed) {
  Rng rng(15);
  const Network net = init_params<double>(Architecture::shallow(30, 7), rng);
  const Dataset test = random_images(16, 300, 30);
  ClusterEvalOptions opt;
  opt.iterations = 1;
  opt.n = 100;
  Rng a(17), b(17);
  const auto r1 = cluster_eval(net, test, opt, a);
  const auto r2 = cluster_eval(net, test, opt, b);
  EXPECT_EQ(r1.rand_clean, r2.rand_clean);
  EXPECT_EQ(r1.rand_noisy, r2.rand_noisy);
  EXPECT_GE(r1.rand_clean, 0.1);
  EXPECT_LE(r1.rand_clean, 1.0);
  EXPECT_EQ(r1.seeds.size(), 1u);
}

TEST(Codes, CsvRoundTrip) {
  Rng rng(18);
  const Network net = init_params<double>(Architecture::shallow(30, 7), rng);
  const Dataset ds = random_images(19, 57, 30);
  const fs::path p = fs::temp_directory_path() / "imae_test_codes.csv";
  export_codes(net, ds, p);
  const CodeTable t = read_codes(p);
  EXPECT_EQ(t.labels, ds.labels);
  ASSERT_EQ(t.codes.rows(), 57);
  ASSERT_EQ(t.codes.cols(), 7);
  EXPECT_LE((t.codes - encode(net, ds.images)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Report, JsonAndCsv) {
  EvalReport r;
  r.model = "IMAE";
  r.robustness = {{NoiseSpec::mask(0.3), 12.5}};
  r.rand_clean = 0.5;
  r.rand_noisy = 0.25;
  r.cluster_noise = "gaussian:0.2";
  const std::string csv = r.to_csv();
  EXPECT_NE(csv.find("IMAE,mean_l2,mask:0.3,12.5"), std::string::npos) << csv;
  EXPECT_NE(csv.find("IMAE,rand_noisy,gaussian:0.2,0.25"), std::string::npos) << csv;
  EXPECT_NE(r.to_json().find("\"sigma_prime\": null"), std::string::npos);
}
