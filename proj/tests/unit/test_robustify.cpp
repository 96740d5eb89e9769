#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "ikd/decomposition.hpp"
#include "ikd/error.hpp"
#include "ikd/robustify.hpp"
#include "oracles.hpp"

using namespace ikd;

namespace {

ThresholdedGraph graph_from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
  Matrix S = Matrix::Identity(n, n);
  for (auto [i, j] : edges) S(i, j) = S(j, i) = 0.5;
  return threshold_graph(covariance_from_matrix(S), 0.1);
}

std::vector<std::vector<int>> as_int(const CliqueCover& cover) {
  std::vector<std::vector<int>> out;
  for (const auto& c : cover.cliques) out.emplace_back(c.begin(), c.end());
  return out;
}

Matrix rotation2(double angle) {
  Matrix R(2, 2);
  R << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return R;
}

Matrix random_points(Index n, Index M, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Matrix P(n, M);
  for (Index i = 0; i < P.size(); ++i) P.data()[i] = u(rng);
  return P;
}

// Exact SE covariance of T points whose graph is two cliques: points
// [0, a) and [a - shared, T) overlap in `shared` points; entries between the
// two private parts are set below threshold.
CovarianceEstimate two_clique_covariance(const Matrix& Z, Index a, Index shared) {
  Matrix K = oracle::exact_kernel(Z, oracle::Family::kSe, 0.0, 1.0);
  const Index T = Z.rows();
  for (Index i = 0; i < a - shared; ++i) {
    for (Index j = a; j < T; ++j) K(i, j) = K(j, i) = 1e-9;
  }
  return covariance_from_matrix(K);
}

}  // namespace

TEST(CliqueCover, CompleteGraph) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < 5; ++i) {
    for (int j = i + 1; j < 5; ++j) edges.emplace_back(i, j);
  }
  const auto cover = maximal_clique_cover(graph_from_edges(5, edges));
  EXPECT_EQ(as_int(cover), (std::vector<std::vector<int>>{{0, 1, 2, 3, 4}}));
}

TEST(CliqueCover, PathGraph) {
  auto cliques = as_int(maximal_clique_cover(graph_from_edges(3, {{0, 1}, {1, 2}})));
  std::sort(cliques.begin(), cliques.end());
  EXPECT_EQ(cliques, (std::vector<std::vector<int>>{{0, 1}, {1, 2}}));
}

TEST(CliqueCover, TwoFourCliquesSharingThree) {
  // {0,1,2,3} and {1,2,3,4}.
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < 5; ++i) {
    for (int j = i + 1; j < 5; ++j) {
      if (!(i == 0 && j == 4)) edges.emplace_back(i, j);
    }
  }
  const auto g = graph_from_edges(5, edges);
  auto cliques = as_int(maximal_clique_cover(g));
  std::sort(cliques.begin(), cliques.end());
  std::vector<std::vector<bool>> adj(5, std::vector<bool>(5));
  for (auto [i, j] : edges) adj[i][j] = adj[j][i] = true;
  EXPECT_EQ(cliques, oracle::all_maximal_cliques(adj));
}

TEST(CliqueCover, DisconnectedIsError) {
  try {
    maximal_clique_cover(graph_from_edges(4, {{0, 1}, {2, 3}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDisconnected);
    EXPECT_NE(std::string(e.what()).find("s0"), std::string::npos);
  }
}

TEST(CliqueCover, RandomGraphsGiveMaximalCliquesCoveringAll) {
  std::mt19937_64 rng(17);
  std::bernoulli_distribution coin(0.45);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 4 + trial % 9;  // up to 12
    std::vector<std::pair<int, int>> edges;
    std::vector<std::vector<bool>> adj(n, std::vector<bool>(n));
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (coin(rng)) {
          edges.emplace_back(i, j);
          adj[i][j] = adj[j][i] = true;
        }
      }
    }
    const auto g = graph_from_edges(n, edges);
    if (!g.connected()) continue;
    ++checked;
    const auto maximal = oracle::all_maximal_cliques(adj);
    const auto cover = as_int(maximal_clique_cover(g));
    EXPECT_LE(static_cast<int>(cover.size()), n);
    std::vector<bool> seen(n, false);
    for (const auto& c : cover) {
      EXPECT_TRUE(std::binary_search(maximal.begin(), maximal.end(), c)) << "trial " << trial;
      for (int v : c) seen[v] = true;
    }
    EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }));
  }
  EXPECT_GT(checked, 100);
}

TEST(CliqueCover, Deterministic) {
  std::vector<std::pair<int, int>> edges = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {1, 3}, {3, 4}};
  const auto g = graph_from_edges(5, edges);
  EXPECT_EQ(as_int(maximal_clique_cover(g)), as_int(maximal_clique_cover(g)));
}

TEST(RigidAlign, Identity) {
  std::mt19937_64 rng(1);
  const Matrix P = random_points(6, 2, rng);
  const auto tf = rigid_align(P, P);
  EXPECT_TRUE(tf.R.isApprox(Matrix::Identity(2, 2), 1e-12));
  EXPECT_LE(tf.t.norm(), 1e-12);
}

TEST(RigidAlign, RecoversRotationAndShift) {
  std::mt19937_64 rng(2);
  const Matrix P = random_points(8, 2, rng);
  const Matrix R = rotation2(M_PI / 2.0);
  Vector t(2);
  t << 1.0, 2.0;
  const Matrix Q = (P * R.transpose()).rowwise() + t.transpose();
  const auto tf = rigid_align(P, Q);
  EXPECT_LE((tf.R - R).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((tf.t - t).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((tf.R.transpose() * tf.R - Matrix::Identity(2, 2)).norm(), 1e-10);
}

TEST(RigidAlign, RecoversReflection) {
  std::mt19937_64 rng(3);
  const Matrix P = random_points(8, 2, rng);
  Matrix F(2, 2);
  F << 1, 0, 0, -1;
  const auto tf = rigid_align(P, P * F.transpose());
  EXPECT_NEAR(tf.R.determinant(), -1.0, 1e-10);
  EXPECT_LE((tf.R - F).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(RigidAlign, DegenerateSourceIsError) {
  Matrix P(4, 2);
  P << 0, 0, 1, 1, 2, 2, 3, 3;  // collinear
  try {
    rigid_align(P, P);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegenerate);
  }
  EXPECT_THROW(rigid_align(P.topRows(2), P.topRows(2)), Error);
}

TEST(RigidAlign, NoWorseThanRandomOrthogonalTransforms) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> noise(0.0, 0.3);
  for (int trial = 0; trial < 20; ++trial) {
    const Index M = 2 + trial % 2;
    const Matrix P = random_points(10, M, rng);
    Matrix Q = P * oracle::random_orthogonal(static_cast<int>(M), rng).transpose();
    for (Index i = 0; i < Q.size(); ++i) Q.data()[i] += noise(rng);
    const auto tf = rigid_align(P, Q);
    const double ours = (tf.apply(P) - Q).squaredNorm();
    EXPECT_LE(ours, oracle::best_random_rigid_objective(P, Q, 1000, rng) + 1e-12);
    EXPECT_NEAR(ours, oracle::rigid_objective(P, Q, tf.R), 1e-10);
  }
}

TEST(Blockwise, SingleCliqueEqualsPlainIkd) {
  std::mt19937_64 rng(5);
  const Matrix Z = random_points(20, 2, rng) * 0.5;
  const auto cov = covariance_from_matrix(oracle::exact_kernel(Z, oracle::Family::kSe, 0.0, 1.0));
  const KernelSpec spec{SquaredExponential{}, 1.0};
  const auto plain = decompose_covariance(cov, spec, 2);
  const auto block = blockwise_ikd(cov, spec, 2, 0.01);
  EXPECT_TRUE((plain.Z.array() == block.Z.array()).all());
}

TEST(Blockwise, TwoCliquesMergeToPlainIkd) {
  std::mt19937_64 rng(6);
  const Matrix Z = random_points(40, 2, rng);
  const auto cov = two_clique_covariance(Z, 24, 5);
  const KernelSpec spec{SquaredExponential{}, 1.0};
  BlockwiseDiagnostics diag;
  const auto block = blockwise_ikd(cov, spec, 2, 1e-8, &diag);
  EXPECT_EQ(diag.cliques, 2);
  EXPECT_GE(oracle::affine_r2(block.Z, Z), 0.999);
  const Matrix K = oracle::exact_kernel(Z, oracle::Family::kSe, 0.0, 1.0);
  const auto plain = decompose_covariance(covariance_from_matrix(K), spec, 2);
  EXPECT_LE(aligned_rmse(block.Z, plain.Z), 1e-6);
  EXPECT_LE(diag.max_shared_discrepancy, 1e-6);
}

TEST(Blockwise, SharingExactlyMPointsIsError) {
  std::mt19937_64 rng(7);
  const Matrix Z = random_points(40, 2, rng);
  const auto cov = two_clique_covariance(Z, 24, 2);
  try {
    blockwise_ikd(cov, {SquaredExponential{}, 1.0}, 2, 1e-8);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kMergeStarvation);
  }
}

TEST(Blockwise, NoisyMergeConsistency) {
  // Per-clique recovery from a perturbed covariance; shared points must land
  // within 10x the per-clique recovery RMSE of their merged position.
  std::mt19937_64 rng(8);
  const Matrix Z = random_points(40, 2, rng);
  CovarianceEstimate cov = two_clique_covariance(Z, 24, 6);
  std::normal_distribution<double> noise(0.0, 1e-4);
  for (Index i = 0; i < 40; ++i) {
    for (Index j = i + 1; j < 40; ++j) {
      if (cov.S(i, j) > 1e-3) cov.S(i, j) = cov.S(j, i) = std::min(0.999, cov.S(i, j) + noise(rng));
    }
  }
  const KernelSpec spec{SquaredExponential{}, 1.0};
  BlockwiseDiagnostics diag;
  const auto block = blockwise_ikd(cov, spec, 2, 1e-8, &diag);
  ASSERT_EQ(diag.cliques, 2);

  double worst_clique_rmse = 0.0;
  for (auto [lo, hi] : {std::pair<Index, Index>{0, 24}, std::pair<Index, Index>{18, 40}}) {
    std::vector<Index> idx;
    for (Index i = lo; i < hi; ++i) idx.push_back(i);
    Matrix sub(hi - lo, hi - lo);
    for (Index a = 0; a < hi - lo; ++a) {
      for (Index b = 0; b < hi - lo; ++b) sub(a, b) = cov.S(idx[a], idx[b]);
    }
    CovarianceEstimate sub_cov{sub, cov.sigma2_hat};
    const auto local = decompose_covariance(sub_cov, spec, 2);
    worst_clique_rmse = std::max(worst_clique_rmse, aligned_rmse(local.Z, Z.middleRows(lo, hi - lo)));
  }
  EXPECT_LE(diag.max_shared_discrepancy, 10.0 * worst_clique_rmse);
  EXPECT_GE(oracle::affine_r2(block.Z, Z), 0.99);
}
