#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ikd/decomposition.hpp"
#include "ikd/error.hpp"
#include "ikd/robustify.hpp"
#include "oracles.hpp"

using namespace ikd;

namespace {

Matrix uniform_latent(Index T, Index M, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Matrix Z(T, M);
  for (Index i = 0; i < Z.size(); ++i) Z.data()[i] = u(rng);
  return Z;
}

ScaledDistanceMatrix collinear() {
  Matrix D(3, 3);
  D << 0, 1, 4, 1, 0, 1, 4, 1, 0;
  return {D};
}

}  // namespace

TEST(ScaledDistances, InvertsExactKernel) {
  const Matrix Z = uniform_latent(30, 2, 1);
  const Matrix K = oracle::exact_kernel(Z, oracle::Family::kSe, 0.0, 1.0);
  const auto D = scaled_distances(covariance_from_matrix(K), {SquaredExponential{}, 1.0});
  EXPECT_LE((D.D - oracle::squared_distances(Z)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_TRUE(D.D.diagonal().isZero(0.0));
}

TEST(ScaledDistances, TwoByTwo) {
  Matrix S(2, 2);
  S << 1, std::exp(-2.0), std::exp(-2.0), 1;
  const auto D = scaled_distances(covariance_from_matrix(S), {SquaredExponential{}, 1.0});
  EXPECT_NEAR(D.D(0, 1), 4.0, 1e-14);
  EXPECT_NEAR(D.D(1, 0), 4.0, 1e-14);
}

TEST(ScaledDistances, DuplicatePointsGiveZero) {
  Matrix S(2, 2);
  S << 1, 1, 1, 1;
  const auto D = scaled_distances(covariance_from_matrix(S), {SquaredExponential{}, 1.0});
  EXPECT_EQ(D.D(0, 1), 0.0);
}

TEST(ScaledDistances, NonPositiveEntryPropagatesDomainError) {
  Matrix S(2, 2);
  S << 1, -0.1, -0.1, 1;
  try {
    scaled_distances(covariance_from_matrix(S), {SquaredExponential{}, 1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDomain);
  }
}

TEST(SelectReference, Examples) {
  Matrix D2(2, 2);
  D2 << 0, 1, 1, 0;
  EXPECT_EQ(select_reference({D2}), 0);
  EXPECT_EQ(select_reference(collinear()), 1);
  EXPECT_EQ(select_reference({Matrix::Zero(4, 4)}), 0);
}

TEST(GramLift, Examples) {
  const auto lift = gram_lift(collinear(), 0);
  Matrix expected(3, 3);
  expected << 0, 0, 0, 0, 1, 2, 0, 2, 4;
  EXPECT_TRUE((lift.G.array() == expected.array()).all());
  EXPECT_EQ(lift.reference, 0);

  Matrix D(2, 2);
  D << 0, 9, 9, 0;
  Matrix g2(2, 2);
  g2 << 0, 0, 0, 9;
  EXPECT_TRUE((gram_lift({D}, 0).G.array() == g2.array()).all());
  EXPECT_TRUE(gram_lift({Matrix::Zero(3, 3)}, 1).G.isZero(0.0));
}

TEST(GramLift, ReferenceRowAndColumnZero) {
  const Matrix D = oracle::squared_distances(uniform_latent(10, 2, 2));
  const auto lift = gram_lift({D}, 4);
  EXPECT_TRUE(lift.G.row(4).isZero(0.0));
  EXPECT_TRUE(lift.G.col(4).isZero(0.0));
  EXPECT_TRUE((lift.G - lift.G.transpose()).isZero(0.0));
  for (Index i = 0; i < 10; ++i) EXPECT_DOUBLE_EQ(lift.G(i, i), D(i, 4));
}

TEST(TopMPsdFactor, RankOneHandExample) {
  const auto est = top_m_psd_factor(gram_lift(collinear(), 0), 1);
  ASSERT_EQ(est.eigenvalues.size(), 1);
  EXPECT_NEAR(est.eigenvalues(0), 5.0, 1e-12);
  EXPECT_NEAR(est.Z(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(est.Z(1, 0), 1.0, 1e-12);
  EXPECT_NEAR(est.Z(2, 0), 2.0, 1e-12);
  EXPECT_FALSE(est.rank_deficient);
}

TEST(TopMPsdFactor, ZeroGramIsFlagged) {
  const auto est = top_m_psd_factor({Matrix::Zero(3, 3), 0}, 2);
  EXPECT_TRUE(est.Z.isZero(0.0));
  EXPECT_TRUE(est.rank_deficient);
}

TEST(TopMPsdFactor, RequiresMBelowT) {
  try {
    top_m_psd_factor(gram_lift(collinear(), 0), 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
  }
}

TEST(TopMPsdFactor, CountsDiscardedNegatives) {
  // Distances violating the triangle inequality give an indefinite Gram.
  Matrix D(3, 3);
  D << 0, 1, 1, 1, 0, 9, 1, 9, 0;
  const auto est = top_m_psd_factor(gram_lift({D}, 0), 1);
  EXPECT_EQ(est.discarded_negative, 1);
}

TEST(TopMPsdFactor, RankPropertyOnExactDistances) {
  const Matrix D = oracle::squared_distances(uniform_latent(30, 2, 3));
  const auto lift = gram_lift({D}, select_reference({D}));
  Eigen::SelfAdjointEigenSolver<Matrix> eig(lift.G);
  const Vector lambda = eig.eigenvalues().reverse();
  for (Index m = 2; m < 30; ++m) EXPECT_LE(std::abs(lambda(m)), 1e-8 * lambda(0));
}

TEST(TopMPsdFactor, SignConvention) {
  const Matrix D = oracle::squared_distances(uniform_latent(25, 3, 4));
  const auto est = top_m_psd_factor(gram_lift({D}, 0), 3);
  for (Index m = 0; m < 3; ++m) {
    Index arg = 0;
    est.Z.col(m).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(est.Z(arg, m), 0.0);
  }
  for (Index m = 1; m < 3; ++m) EXPECT_GT(est.eigenvalues(m - 1), est.eigenvalues(m));
}

TEST(Decomposition, ReproducesDistancesForEveryKernel) {
  const std::vector<std::pair<KernelSpec, std::pair<oracle::Family, double>>> kernels = {
      {{SquaredExponential{}, 1.0}, {oracle::Family::kSe, 0.0}},
      {{RationalQuadratic{2.0}, 1.0}, {oracle::Family::kRq, 2.0}},
      {{GammaExponential{1.2}, 1.0}, {oracle::Family::kGammaExp, 1.2}},
      {{Matern{1.5}, 1.0}, {oracle::Family::kMatern, 1.5}},
      {{Matern{0.9}, 1.0}, {oracle::Family::kMatern, 0.9}},
  };
  for (Index M = 1; M <= 3; ++M) {
    const Matrix Z = uniform_latent(40, M, 10 + static_cast<std::uint64_t>(M));
    const Matrix D = oracle::squared_distances(Z);
    for (const auto& [spec, ref] : kernels) {
      const Matrix K = oracle::exact_kernel(Z, ref.first, ref.second, 1.0);
      const auto est = decompose_covariance(covariance_from_matrix(K), spec, M);
      const Matrix Dhat = oracle::squared_distances(est.Z);
      EXPECT_LE((Dhat - D).cwiseAbs().maxCoeff(), 1e-8) << family_name(spec) << " M=" << M;
      EXPECT_TRUE(est.Z.row(est.reference).isZero(0.0));
    }
  }
}

TEST(Decomposition, ReferenceInvariance) {
  const Matrix Z = uniform_latent(50, 2, 21);
  const Matrix D = oracle::squared_distances(Z);
  const auto a = top_m_psd_factor(gram_lift({D}, 0), 2);
  const auto b = top_m_psd_factor(gram_lift({D}, 37), 2);
  EXPECT_LE(aligned_rmse(a.Z, b.Z), 1e-8);
}

TEST(Decomposition, NearDegenerateSpectrumIsFlagged) {
  // Square corners around a centre reference: the two leading eigenvalues tie.
  Matrix Z(5, 2);
  Z << 0, 0, 1, 0, 0, 1, -1, 0, 0, -1;
  const auto est = top_m_psd_factor(gram_lift({oracle::squared_distances(Z)}, 0), 2);
  EXPECT_TRUE(est.near_degenerate);
}

TEST(Pipeline, StrategiesAgreeWhenEverythingAboveThreshold) {
  const Matrix Z = uniform_latent(30, 2, 5) * 0.3;
  const Matrix K = oracle::exact_kernel(Z, oracle::Family::kSe, 0.0, 1.0);
  const auto cov = covariance_from_matrix(K);
  ASSERT_GT(K.minCoeff(), 0.01);
  const KernelSpec spec{SquaredExponential{}, 1.0};
  const auto none = ikd_from_covariance(cov, spec, 2, {Strategy::kNone});
  const auto geo = ikd_from_covariance(cov, spec, 2, {Strategy::kGeodesic});
  EXPECT_TRUE((none.Z.array() == geo.Z.array()).all());
  EXPECT_TRUE((none.eigenvalues.array() == geo.eigenvalues.array()).all());
  EXPECT_EQ(none.reference, geo.reference);
}

TEST(Pipeline, Deterministic) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal;
  Matrix X(40, 30);
  for (Index i = 0; i < X.size(); ++i) X.data()[i] = normal(rng);
  const KernelSpec spec{SquaredExponential{}, 1.0};
  for (Strategy s : {Strategy::kNone, Strategy::kGeodesic}) {
    const auto a = inverse_kernel_decomposition(X, spec, 2, {s, 0.01});
    const auto b = inverse_kernel_decomposition(X, spec, 2, {s, 0.01});
    EXPECT_TRUE((a.Z.array() == b.Z.array()).all()) << strategy_name(s);
  }
}

TEST(Pipeline, ParseStrategy) {
  EXPECT_EQ(parse_strategy("none"), Strategy::kNone);
  EXPECT_EQ(parse_strategy("geodesic"), Strategy::kGeodesic);
  EXPECT_EQ(parse_strategy("blockwise"), Strategy::kBlockwise);
  EXPECT_THROW(parse_strategy("magic"), Error);
}
