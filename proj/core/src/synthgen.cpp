#include "ikd/synthgen.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "ikd/error.hpp"

namespace ikd {
namespace {

Matrix jittered_cholesky(const Matrix& cov) {
  const Index n = cov.rows();
  double base = cov.diagonal().mean();
  if (!(base > 0.0)) base = 1.0;
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  for (double rel = 1e-10; rel <= 1e-4 * 1.0000001; rel *= 10.0) {
    Matrix jittered = cov;
    jittered.diagonal().array() += rel * base;
    llt.compute(jittered);
    if (llt.info() == Eigen::Success) return llt.matrixL();
  }
  std::ostringstream os;
  os << "cholesky of " << n << "x" << n << " covariance failed even with 1e-4 relative jitter";
  throw Error(ErrorKind::kConvergence, os.str());
}

Matrix standard_normal(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix w(rows, cols);
  // Column-major fill order is part of the reproducibility contract.
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) w(i, j) = normal(rng);
  }
  return w;
}

void add_noise(Matrix& X, double noise_sd, Rng& rng) {
  if (noise_sd == 0.0) return;
  X += noise_sd * standard_normal(X.rows(), X.cols(), rng);
}

}  // namespace

std::string mapping_name(Mapping m) {
  switch (m) {
    case Mapping::kGp:
      return "gp";
    case Mapping::kSinusoid:
      return "sinusoid";
    case Mapping::kBump:
      return "bump";
  }
  return "gp";
}

Mapping parse_mapping(const std::string& name) {
  if (name == "gp") return Mapping::kGp;
  if (name == "sinusoid") return Mapping::kSinusoid;
  if (name == "bump") return Mapping::kBump;
  throw Error(ErrorKind::kConfig, "unknown mapping '" + name + "' (gp|sinusoid|bump)");
}

Vector sample_mvn(const Vector& mean, const Matrix& cov, Rng& rng) {
  if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
    throw Error(ErrorKind::kData, "sample_mvn: mean and covariance sizes differ");
  }
  if (cov.isZero(0.0)) return mean;
  return mean + jittered_cholesky(cov) * standard_normal(mean.size(), 1, rng);
}

Matrix sample_mvn_columns(const Matrix& cov, Index count, Rng& rng) {
  if (cov.isZero(0.0)) return Matrix::Zero(cov.rows(), count);
  const Matrix L = jittered_cholesky(cov);
  return L * standard_normal(cov.rows(), count, rng);
}

LatentMatrix gen_latent(Index T, Index M, Rng& rng) {
  if (T < 1 || M < 1) throw Error(ErrorKind::kConfig, "gen_latent: need T >= 1 and M >= 1");
  Matrix C(T, T);
  for (Index j = 0; j < T; ++j) {
    for (Index i = 0; i < T; ++i) {
      C(i, j) = 6.0 * std::exp(-std::abs(static_cast<double>(i - j)) / 5.0);
    }
  }
  return sample_mvn_columns(C, M, rng);
}

ObservationMatrix gp_map(const LatentMatrix& Z, Index N, double sigma2, double lengthscale,
                         double noise_sd, Rng& rng) {
  if (N < 1) throw Error(ErrorKind::kConfig, "gp_map: N must be >= 1");
  if (!(sigma2 > 0.0 && lengthscale > 0.0 && noise_sd >= 0.0)) {
    throw Error(ErrorKind::kConfig, "gp_map: sigma2 and lengthscale must be > 0, noise >= 0");
  }
  const Index T = Z.rows();
  Matrix K(T, T);
  const double inv = 1.0 / (2.0 * lengthscale * lengthscale);
  for (Index j = 0; j < T; ++j) {
    for (Index i = 0; i <= j; ++i) {
      K(i, j) = sigma2 * std::exp(-(Z.row(i) - Z.row(j)).squaredNorm() * inv);
      K(j, i) = K(i, j);
    }
  }
  Matrix X = sample_mvn_columns(K, N, rng);
  add_noise(X, noise_sd, rng);
  return X;
}

ObservationMatrix sinusoid_map(const LatentMatrix& Z, const Matrix& omega, const Vector& phase,
                               double noise_sd, Rng& rng) {
  if (omega.cols() != Z.cols() || omega.rows() != phase.size()) {
    throw Error(ErrorKind::kData, "sinusoid_map: frequency matrix must be N x M with N phases");
  }
  Matrix X = Z * omega.transpose();
  X.rowwise() += phase.transpose();
  X = X.array().sin().matrix();
  add_noise(X, noise_sd, rng);
  return X;
}

ObservationMatrix sinusoid_map(const LatentMatrix& Z, Index N, double noise_sd, Rng& rng) {
  if (N < 1) throw Error(ErrorKind::kConfig, "sinusoid_map: N must be >= 1");
  std::uniform_real_distribution<double> freq(-1.0, 1.0);
  std::uniform_real_distribution<double> shift(-std::numbers::pi, std::numbers::pi);
  Matrix omega(N, Z.cols());
  for (Index n = 0; n < N; ++n) {
    for (Index m = 0; m < Z.cols(); ++m) omega(n, m) = freq(rng);
  }
  Vector phase(N);
  for (Index n = 0; n < N; ++n) phase(n) = shift(rng);
  return sinusoid_map(Z, omega, phase, noise_sd, rng);
}

Matrix bump_grid() {
  constexpr Index kSide = 100;
  Matrix grid(kSide * kSide, 2);
  for (Index a = 0; a < kSide; ++a) {
    for (Index b = 0; b < kSide; ++b) {
      grid(a * kSide + b, 0) = -6.0 + 12.0 * static_cast<double>(a) / (kSide - 1);
      grid(a * kSide + b, 1) = -6.0 + 12.0 * static_cast<double>(b) / (kSide - 1);
    }
  }
  return grid;
}

ObservationMatrix bump_map(const LatentMatrix& Z, const Matrix& centers, double amplitude,
                           double noise_sd, Rng& rng) {
  if (Z.cols() != 2 || centers.cols() != 2) {
    throw Error(ErrorKind::kData, "bump_map: latent and centres must be two-dimensional");
  }
  const Index T = Z.rows();
  const Index N = centers.rows();
  Matrix X(T, N);
  for (Index n = 0; n < N; ++n) {
    for (Index t = 0; t < T; ++t) {
      X(t, n) = amplitude * std::exp(-(Z.row(t) - centers.row(n)).squaredNorm());
    }
  }
  add_noise(X, noise_sd, rng);
  return X;
}

ObservationMatrix bump_map(const LatentMatrix& Z, Index N, double amplitude, double noise_sd,
                           Rng& rng) {
  const Matrix grid = bump_grid();
  if (N < 1 || N > grid.rows()) {
    std::ostringstream os;
    os << "bump_map: N=" << N << " centres requested but the grid has " << grid.rows()
       << " points";
    throw Error(ErrorKind::kConfig, os.str());
  }
  std::vector<Index> all(static_cast<std::size_t>(grid.rows()));
  std::iota(all.begin(), all.end(), Index{0});
  // Partial Fisher-Yates: the first N slots become the sample.
  for (Index k = 0; k < N; ++k) {
    std::uniform_int_distribution<Index> pick(k, grid.rows() - 1);
    std::swap(all[k], all[pick(rng)]);
  }
  Matrix centers(N, 2);
  for (Index k = 0; k < N; ++k) centers.row(k) = grid.row(all[k]);
  return bump_map(Z, centers, amplitude, noise_sd, rng);
}

GeneratorParams GeneratorParams::defaults_for(Mapping mapping) {
  GeneratorParams p;
  p.mapping = mapping;
  switch (mapping) {
    case Mapping::kGp:
      p.M = 3;
      p.noise_sd = 0.05;
      break;
    case Mapping::kSinusoid:
      p.M = 1;
      p.noise_sd = 0.1;
      break;
    case Mapping::kBump:
      p.M = 2;
      p.noise_sd = 0.05;
      break;
  }
  return p;
}

void GeneratorParams::validate() const {
  if (T < 1 || M < 1 || N < 1) throw Error(ErrorKind::kConfig, "generator: T, M, N must be >= 1");
  if (!(noise_sd >= 0.0)) throw Error(ErrorKind::kConfig, "generator: noise must be >= 0");
  if (mapping == Mapping::kBump && M != 2) {
    throw Error(ErrorKind::kConfig, "generator: bump mapping needs M = 2");
  }
  if (mapping == Mapping::kBump && N > 10000) {
    std::ostringstream os;
    os << "generator: bump mapping supports at most 10000 centres (grid exhausted), got N=" << N;
    throw Error(ErrorKind::kConfig, os.str());
  }
  if (mapping == Mapping::kGp && !(sigma2 > 0.0 && lengthscale > 0.0)) {
    throw Error(ErrorKind::kConfig, "generator: sigma2 and lengthscale must be > 0");
  }
}

SyntheticDataset generate_dataset(const GeneratorParams& params, std::uint64_t seed) {
  params.validate();
  Rng rng(seed);
  SyntheticDataset ds;
  ds.params = params;
  ds.seed = seed;
  ds.Z_true = gen_latent(params.T, params.M, rng);
  switch (params.mapping) {
    case Mapping::kGp:
      ds.X = gp_map(ds.Z_true, params.N, params.sigma2, params.lengthscale, params.noise_sd, rng);
      break;
    case Mapping::kSinusoid:
      ds.X = sinusoid_map(ds.Z_true, params.N, params.noise_sd, rng);
      break;
    case Mapping::kBump:
      ds.X = bump_map(ds.Z_true, params.N, params.amplitude, params.noise_sd, rng);
      break;
  }
  return ds;
}

}  // namespace ikd
