#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "ikd/types.hpp"

namespace ikd {

using Rng = std::mt19937_64;

enum class Mapping { kGp, kSinusoid, kBump };

std::string mapping_name(Mapping m);
Mapping parse_mapping(const std::string& name);

/// One draw from N(mean, cov). Cholesky is retried with diagonal jitter
/// 1e-10, 1e-9, ..., 1e-4 times the mean diagonal; Error(kConvergence) after that.
Vector sample_mvn(const Vector& mean, const Matrix& cov, Rng& rng);

/// `count` independent zero-mean draws sharing one factorisation, as columns.
Matrix sample_mvn_columns(const Matrix& cov, Index count, Rng& rng);

/// T x M latent whose columns are independent draws from N(0, C) with
/// C(i, j) = 6 exp(-|i - j| / 5).
LatentMatrix gen_latent(Index T, Index M, Rng& rng);

/// N columns drawn i.i.d. from N(0, K) with K the squared-exponential kernel
/// (sigma2, lengthscale) on the rows of Z, plus N(0, noise_sd^2) noise.
ObservationMatrix gp_map(const LatentMatrix& Z, Index N, double sigma2, double lengthscale,
                         double noise_sd, Rng& rng);

/// X(t, n) = sin(omega_n . z_t + phase_n) + noise with explicit frequencies
/// (N x M) and phases (N).
ObservationMatrix sinusoid_map(const LatentMatrix& Z, const Matrix& omega, const Vector& phase,
                               double noise_sd, Rng& rng);

/// Frequencies ~ U(-1, 1) and phases ~ U(-pi, pi), drawn once per dataset.
ObservationMatrix sinusoid_map(const LatentMatrix& Z, Index N, double noise_sd, Rng& rng);

/// X(t, n) = amplitude * exp(-|z_t - c_n|^2) + noise with explicit centres (N x 2).
ObservationMatrix bump_map(const LatentMatrix& Z, const Matrix& centers, double amplitude,
                           double noise_sd, Rng& rng);

/// Centres drawn without replacement from a 100 x 100 grid on [-6, 6]^2.
/// Throws Error(kConfig) for N > 10000.
ObservationMatrix bump_map(const LatentMatrix& Z, Index N, double amplitude, double noise_sd,
                           Rng& rng);

/// The 10000 bump-centre candidates, row-major over (x, y).
Matrix bump_grid();

struct GeneratorParams {
  Mapping mapping = Mapping::kGp;
  Index T = 300;
  Index M = 3;
  Index N = 100;
  double noise_sd = 0.05;
  double sigma2 = 1.0;       // gp only
  double lengthscale = 3.0;  // gp only
  double amplitude = 20.0;   // bump only

  /// Defaults used in the synthetic experiments for each mapping.
  static GeneratorParams defaults_for(Mapping mapping);
  void validate() const;
};

struct SyntheticDataset {
  LatentMatrix Z_true;
  ObservationMatrix X;
  GeneratorParams params;
  std::uint64_t seed = 0;
};

/// Latent then mapping, all from one engine seeded with `seed`.
SyntheticDataset generate_dataset(const GeneratorParams& params, std::uint64_t seed);

}  // namespace ikd
