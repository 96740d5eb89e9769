#pragma once

#include <string>

#include "ikd/covariance.hpp"
#include "ikd/kernels.hpp"
#include "ikd/types.hpp"

namespace ikd {

/// Symmetric matrix of scaled squared distances with a zero diagonal.
struct ScaledDistanceMatrix {
  Matrix D;
  Index size() const { return D.rows(); }
};

/// Inner products of latent points relative to a reference point; row and
/// column `reference` are zero.
struct GramLift {
  Matrix G;
  Index reference = 0;
};

struct LatentEstimate {
  LatentMatrix Z;      // T x M, column m = sqrt(lambda_m) * u_m
  Vector eigenvalues;  // retained eigenvalues, descending (zero for padded columns)
  Index reference = 0;

  Index discarded_negative = 0;  // negative eigenvalues dropped by the PSD projection
  bool rank_deficient = false;   // fewer than M positive eigenvalues; columns padded with 0
  bool near_degenerate = false;  // two of the leading M+1 eigenvalues coincide within 1e-12
};

enum class Strategy { kNone, kGeodesic, kBlockwise };

std::string strategy_name(Strategy s);
/// Parses none|geodesic|blockwise; throws Error(kConfig).
Strategy parse_strategy(const std::string& name);

struct IkdOptions {
  Strategy strategy = Strategy::kNone;
  double s0_rel = 0.01;  // threshold as a fraction of sigma2_hat
  DiagonalStatistic diagonal = DiagonalStatistic::kMean;
};

/// Element-wise f^{-1}(S) using the kernel family of `spec` with sigma2 taken
/// from the estimate. Off-diagonal entries must already lie in (0, sigma2_hat].
ScaledDistanceMatrix scaled_distances(const CovarianceEstimate& cov, const KernelSpec& spec);

/// Row with the smallest maximum distance; ties go to the smallest index.
Index select_reference(const ScaledDistanceMatrix& D);

/// G(i, j) = (d(i, r) + d(r, j) - d(i, j)) / 2 with row and column r zero.
GramLift gram_lift(const ScaledDistanceMatrix& D, Index reference);

/// Best rank-M PSD factor of G via a full symmetric eigendecomposition.
/// Eigenvectors are signed so that their largest-magnitude entry is positive.
LatentEstimate top_m_psd_factor(const GramLift& lift, Index M);

/// scaled_distances -> select_reference -> gram_lift -> top_m_psd_factor on a
/// covariance that is already valid for inversion (diagonal forced to sigma2_hat).
LatentEstimate decompose_covariance(const CovarianceEstimate& cov, const KernelSpec& spec,
                                    Index M);

/// Full pipeline on a covariance estimate, dispatching on the strategy.
LatentEstimate ikd_from_covariance(const CovarianceEstimate& cov, const KernelSpec& spec,
                                   Index M, const IkdOptions& options = {});

/// Inverse kernel decomposition of observations X (T x N).
LatentEstimate inverse_kernel_decomposition(const ObservationMatrix& X, const KernelSpec& spec, Index M,
                   const IkdOptions& options = {});

}  // namespace ikd
