#pragma once

#include <cstdint>
#include <vector>

#include "ikd/types.hpp"

namespace ikd {

struct AlignmentReport {
  Matrix A;  // M x M
  Vector b;  // M
  Vector r2_per_dim;
  double r2_mean = 0.0;
  bool rank_deficient = false;  // design [Z_est, 1] lacks full column rank
};

/// Least-squares affine map from Z_est onto Z_true (Z_true ~ Z_est A + 1 b^T)
/// and the per-dimension coefficient of determination of that fit.
AlignmentReport affine_align(const LatentMatrix& Z_est, const LatentMatrix& Z_true);

/// Stratified `folds`-fold cross-validated accuracy of a Euclidean k-NN
/// majority-vote classifier. Distance ties go to the smaller index, vote ties
/// to the smaller label. k is capped at the training-set size.
double knn_cv(const LatentMatrix& Z, const std::vector<int>& labels, int k, int folds,
              std::uint64_t seed);

struct PcaResult {
  LatentMatrix scores;        // T x M
  Vector explained_variance;  // per retained component, descending
};

/// Column-centres X and projects onto its top-M principal directions, using
/// whichever of the T x T gram or N x N covariance is smaller.
PcaResult pca_baseline(const ObservationMatrix& X, Index M);

}  // namespace ikd
