#pragma once

#include <vector>

#include "ikd/types.hpp"

namespace ikd {

/// Statistic of diag(S) used as the marginal-variance estimate.
enum class DiagonalStatistic { kMean, kMedian };

struct CovarianceEstimate {
  Matrix S;                 // T x T, exactly symmetric
  double sigma2_hat = 0.0;  // statistic of diag(S)

  Index size() const { return S.rows(); }
  /// True when the data carry no variance at all (e.g. constant rows).
  bool degenerate() const { return !(sigma2_hat > 0.0); }
};

/// Covariance graph keeping only entries strictly above s0. Edge weights are
/// the covariances capped at sigma2_hat; the diagonal is always present.
struct ThresholdedGraph {
  Matrix weights;                          // 0 where no edge
  std::vector<std::vector<Index>> adjacency;  // sorted neighbour lists, no self loops
  double s0 = 0.0;
  double sigma2_hat = 0.0;
  Index components = 0;

  Index size() const { return weights.rows(); }
  bool connected() const { return components <= 1; }
  bool has_edge(Index i, Index j) const { return i == j || weights(i, j) > 0.0; }
};

/// S = (X - mean)(X - mean)^T / (N - 1), row means taken over the N columns.
/// Throws Error(kDegenerate) for N < 2 or T < 2.
CovarianceEstimate sample_covariance(const ObservationMatrix& X,
                                     DiagonalStatistic stat = DiagonalStatistic::kMean);

/// Wraps a known covariance (e.g. an exact kernel matrix) as an estimate.
CovarianceEstimate covariance_from_matrix(const Matrix& S,
                                          DiagonalStatistic stat = DiagonalStatistic::kMean);

/// Clamps off-diagonal entries into [s0, sigma2_hat] and sets the diagonal to
/// sigma2_hat. Requires 0 < s0 < sigma2_hat.
CovarianceEstimate clamp_covariance(const CovarianceEstimate& cov, double s0);

/// Caps off-diagonal entries at sigma2_hat and sets the diagonal to sigma2_hat,
/// leaving small entries alone.
CovarianceEstimate cap_covariance(const CovarianceEstimate& cov);

ThresholdedGraph threshold_graph(const CovarianceEstimate& cov, double s0);

/// Replaces every off-diagonal entry <= s0 by the largest product of
/// normalised edge covariances over a path of strong (> s0) entries, scaled
/// back by sigma2_hat. Paths come from Dijkstra maximising the product, which
/// is Dijkstra on -log(s / sigma2_hat) without the logarithms; the product for
/// entry (i, j), i < j, is accumulated from i.
/// Throws Error(kDisconnected) when the thresholded graph is not connected.
CovarianceEstimate geodesic_completion(const CovarianceEstimate& cov, double s0);

}  // namespace ikd
