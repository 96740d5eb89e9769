#pragma once

#include <vector>

#include "ikd/covariance.hpp"
#include "ikd/decomposition.hpp"
#include "ikd/kernels.hpp"
#include "ikd/types.hpp"

namespace ikd {

/// Maximal cliques of a thresholded graph whose union covers every vertex.
/// Each clique is sorted ascending.
struct CliqueCover {
  std::vector<std::vector<Index>> cliques;
};

/// Orthogonal map plus translation, applied as y = R x + t to column vectors.
struct RigidTransform {
  Matrix R;
  Vector t;

  /// Applies the transform to every row of `points` (n x M).
  Matrix apply(const Matrix& points) const;
};

/// Greedy cover by maximal cliques. Each clique is the first leaf of a
/// pivoted Bron-Kerbosch descent rooted at an uncovered vertex: first the
/// highest-degree vertex, then the uncovered vertex with most covered
/// neighbours, so consecutive cliques tend to overlap. Every clique covers at
/// least one new vertex and the order is deterministic. Throws
/// Error(kDisconnected) for a disconnected graph.
CliqueCover maximal_clique_cover(const ThresholdedGraph& graph);

/// Least-squares orthogonal Procrustes fit (reflections allowed) of the rows
/// of `source` onto the rows of `target`. Throws Error(kDegenerate) if the
/// centred source does not span all M dimensions.
RigidTransform rigid_align(const Matrix& source, const Matrix& target);

/// Root-mean-square distance between rows of `target` and `source` after the
/// best rigid alignment of source onto target.
double aligned_rmse(const Matrix& source, const Matrix& target);

struct BlockwiseDiagnostics {
  Index cliques = 0;
  /// Largest distance between a shared point's transformed position and its
  /// merged position at the moment its clique was aligned.
  double max_shared_discrepancy = 0.0;
  std::vector<Index> merge_order;
};

/// Blockwise IKD on a covariance estimate: clique cover of the graph
/// thresholded at s0, per-clique decomposition, then rigid merging through
/// shared points. Every merged clique must share more than M points with the
/// already-merged set, otherwise Error(kMergeStarvation) is thrown. A clique
/// whose shared points do not span M dimensions is deferred in favour of the
/// next-best candidate.
LatentEstimate blockwise_ikd(const CovarianceEstimate& cov, const KernelSpec& spec, Index M,
                             double s0, BlockwiseDiagnostics* diagnostics = nullptr);

/// Blockwise IKD on observations; s0 is absolute, as for threshold_graph.
LatentEstimate blockwise_ikd(const ObservationMatrix& X, const KernelSpec& spec, Index M,
                             double s0, BlockwiseDiagnostics* diagnostics = nullptr);

}  // namespace ikd
