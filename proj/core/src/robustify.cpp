#include "ikd/robustify.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ikd/error.hpp"

namespace ikd {
namespace {

// Vertex sets are kept as sorted index vectors; graphs here are small enough
// that set operations on them are cheap next to the eigendecompositions.
using VertexSet = std::vector<Index>;

VertexSet intersect_neighbours(const VertexSet& set, const std::vector<Index>& neighbours) {
  VertexSet out;
  std::set_intersection(set.begin(), set.end(), neighbours.begin(), neighbours.end(),
                        std::back_inserter(out));
  return out;
}

// Descends the Bron-Kerbosch recursion tree along its first branch. Starting
// from an empty exclusion set, the first leaf is always a maximal clique. The
// branch vertex is the usual pivot (most neighbours among the candidates);
// ties prefer already-covered vertices, then the smaller index.
void grow_maximal_clique(const ThresholdedGraph& g, const std::vector<bool>& covered,
                         VertexSet& clique, VertexSet candidates) {
  while (!candidates.empty()) {
    Index pick = -1;
    std::size_t best = 0;
    for (Index u : candidates) {
      const std::size_t count = intersect_neighbours(candidates, g.adjacency[u]).size();
      const bool better = pick < 0 || count > best ||
                          (count == best && covered[u] && !covered[pick]);
      if (better) {
        pick = u;
        best = count;
      }
    }
    clique.push_back(pick);
    candidates = intersect_neighbours(candidates, g.adjacency[pick]);
  }
}

Matrix select_rows(const Matrix& m, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Index>(k)) = m.row(rows[k]);
  return out;
}

CovarianceEstimate sub_covariance(const CovarianceEstimate& cov, const std::vector<Index>& idx) {
  const Index n = static_cast<Index>(idx.size());
  CovarianceEstimate sub{Matrix(n, n), cov.sigma2_hat};
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) sub.S(i, j) = cov.S(idx[i], idx[j]);
  }
  return cap_covariance(sub);
}

// Rotates Z onto its principal axes so columns are orthogonal with squared
// norms in descending order, matching the layout of a direct decomposition.
LatentEstimate finalize_merged(Matrix Z, Index reference) {
  const Vector origin = Z.row(reference).transpose();
  Z.rowwise() -= origin.transpose();
  Eigen::JacobiSVD<Matrix> svd(Z, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Matrix rotated = Z * svd.matrixV();
  rotated.row(reference).setZero();
  LatentEstimate out;
  const Index M = Z.cols();
  out.eigenvalues = svd.singularValues().array().square();
  for (Index m = 0; m < M; ++m) {
    Index argmax = 0;
    rotated.col(m).cwiseAbs().maxCoeff(&argmax);
    if (rotated(argmax, m) < 0.0) rotated.col(m) = -rotated.col(m);
  }
  out.Z = std::move(rotated);
  out.reference = reference;
  out.rank_deficient = out.eigenvalues.size() > 0 && !(out.eigenvalues(M - 1) > 0.0);
  return out;
}

}  // namespace

Matrix RigidTransform::apply(const Matrix& points) const {
  Matrix out = points * R.transpose();
  out.rowwise() += t.transpose();
  return out;
}

CliqueCover maximal_clique_cover(const ThresholdedGraph& graph) {
  const Index T = graph.size();
  if (!graph.connected()) {
    std::ostringstream os;
    os << "clique cover: graph thresholded at s0=" << graph.s0 << " has " << graph.components
       << " connected components; lower s0 or use the geodesic strategy";
    throw Error(ErrorKind::kDisconnected, os.str());
  }
  CliqueCover cover;
  std::vector<bool> covered(T, false);
  std::vector<Index> covered_neighbours(T, 0);
  Index remaining = T;

  // First root: highest degree. Later roots: the uncovered vertex with most
  // covered neighbours, so each new clique overlaps the region covered so far.
  Index root = 0;
  for (Index v = 1; v < T; ++v) {
    if (graph.adjacency[v].size() > graph.adjacency[root].size()) root = v;
  }
  while (remaining > 0) {
    if (static_cast<Index>(cover.cliques.size()) >= T) {
      throw Error(ErrorKind::kConvergence, "clique cover: more than T cliques emitted");
    }
    // Any clique containing root lives in root's neighbourhood, and a clique
    // maximal there is maximal in the whole graph.
    VertexSet clique{root};
    grow_maximal_clique(graph, covered, clique, graph.adjacency[root]);
    std::sort(clique.begin(), clique.end());
    for (Index v : clique) {
      if (covered[v]) continue;
      covered[v] = true;
      --remaining;
      for (Index w : graph.adjacency[v]) ++covered_neighbours[w];
    }
    cover.cliques.push_back(std::move(clique));

    root = -1;
    for (Index v = 0; v < T; ++v) {
      if (covered[v]) continue;
      if (root < 0 || covered_neighbours[v] > covered_neighbours[root]) root = v;
    }
  }
  return cover;
}

RigidTransform rigid_align(const Matrix& source, const Matrix& target) {
  if (source.rows() != target.rows() || source.cols() != target.cols()) {
    throw Error(ErrorKind::kData, "rigid align: source and target shapes differ");
  }
  const Index n = source.rows();
  const Index M = source.cols();
  if (n < M + 1) {
    std::ostringstream os;
    os << "rigid align: need at least M+1=" << M + 1 << " points, got " << n;
    throw Error(ErrorKind::kDegenerate, os.str());
  }
  const Vector src_mean = source.colwise().mean().transpose();
  const Vector dst_mean = target.colwise().mean().transpose();
  const Matrix src_c = source.rowwise() - src_mean.transpose();
  const Matrix dst_c = target.rowwise() - dst_mean.transpose();

  Eigen::JacobiSVD<Matrix> spread(src_c);
  const Vector sv = spread.singularValues();
  if (sv.size() < M || !(sv(M - 1) > 1e-10 * std::max(sv(0), 1e-300))) {
    throw Error(ErrorKind::kDegenerate,
                "rigid align: source points do not span the latent space; alignment is ambiguous");
  }

  const Matrix cross = dst_c.transpose() * src_c;  // M x M
  Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  RigidTransform tf;
  tf.R = svd.matrixU() * svd.matrixV().transpose();
  tf.t = dst_mean - tf.R * src_mean;
  return tf;
}

double aligned_rmse(const Matrix& source, const Matrix& target) {
  const RigidTransform tf = rigid_align(source, target);
  const Matrix diff = tf.apply(source) - target;
  return std::sqrt(diff.squaredNorm() / static_cast<double>(source.rows()));
}

LatentEstimate blockwise_ikd(const CovarianceEstimate& cov, const KernelSpec& spec, Index M,
                             double s0, BlockwiseDiagnostics* diagnostics) {
  const Index T = cov.size();
  if (M < 1 || T < M + 1) throw Error(ErrorKind::kConfig, "blockwise: need 1 <= M < T");
  const ThresholdedGraph graph = threshold_graph(cov, s0);
  const CliqueCover cover = maximal_clique_cover(graph);
  const std::size_t C = cover.cliques.size();

  BlockwiseDiagnostics diag;
  diag.cliques = static_cast<Index>(C);

  if (C == 1) {
    LatentEstimate single = decompose_covariance(sub_covariance(cov, cover.cliques[0]), spec, M);
    diag.merge_order = {0};
    if (diagnostics) *diagnostics = diag;
    return single;  // the only clique is {0..T-1} in order
  }

  std::vector<LatentEstimate> local(C);
  for (std::size_t c = 0; c < C; ++c) {
    if (static_cast<Index>(cover.cliques[c].size()) > M) {
      local[c] = decompose_covariance(sub_covariance(cov, cover.cliques[c]), spec, M);
    }
  }

  // Seed with the largest clique (earliest on ties).
  std::size_t seed = 0;
  for (std::size_t c = 1; c < C; ++c) {
    if (cover.cliques[c].size() > cover.cliques[seed].size()) seed = c;
  }
  if (static_cast<Index>(cover.cliques[seed].size()) <= M) {
    throw Error(ErrorKind::kMergeStarvation,
                "blockwise: every clique has at most M points; lower s0 or use the geodesic strategy");
  }

  Matrix sum = Matrix::Zero(T, M);
  std::vector<int> count(T, 0);
  std::vector<bool> merged(C, false);
  auto accumulate = [&](std::size_t c, const Matrix& global) {
    const auto& idx = cover.cliques[c];
    for (std::size_t k = 0; k < idx.size(); ++k) {
      sum.row(idx[k]) += global.row(static_cast<Index>(k));
      ++count[idx[k]];
    }
    merged[c] = true;
    diag.merge_order.push_back(static_cast<Index>(c));
  };
  accumulate(seed, local[seed].Z);

  // Candidates are tried by descending overlap (earliest on ties); one whose
  // shared points are too degenerate to fix a frame is skipped this round.
  for (std::size_t step = 1; step < C; ++step) {
    std::vector<std::pair<std::size_t, std::size_t>> order;  // (shared, clique)
    for (std::size_t c = 0; c < C; ++c) {
      if (merged[c]) continue;
      std::size_t shared = 0;
      for (Index v : cover.cliques[c]) shared += count[v] > 0 ? 1 : 0;
      order.emplace_back(shared, c);
    }
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });

    bool done = false;
    for (const auto& [shared, pick] : order) {
      if (static_cast<Index>(shared) <= M) break;
      const auto& idx = cover.cliques[pick];
      std::vector<Index> shared_local;
      std::vector<Index> shared_global;
      for (std::size_t k = 0; k < idx.size(); ++k) {
        if (count[idx[k]] > 0) {
          shared_local.push_back(static_cast<Index>(k));
          shared_global.push_back(idx[k]);
        }
      }
      Matrix target(static_cast<Index>(shared_global.size()), M);
      for (std::size_t k = 0; k < shared_global.size(); ++k) {
        target.row(static_cast<Index>(k)) = sum.row(shared_global[k]) / count[shared_global[k]];
      }
      RigidTransform tf;
      try {
        tf = rigid_align(select_rows(local[pick].Z, shared_local), target);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kDegenerate) throw;
        continue;
      }
      const Matrix global = tf.apply(local[pick].Z);
      for (std::size_t k = 0; k < shared_local.size(); ++k) {
        const double gap =
            (global.row(shared_local[k]) - target.row(static_cast<Index>(k))).norm();
        diag.max_shared_discrepancy = std::max(diag.max_shared_discrepancy, gap);
      }
      accumulate(pick, global);
      done = true;
      break;
    }
    if (!done) {
      const std::size_t best = order.empty() ? 0 : order.front().first;
      std::ostringstream os;
      os << "blockwise: no remaining clique shares more than M=" << M
         << " points with the merged set (best " << best << ", s0=" << s0
         << "); lower s0 or use the geodesic strategy";
      throw Error(ErrorKind::kMergeStarvation, os.str());
    }
  }

  Matrix Z(T, M);
  for (Index i = 0; i < T; ++i) Z.row(i) = sum.row(i) / count[i];
  LatentEstimate out = finalize_merged(std::move(Z), cover.cliques[seed][local[seed].reference]);
  if (diagnostics) *diagnostics = diag;
  return out;
}

LatentEstimate blockwise_ikd(const ObservationMatrix& X, const KernelSpec& spec, Index M,
                             double s0, BlockwiseDiagnostics* diagnostics) {
  return blockwise_ikd(sample_covariance(X), spec, M, s0, diagnostics);
}

}  // namespace ikd
