#include "ikd/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "ikd/error.hpp"

namespace ikd {
namespace {

double diagonal_statistic(const Matrix& S, DiagonalStatistic stat) {
  const Vector diag = S.diagonal();
  if (stat == DiagonalStatistic::kMean) return diag.mean();
  std::vector<double> v(diag.data(), diag.data() + diag.size());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Index count_components(const std::vector<std::vector<Index>>& adjacency) {
  const Index n = static_cast<Index>(adjacency.size());
  std::vector<bool> seen(n, false);
  std::vector<Index> stack;
  Index components = 0;
  for (Index start = 0; start < n; ++start) {
    if (seen[start]) continue;
    ++components;
    seen[start] = true;
    stack.push_back(start);
    while (!stack.empty()) {
      const Index v = stack.back();
      stack.pop_back();
      for (Index w : adjacency[v]) {
        if (!seen[w]) {
          seen[w] = true;
          stack.push_back(w);
        }
      }
    }
  }
  return components;
}

}  // namespace

CovarianceEstimate sample_covariance(const ObservationMatrix& X, DiagonalStatistic stat) {
  const Index T = X.rows();
  const Index N = X.cols();
  if (N < 2 || T < 2) {
    std::ostringstream os;
    os << "sample covariance needs T >= 2 and N >= 2 (got T=" << T << ", N=" << N << ")";
    throw Error(ErrorKind::kDegenerate, os.str());
  }
  const Vector mean = X.rowwise().mean();
  const Matrix centered = X.colwise() - mean;
  const Matrix product = centered * centered.transpose();
  Matrix S(T, T);
  const double scale = 1.0 / static_cast<double>(N - 1);
  for (Index j = 0; j < T; ++j) {
    for (Index i = 0; i <= j; ++i) {
      S(i, j) = product(i, j) * scale;
      S(j, i) = S(i, j);
    }
  }
  CovarianceEstimate cov{std::move(S), 0.0};
  cov.sigma2_hat = diagonal_statistic(cov.S, stat);
  return cov;
}

CovarianceEstimate covariance_from_matrix(const Matrix& S, DiagonalStatistic stat) {
  if (S.rows() != S.cols() || S.rows() == 0) {
    throw Error(ErrorKind::kData, "covariance matrix must be square and non-empty");
  }
  CovarianceEstimate cov{S, 0.0};
  cov.sigma2_hat = diagonal_statistic(cov.S, stat);
  return cov;
}

CovarianceEstimate clamp_covariance(const CovarianceEstimate& cov, double s0) {
  if (!(s0 > 0.0 && s0 < cov.sigma2_hat)) {
    std::ostringstream os;
    os << "clamp: threshold s0=" << s0 << " must lie in (0, sigma2_hat=" << cov.sigma2_hat << ")";
    throw Error(ErrorKind::kConfig, os.str());
  }
  CovarianceEstimate out = cov;
  const Index T = cov.size();
  for (Index j = 0; j < T; ++j) {
    for (Index i = 0; i < T; ++i) {
      out.S(i, j) = i == j ? cov.sigma2_hat : std::clamp(cov.S(i, j), s0, cov.sigma2_hat);
    }
  }
  return out;
}

CovarianceEstimate cap_covariance(const CovarianceEstimate& cov) {
  CovarianceEstimate out = cov;
  const Index T = cov.size();
  for (Index j = 0; j < T; ++j) {
    for (Index i = 0; i < T; ++i) {
      out.S(i, j) = i == j ? cov.sigma2_hat : std::min(cov.S(i, j), cov.sigma2_hat);
    }
  }
  return out;
}

ThresholdedGraph threshold_graph(const CovarianceEstimate& cov, double s0) {
  if (!(s0 > 0.0)) throw Error(ErrorKind::kConfig, "threshold: s0 must be positive");
  const Index T = cov.size();
  ThresholdedGraph g;
  g.s0 = s0;
  g.sigma2_hat = cov.sigma2_hat;
  g.weights = Matrix::Zero(T, T);
  g.adjacency.assign(T, {});
  for (Index i = 0; i < T; ++i) {
    g.weights(i, i) = cov.sigma2_hat;
    for (Index j = 0; j < T; ++j) {
      if (i == j) continue;
      // Read the upper triangle for both directions so the graph is symmetric
      // even if S is not.
      const double s = i < j ? cov.S(i, j) : cov.S(j, i);
      if (s > s0) {
        g.weights(i, j) = std::min(s, cov.sigma2_hat);
        g.adjacency[i].push_back(j);
      }
    }
  }
  g.components = count_components(g.adjacency);
  return g;
}

CovarianceEstimate geodesic_completion(const CovarianceEstimate& cov, double s0) {
  const ThresholdedGraph g = threshold_graph(cov, s0);
  if (!g.connected()) {
    std::ostringstream os;
    os << "geodesic completion: covariance graph thresholded at s0=" << s0 << " has "
       << g.components << " connected components; lower s0 or use another strategy";
    throw Error(ErrorKind::kDisconnected, os.str());
  }

  // Dijkstra on the normalised path product itself rather than on the summed
  // costs -ln(s/sigma2_hat): the two orderings agree in exact arithmetic, and
  // since rounding a product by a factor <= 1 is monotone, the label settled
  // for each vertex is exactly the largest floating-point product over paths
  // from src, accumulated from src outward.
  const Index T = cov.size();
  const double s2 = cov.sigma2_hat;
  Matrix factor = Matrix::Zero(T, T);
  for (Index i = 0; i < T; ++i) {
    for (Index j : g.adjacency[i]) factor(i, j) = g.weights(i, j) / s2;
  }

  CovarianceEstimate out = cov;
  std::vector<double> best(T);
  std::vector<char> settled(T);

  for (Index src = 0; src < T; ++src) {
    bool needed = false;
    for (Index j = src + 1; j < T && !needed; ++j) needed = !g.has_edge(src, j);
    if (!needed) continue;

    // Thresholded covariance graphs are dense, so a linear scan for the next
    // vertex (O(T^2) per source) beats a binary heap.
    std::fill(best.begin(), best.end(), 0.0);
    std::fill(settled.begin(), settled.end(), 0);
    best[src] = 1.0;
    for (Index round = 0; round < T; ++round) {
      Index u = -1;
      for (Index v = 0; v < T; ++v) {
        if (!settled[v] && best[v] > 0.0 && (u < 0 || best[v] > best[u])) u = v;
      }
      if (u < 0) break;
      settled[u] = 1;
      for (Index v : g.adjacency[u]) {
        const double alt = best[u] * factor(v, u);  // symmetric; column access is contiguous
        if (alt > best[v]) best[v] = alt;
      }
    }

    for (Index dst = src + 1; dst < T; ++dst) {
      if (g.has_edge(src, dst)) continue;
      out.S(src, dst) = best[dst] * s2;
      out.S(dst, src) = out.S(src, dst);
    }
  }
  return out;
}

}  // namespace ikd
