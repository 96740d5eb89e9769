#include "ikd/eval.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <map>
#include <random>
#include <sstream>

#include "ikd/error.hpp"

namespace ikd {

AlignmentReport affine_align(const LatentMatrix& Z_est, const LatentMatrix& Z_true) {
  if (Z_est.rows() != Z_true.rows()) {
    throw Error(ErrorKind::kData, "affine_align: estimate and truth have different row counts");
  }
  const Index T = Z_est.rows();
  const Index M = Z_est.cols();
  if (T <= M + 1) throw Error(ErrorKind::kData, "affine_align: need T > M + 1 points");

  Matrix design(T, M + 1);
  design.leftCols(M) = Z_est;
  design.col(M).setOnes();
  const Matrix normal = design.transpose() * design;
  const Matrix rhs = design.transpose() * Z_true;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(normal);
  const Matrix coef = cod.solve(rhs);  // (M+1) x M_true

  AlignmentReport report;
  report.rank_deficient = cod.rank() < M + 1;
  report.A = coef.topRows(M);
  report.b = coef.row(M).transpose();
  const Matrix fitted = design * coef;
  const Index D = Z_true.cols();
  report.r2_per_dim.resize(D);
  for (Index m = 0; m < D; ++m) {
    const double mean = Z_true.col(m).mean();
    const double ss_tot = (Z_true.col(m).array() - mean).square().sum();
    const double ss_res = (Z_true.col(m) - fitted.col(m)).squaredNorm();
    report.r2_per_dim(m) = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
  }
  report.r2_mean = report.r2_per_dim.mean();
  return report;
}

double knn_cv(const LatentMatrix& Z, const std::vector<int>& labels, int k, int folds,
              std::uint64_t seed) {
  const Index T = Z.rows();
  if (static_cast<Index>(labels.size()) != T) {
    throw Error(ErrorKind::kData, "knn_cv: label count does not match latent rows");
  }
  if (folds < 2) throw Error(ErrorKind::kConfig, "knn_cv: need at least 2 folds");
  if (k < 1) throw Error(ErrorKind::kConfig, "knn_cv: k must be >= 1");

  std::map<int, std::vector<Index>> by_class;
  for (Index i = 0; i < T; ++i) by_class[labels[i]].push_back(i);
  for (const auto& [label, members] : by_class) {
    if (static_cast<int>(members.size()) < folds) {
      std::ostringstream os;
      os << "knn_cv: class " << label << " has " << members.size() << " members but " << folds
         << " folds were requested";
      throw Error(ErrorKind::kData, os.str());
    }
  }

  std::mt19937_64 rng(seed);
  std::vector<int> fold_of(T);
  int offset = 0;
  for (auto& [label, members] : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t j = 0; j < members.size(); ++j) {
      fold_of[members[j]] = static_cast<int>((offset + j) % folds);
    }
    offset = static_cast<int>((offset + members.size()) % folds);
  }

  double accuracy_sum = 0.0;
  std::vector<std::pair<double, Index>> candidates;
  for (int f = 0; f < folds; ++f) {
    std::vector<Index> train;
    std::vector<Index> test;
    for (Index i = 0; i < T; ++i) (fold_of[i] == f ? test : train).push_back(i);
    const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), train.size());
    std::size_t correct = 0;
    for (Index q : test) {
      candidates.clear();
      for (Index p : train) candidates.emplace_back((Z.row(q) - Z.row(p)).squaredNorm(), p);
      std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(kk),
                        candidates.end());
      std::map<int, int> votes;
      for (std::size_t j = 0; j < kk; ++j) ++votes[labels[candidates[j].second]];
      int winner = votes.begin()->first;
      int most = 0;
      for (const auto& [label, n] : votes) {
        if (n > most) {
          most = n;
          winner = label;
        }
      }
      if (winner == labels[q]) ++correct;
    }
    accuracy_sum += static_cast<double>(correct) / static_cast<double>(test.size());
  }
  return accuracy_sum / folds;
}

PcaResult pca_baseline(const ObservationMatrix& X, Index M) {
  const Index T = X.rows();
  const Index N = X.cols();
  if (M < 1 || M > std::min(T, N)) {
    throw Error(ErrorKind::kConfig, "pca: need 1 <= M <= min(T, N)");
  }
  const Matrix centered = X.rowwise() - X.colwise().mean();
  PcaResult out;
  out.scores.resize(T, M);
  out.explained_variance.resize(M);
  const double denom = static_cast<double>(std::max<Index>(T - 1, 1));

  if (T <= N) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(centered * centered.transpose());
    for (Index m = 0; m < M; ++m) {
      const Index k = T - 1 - m;
      const double lambda = std::max(solver.eigenvalues()(k), 0.0);
      out.scores.col(m) = std::sqrt(lambda) * solver.eigenvectors().col(k);
      out.explained_variance(m) = lambda / denom;
    }
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(centered.transpose() * centered);
    for (Index m = 0; m < M; ++m) {
      const Index k = N - 1 - m;
      out.scores.col(m) = centered * solver.eigenvectors().col(k);
      out.explained_variance(m) = std::max(solver.eigenvalues()(k), 0.0) / denom;
    }
  }
  for (Index m = 0; m < M; ++m) {
    Index argmax = 0;
    out.scores.col(m).cwiseAbs().maxCoeff(&argmax);
    if (out.scores(argmax, m) < 0.0) out.scores.col(m) = -out.scores.col(m);
  }
  return out;
}

}  // namespace ikd
