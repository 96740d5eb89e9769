#include "ikd/decomposition.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <sstream>

#include "ikd/error.hpp"
#include "ikd/robustify.hpp"

namespace ikd {

std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::kNone:
      return "none";
    case Strategy::kGeodesic:
      return "geodesic";
    case Strategy::kBlockwise:
      return "blockwise";
  }
  return "none";
}

Strategy parse_strategy(const std::string& name) {
  if (name == "none") return Strategy::kNone;
  if (name == "geodesic") return Strategy::kGeodesic;
  if (name == "blockwise") return Strategy::kBlockwise;
  throw Error(ErrorKind::kConfig, "unknown strategy '" + name + "' (none|geodesic|blockwise)");
}

ScaledDistanceMatrix scaled_distances(const CovarianceEstimate& cov, const KernelSpec& spec) {
  const KernelSpec kernel = spec.with_sigma2(cov.sigma2_hat);
  kernel.validate();
  const Index T = cov.size();
  ScaledDistanceMatrix out{Matrix::Zero(T, T)};
  for (Index j = 1; j < T; ++j) {
    for (Index i = 0; i < j; ++i) {
      const double d = kernel_inverse(kernel, cov.S(i, j));
      out.D(i, j) = d;
      out.D(j, i) = d;
    }
  }
  return out;
}

Index select_reference(const ScaledDistanceMatrix& D) {
  Index best = 0;
  double best_max = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < D.size(); ++i) {
    const double row_max = D.D.row(i).maxCoeff();
    if (row_max < best_max) {
      best_max = row_max;
      best = i;
    }
  }
  return best;
}

GramLift gram_lift(const ScaledDistanceMatrix& D, Index reference) {
  const Index T = D.size();
  if (reference < 0 || reference >= T) {
    throw Error(ErrorKind::kConfig, "gram lift: reference index out of range");
  }
  GramLift lift{Matrix::Zero(T, T), reference};
  const Index r = reference;
  for (Index j = 0; j < T; ++j) {
    if (j == r) continue;
    for (Index i = 0; i <= j; ++i) {
      if (i == r) continue;
      const double g = 0.5 * (D.D(i, r) + D.D(r, j) - D.D(i, j));
      lift.G(i, j) = g;
      lift.G(j, i) = g;
    }
  }
  return lift;
}

LatentEstimate top_m_psd_factor(const GramLift& lift, Index M) {
  const Index T = lift.G.rows();
  const Index r = lift.reference;
  if (M < 1 || M >= T) {
    std::ostringstream os;
    os << "latent dimension M=" << M << " must satisfy 1 <= M < T=" << T;
    throw Error(ErrorKind::kConfig, os.str());
  }

  // Row/column r is identically zero, so decompose the complementary block and
  // re-insert a zero row. That keeps row r of the latent exactly zero.
  const Index n = T - 1;
  Matrix block(n, n);
  for (Index j = 0, bj = 0; j < T; ++j) {
    if (j == r) continue;
    for (Index i = 0, bi = 0; i < T; ++i) {
      if (i == r) continue;
      block(bi++, bj) = lift.G(i, j);
    }
    ++bj;
  }

  Eigen::SelfAdjointEigenSolver<Matrix> solver(block);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::kConvergence, "symmetric eigensolver did not converge");
  }
  // Ascending order from Eigen; the zero eigenvalue of row r is implicit.
  const Vector& values = solver.eigenvalues();
  const Matrix& vectors = solver.eigenvectors();

  const double scale = std::max(values.cwiseAbs().maxCoeff(), 0.0);
  const double positive_floor =
      static_cast<double>(T) * std::numeric_limits<double>::epsilon() * scale;

  LatentEstimate out;
  out.Z = Matrix::Zero(T, M);
  out.eigenvalues = Vector::Zero(M);
  out.reference = r;
  for (Index k = 0; k < n; ++k) {
    if (values(k) < -positive_floor) ++out.discarded_negative;
  }

  Index kept = 0;
  for (Index k = n - 1; k >= 0 && kept < M; --k) {
    const double lambda = values(k);
    if (!(lambda > positive_floor) || scale == 0.0) break;
    Vector u = vectors.col(k);
    Index argmax = 0;
    u.cwiseAbs().maxCoeff(&argmax);
    if (u(argmax) < 0.0) u = -u;
    const double root = std::sqrt(lambda);
    for (Index i = 0, bi = 0; i < T; ++i) {
      if (i == r) continue;
      out.Z(i, kept) = root * u(bi++);
    }
    out.eigenvalues(kept) = lambda;
    ++kept;
  }
  out.rank_deficient = kept < M;

  // Compare neighbouring eigenvalues among the top M+1 (the full spectrum
  // includes the zero from row r).
  Vector full(T);
  full.head(n) = values;
  full(n) = 0.0;
  std::sort(full.data(), full.data() + T, std::greater<>());
  const double degenerate_tol = 1e-12 * std::max(scale, std::numeric_limits<double>::min());
  for (Index k = 0; k < std::min<Index>(M, T - 1) && k < kept; ++k) {
    if (std::abs(full(k) - full(k + 1)) <= degenerate_tol) out.near_degenerate = true;
  }
  return out;
}

LatentEstimate decompose_covariance(const CovarianceEstimate& cov, const KernelSpec& spec,
                                    Index M) {
  CovarianceEstimate fixed = cov;
  fixed.S.diagonal().setConstant(cov.sigma2_hat);
  const ScaledDistanceMatrix D = scaled_distances(fixed, spec);
  const Index r = select_reference(D);
  return top_m_psd_factor(gram_lift(D, r), M);
}

LatentEstimate ikd_from_covariance(const CovarianceEstimate& cov, const KernelSpec& spec,
                                   Index M, const IkdOptions& options) {
  const Index T = cov.size();
  if (M < 1 || T < M + 1) {
    std::ostringstream os;
    os << "ikd needs 1 <= M and T >= M + 1 (got T=" << T << ", M=" << M << ")";
    throw Error(ErrorKind::kConfig, os.str());
  }
  if (cov.degenerate()) {
    throw Error(ErrorKind::kDegenerate,
                "estimated marginal variance is not positive; the data carry no variance");
  }
  if (!(options.s0_rel > 0.0 && options.s0_rel < 1.0)) {
    throw Error(ErrorKind::kConfig, "s0_rel must lie in (0, 1)");
  }
  spec.validate();
  const double s0 = options.s0_rel * cov.sigma2_hat;
  switch (options.strategy) {
    case Strategy::kNone:
      return decompose_covariance(clamp_covariance(cov, s0), spec, M);
    case Strategy::kGeodesic:
      return decompose_covariance(cap_covariance(geodesic_completion(cov, s0)), spec, M);
    case Strategy::kBlockwise:
      return blockwise_ikd(cov, spec, M, s0);
  }
  throw Error(ErrorKind::kConfig, "unknown strategy");
}

LatentEstimate inverse_kernel_decomposition(const ObservationMatrix& X, const KernelSpec& spec, Index M,
                   const IkdOptions& options) {
  return ikd_from_covariance(sample_covariance(X, options.diagonal), spec, M, options);
}

}  // namespace ikd
