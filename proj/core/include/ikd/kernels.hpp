#pragma once

#include <string>
#include <variant>

namespace ikd {

// Stationary kernels written as k = f(d), where d = |z_i - z_j|^2 / l^2 is the
// scaled squared distance. The length-scale never appears: the latent is only
// recovered up to scale, so everything works on d directly.

struct SquaredExponential {};

struct RationalQuadratic {
  double alpha = 1.0;
};

struct GammaExponential {
  double gamma = 1.0;
};

struct Matern {
  double nu = 1.5;
};

using KernelFamily =
    std::variant<SquaredExponential, RationalQuadratic, GammaExponential, Matern>;

struct KernelSpec {
  KernelFamily family = SquaredExponential{};
  double sigma2 = 1.0;

  /// Throws Error(kConfig) if a family parameter or sigma2 is out of range.
  void validate() const;

  /// Same family with a different marginal variance.
  KernelSpec with_sigma2(double s2) const { return KernelSpec{family, s2}; }
};

/// Short family name as used on the command line: se, rq, gamma-exp, matern.
std::string family_name(const KernelSpec& spec);

/// f(d). Throws Error(kDomain) for d < 0.
double kernel_forward(const KernelSpec& spec, double d);

/// df/dd. Unbounded at d = 0 for Matern nu < 1 and gamma-exponential gamma < 2.
double kernel_derivative(const KernelSpec& spec, double d);

/// f^{-1}(k): the unique d >= 0 with f(d) = k. Requires 0 < k <= sigma2 and
/// throws Error(kDomain) otherwise; no clamping happens here.
double kernel_inverse(const KernelSpec& spec, double k);

/// Matern inverse by bracket expansion from [0, 1] followed by Newton steps
/// safeguarded with bisection. Stops once |f(d) - k| <= tol * sigma2 and the
/// last step is negligible; throws Error(kConvergence) after max_iter steps.
double matern_inverse_solve(double nu, double sigma2, double k, double tol = 1e-12,
                            int max_iter = 200);

}  // namespace ikd
