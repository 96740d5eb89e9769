#include "ikd/kernels.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "ikd/error.hpp"

namespace ikd {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool is_half_integer(double nu, double target) { return nu == target; }

// x^nu K_nu(x) * 2^{1-nu} / Gamma(nu), i.e. the Matern correlation at x.
double matern_correlation(double nu, double x) {
  if (x == 0.0) return 1.0;
  if (is_half_integer(nu, 0.5)) return std::exp(-x);
  if (is_half_integer(nu, 1.5)) return (1.0 + x) * std::exp(-x);
  if (is_half_integer(nu, 2.5)) return (1.0 + x + x * x / 3.0) * std::exp(-x);
  // Far in the tail K_nu underflows before the product does; the correlation
  // is below 1e-300 there anyway.
  if (x > 700.0) return 0.0;
  const double log_c = (1.0 - nu) * std::log(2.0) - std::lgamma(nu);
  return std::exp(log_c + nu * std::log(x)) * std::cyl_bessel_k(nu, x);
}

// d/dd of the Matern correlation, using d/dx[x^nu K_nu(x)] = -x^nu K_{nu-1}(x)
// and dx/dd = nu / x for x = sqrt(2 nu d).
double matern_correlation_derivative(double nu, double d) {
  const double x = std::sqrt(2.0 * nu * d);
  if (is_half_integer(nu, 0.5)) {
    if (d == 0.0) return -std::numeric_limits<double>::infinity();
    return -std::exp(-x) / (2.0 * x);
  }
  if (is_half_integer(nu, 1.5)) return -1.5 * std::exp(-x);
  if (is_half_integer(nu, 2.5)) return -(5.0 / 6.0) * (1.0 + x) * std::exp(-x);
  if (x == 0.0) {
    if (nu <= 1.0) return -std::numeric_limits<double>::infinity();
    // Small-x limit of x^{nu-1} K_{nu-1}(x) * c * nu.
    return -nu / (2.0 * (nu - 1.0));
  }
  if (x > 700.0) return 0.0;
  const double log_c = (1.0 - nu) * std::log(2.0) - std::lgamma(nu);
  return -nu * std::exp(log_c + (nu - 1.0) * std::log(x)) *
         std::cyl_bessel_k(std::abs(nu - 1.0), x);
}

double matern_forward(double nu, double sigma2, double d) {
  return sigma2 * matern_correlation(nu, std::sqrt(2.0 * nu * d));
}

void check_inverse_domain(double sigma2, double k) {
  if (!(k > 0.0) || k > sigma2) {
    std::ostringstream os;
    os << "kernel inverse: covariance " << k << " outside (0, " << sigma2
       << "]; clamp or threshold the covariance first";
    throw Error(ErrorKind::kDomain, os.str());
  }
}

}  // namespace

void KernelSpec::validate() const {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw Error(ErrorKind::kConfig, "kernel: sigma2 must be positive");
  }
  std::visit(overloaded{
                 [](const SquaredExponential&) {},
                 [](const RationalQuadratic& rq) {
                   if (!(rq.alpha > 0.0))
                     throw Error(ErrorKind::kConfig, "rational quadratic: alpha must be > 0");
                 },
                 [](const GammaExponential& ge) {
                   if (!(ge.gamma > 0.0 && ge.gamma <= 2.0))
                     throw Error(ErrorKind::kConfig, "gamma-exponential: gamma must be in (0, 2]");
                 },
                 [](const Matern& m) {
                   if (!(m.nu > 0.0)) throw Error(ErrorKind::kConfig, "matern: nu must be > 0");
                 },
             },
             family);
}

std::string family_name(const KernelSpec& spec) {
  return std::visit(overloaded{
                        [](const SquaredExponential&) { return std::string("se"); },
                        [](const RationalQuadratic&) { return std::string("rq"); },
                        [](const GammaExponential&) { return std::string("gamma-exp"); },
                        [](const Matern&) { return std::string("matern"); },
                    },
                    spec.family);
}

double kernel_forward(const KernelSpec& spec, double d) {
  if (!(d >= 0.0)) {
    throw Error(ErrorKind::kDomain, "kernel forward: distance must be nonnegative");
  }
  const double s2 = spec.sigma2;
  return std::visit(
      overloaded{
          [&](const SquaredExponential&) { return s2 * std::exp(-0.5 * d); },
          [&](const RationalQuadratic& rq) {
            return s2 * std::pow(1.0 + d / (2.0 * rq.alpha), -rq.alpha);
          },
          [&](const GammaExponential& ge) {
            return s2 * std::exp(-std::pow(d, 0.5 * ge.gamma));
          },
          [&](const Matern& m) { return matern_forward(m.nu, s2, d); },
      },
      spec.family);
}

double kernel_derivative(const KernelSpec& spec, double d) {
  if (!(d >= 0.0)) {
    throw Error(ErrorKind::kDomain, "kernel derivative: distance must be nonnegative");
  }
  const double s2 = spec.sigma2;
  return std::visit(
      overloaded{
          [&](const SquaredExponential&) { return -0.5 * s2 * std::exp(-0.5 * d); },
          [&](const RationalQuadratic& rq) {
            return -0.5 * s2 * std::pow(1.0 + d / (2.0 * rq.alpha), -rq.alpha - 1.0);
          },
          [&](const GammaExponential& ge) {
            const double h = 0.5 * ge.gamma;
            if (d == 0.0) {
              return h < 1.0 ? -std::numeric_limits<double>::infinity() : -s2;
            }
            return -s2 * h * std::pow(d, h - 1.0) * std::exp(-std::pow(d, h));
          },
          [&](const Matern& m) { return s2 * matern_correlation_derivative(m.nu, d); },
      },
      spec.family);
}

double kernel_inverse(const KernelSpec& spec, double k) {
  const double s2 = spec.sigma2;
  check_inverse_domain(s2, k);
  return std::visit(
      overloaded{
          [&](const SquaredExponential&) { return -2.0 * std::log(k / s2); },
          [&](const RationalQuadratic& rq) {
            return 2.0 * rq.alpha * (std::pow(k / s2, -1.0 / rq.alpha) - 1.0);
          },
          [&](const GammaExponential& ge) {
            return std::pow(-std::log(k / s2), 2.0 / ge.gamma);
          },
          [&](const Matern& m) { return matern_inverse_solve(m.nu, s2, k); },
      },
      spec.family);
}

double matern_inverse_solve(double nu, double sigma2, double k, double tol, int max_iter) {
  if (!(nu > 0.0)) throw Error(ErrorKind::kConfig, "matern: nu must be > 0");
  check_inverse_domain(sigma2, k);
  if (k == sigma2) return 0.0;

  const auto residual = [&](double d) { return matern_forward(nu, sigma2, d) - k; };

  // f is decreasing with f(0) = sigma2 > k, so doubling eventually brackets.
  double lo = 0.0;
  double hi = 1.0;
  int expansions = 0;
  while (residual(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++expansions > 1100 || !std::isfinite(hi)) {
      throw Error(ErrorKind::kConvergence, "matern inverse: failed to bracket the root");
    }
  }

  double d = 0.5 * (lo + hi);
  for (int iter = 0; iter < max_iter; ++iter) {
    const double r = residual(d);
    if (r == 0.0) return d;
    if (r > 0.0) {
      lo = d;
    } else {
      hi = d;
    }
    const double slope = sigma2 * matern_correlation_derivative(nu, d);
    double next = 0.5 * (lo + hi);
    if (std::isfinite(slope) && slope < 0.0) {
      const double newton = d - r / slope;
      if (newton > lo && newton < hi) next = newton;
    }
    const double step = std::abs(next - d);
    d = next;
    const double width = hi - lo;
    if (std::abs(r) <= tol * sigma2 &&
        (step <= 1e-14 * (1.0 + d) || width <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + d))) {
      return d;
    }
    if (width <= std::numeric_limits<double>::epsilon() * (1.0 + d)) return d;
  }
  if (std::abs(residual(d)) <= tol * sigma2) return d;
  std::ostringstream os;
  os << "matern inverse: no convergence within " << max_iter << " iterations (nu=" << nu
     << ", k=" << k << ")";
  throw Error(ErrorKind::kConvergence, os.str());
}

}  // namespace ikd
