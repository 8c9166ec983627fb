#pragma once

#include <cmath>
#include <complex>
#include <concepts>
#include <limits>
#include <span>
#include <string>

#include "cqwave/contour.hpp"
#include "cqwave/errors.hpp"

namespace cqwave {

/// Exact trapezoidal-inversion error u^Nf(t_n) - u(t_n) = sum_{kappa>=1} lambda^(kappa Nf) c_(n + kappa Nf)
/// for a function with Taylor coefficients c. Terms are summed until they drop below
/// 1e-18 of the partial sum; growing terms raise ConvergenceError.
template <std::invocable<long> Coeff>
cplx aliasing_error_oracle(Coeff&& coeff, const ContourSpec& contour, int n, long max_terms = 1'000'000) {
  const long nf = contour.n_freq();
  const double lambda_nf = std::pow(contour.lambda(), static_cast<double>(nf));
  cplx sum = 0.0;
  double weight = 1.0;
  double prev = std::numeric_limits<double>::infinity();
  int growing = 0;
  int negligible = 0;
  for (long kappa = 1; kappa <= max_terms; ++kappa) {
    weight *= lambda_nf;
    const cplx term = weight * cplx(coeff(static_cast<long>(n) + kappa * nf));
    sum += term;
    const double mag = std::abs(term);
    if (!std::isfinite(mag)) throw ConvergenceError("aliasing series produced a non-finite term");
    growing = (mag > prev && mag > 0.0) ? growing + 1 : 0;
    if (growing >= 8) throw ConvergenceError("aliasing series terms are not decreasing");
    negligible = (mag <= 1e-18 * std::abs(sum) || (mag == 0.0 && prev == 0.0)) ? negligible + 1 : 0;
    if (negligible >= 2) return sum;
    prev = mag;
  }
  throw ConvergenceError("aliasing series did not converge in " + std::to_string(max_terms) + " terms");
}

/// Finite coefficient sequence (zero beyond its end).
inline cplx aliasing_error_oracle(std::span<const cplx> coeffs, const ContourSpec& contour, int n) {
  const long nf = contour.n_freq();
  const double lambda_nf = std::pow(contour.lambda(), static_cast<double>(nf));
  cplx sum = 0.0;
  double weight = 1.0;
  for (long idx = n + nf; idx < static_cast<long>(coeffs.size()); idx += nf) {
    weight *= lambda_nf;
    sum += weight * coeffs[static_cast<size_t>(idx)];
  }
  return sum;
}

/// Cauchy estimate |u_n| <= max_{|z| = lambda_hat} |U| * lambda_hat^-n.
inline double decay_bound(double max_modulus_on_circle, double lambda_hat, int n) {
  if (!(lambda_hat > 0.0)) throw DomainError("decay bound needs lambda_hat > 0");
  return max_modulus_on_circle * std::pow(lambda_hat, -static_cast<double>(n));
}

/// Geometric factor lambda / lambda_U of the error decay in the node count.
inline double predicted_rate(double lambda, double lambda_u) {
  if (!(lambda > 0.0)) throw DomainError("predicted rate needs lambda > 0");
  if (!(lambda < lambda_u))
    throw DomainError("contour radius " + std::to_string(lambda) + " is not inside the analyticity radius " +
                      std::to_string(lambda_u) + "; no exponential rate applies");
  return lambda / lambda_u;
}

}  // namespace cqwave
