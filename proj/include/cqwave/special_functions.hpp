#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "cqwave/contour.hpp"
#include "cqwave/errors.hpp"

namespace cqwave {

namespace detail {

inline void check_order(int n) {
  if (n < 0) throw DomainError("spherical Bessel order must be >= 0");
}

// j0, j1 scaled by exp(-|Im x|); series near the origin.
inline std::pair<cplx, cplx> j01_scaled(cplx x) {
  const double scale = std::exp(-std::abs(x.imag()));
  if (std::abs(x) < 1e-2) {
    const cplx x2 = x * x;
    const cplx j0 = 1.0 - x2 / 6.0 + x2 * x2 / 120.0 - x2 * x2 * x2 / 5040.0;
    const cplx j1 = x / 3.0 - x * x2 / 30.0 + x * x2 * x2 / 840.0;
    return {j0 * scale, j1 * scale};
  }
  // sin x e^{-|Im x|} and cos x e^{-|Im x|} without overflow.
  const double a = x.real();
  const double b = std::abs(x.imag());
  const double s = x.imag() >= 0 ? 1.0 : -1.0;
  const double ep = 0.5;                      // e^{b} e^{-b} / 2
  const double em = 0.5 * std::exp(-2.0 * b);  // e^{-b} e^{-b} / 2
  const cplx sin_s(std::sin(a) * (ep + em), s * std::cos(a) * (ep - em));
  const cplx cos_s(std::cos(a) * (ep + em), -s * std::sin(a) * (ep - em));
  const cplx j0 = sin_s / x;
  const cplx j1 = sin_s / (x * x) - cos_s / x;
  return {j0, j1};
}

}  // namespace detail

/// j_0..j_nmax scaled by exp(-|Im x|), by Miller's downward recurrence.
inline std::vector<cplx> spherical_bessel_j_scaled_all(int n_max, cplx x) {
  detail::check_order(n_max);
  std::vector<cplx> out(static_cast<size_t>(n_max) + 1, 0.0);
  const auto [j0, j1] = detail::j01_scaled(x);
  if (x == 0.0) {
    out[0] = 1.0;
    return out;
  }
  const int start = n_max + 20 + static_cast<int>(1.5 * std::abs(x));
  std::vector<cplx> f(static_cast<size_t>(start) + 2, 0.0);
  f[static_cast<size_t>(start)] = 1e-30;
  for (int k = start; k >= 1; --k) {
    const auto ku = static_cast<size_t>(k);
    f[ku - 1] = static_cast<double>(2 * k + 1) / x * f[ku] - f[ku + 1];
    if (std::abs(f[ku - 1]) > 1e250)
      for (size_t i = ku - 1; i < f.size(); ++i) f[i] *= 1e-250;
  }
  std::vector<cplx> f_vals(f.begin(), f.begin() + n_max + 1);
  if (n_max == 0) f_vals.push_back(f[1]);
  // Least-squares normalization against j0 and j1 stays accurate near zeros of either.
  const cplx f0 = f_vals[0];
  const cplx f1 = f_vals[1];
  const double denom = std::norm(f0) + std::norm(f1);
  const cplx s = (j0 * std::conj(f0) + j1 * std::conj(f1)) / denom;
  for (int n = 0; n <= n_max; ++n) out[static_cast<size_t>(n)] = s * f_vals[static_cast<size_t>(n)];
  out[0] = j0;
  if (n_max >= 1) out[1] = j1;
  return out;
}

inline std::vector<cplx> spherical_bessel_j_all(int n_max, cplx x) {
  auto v = spherical_bessel_j_scaled_all(n_max, x);
  const double b = std::abs(x.imag());
  if (b > 700.0) throw DomainError("spherical Bessel j_n overflows for |Im x| > 700");
  const double scale = std::exp(b);
  for (auto& e : v) e *= scale;
  return v;
}

inline cplx spherical_bessel_j(int n, cplx x) {
  detail::check_order(n);
  return spherical_bessel_j_all(std::max(n, 1), x)[static_cast<size_t>(n)];
}

/// j_n'(x) from j_n' = j_(n-1) - (n+1)/x j_n (and j_0' = -j_1).
inline cplx spherical_bessel_j_derivative(int n, cplx x) {
  detail::check_order(n);
  const auto j = spherical_bessel_j_all(n + 1, x);
  if (n == 0) return -j[1];
  if (x == 0.0) return n == 1 ? cplx(1.0 / 3.0) : cplx(0.0);
  return j[static_cast<size_t>(n - 1)] - static_cast<double>(n + 1) / x * j[static_cast<size_t>(n)];
}

/// h^(1)_0..h^(1)_nmax by upward recurrence (stable for the outgoing function).
inline std::vector<cplx> spherical_hankel1_all(int n_max, cplx x) {
  detail::check_order(n_max);
  if (x == 0.0) throw DomainError("spherical Hankel function is singular at x = 0");
  std::vector<cplx> h(static_cast<size_t>(n_max) + 1);
  const cplx e = std::exp(I * x);
  h[0] = -I * e / x;
  if (n_max >= 1) h[1] = -(e / x) * (1.0 + I / x);
  for (int n = 1; n < n_max; ++n)
    h[static_cast<size_t>(n + 1)] =
        static_cast<double>(2 * n + 1) / x * h[static_cast<size_t>(n)] - h[static_cast<size_t>(n - 1)];
  return h;
}

inline cplx spherical_hankel1(int n, cplx x) {
  detail::check_order(n);
  return spherical_hankel1_all(n, x)[static_cast<size_t>(n)];
}

inline cplx spherical_hankel1_derivative(int n, cplx x) {
  detail::check_order(n);
  const auto h = spherical_hankel1_all(n + 1, x);
  if (n == 0) return -h[1];
  return h[static_cast<size_t>(n - 1)] - static_cast<double>(n + 1) / x * h[static_cast<size_t>(n)];
}

}  // namespace cqwave
