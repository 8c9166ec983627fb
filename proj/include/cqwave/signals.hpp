#pragma once

#include <cmath>
#include <numbers>
#include <optional>

#include "cqwave/errors.hpp"
#include "cqwave/spherical_harmonics.hpp"

namespace cqwave {

struct GaussianBeamParams {
  double f = 0.0;  // carrier frequency; no default on purpose
  double t_p = 1e-3;
  double sigma = 2e-4;
  Vec3 d{1.0, 0.0, 0.0};
  double c = 343.0;
  std::optional<double> sigma_w;  // smoothing window width

  bool operator==(const GaussianBeamParams&) const = default;
};

/// -cos(2 pi f (t - d.x/c)) exp(-(t - t_p - d.x/c)^2 / (2 sigma^2)), optionally times (1 - e^{-t^2/(2 sigma_w^2)}).
inline double gaussian_beam(const GaussianBeamParams& p, double t, const Vec3& x) {
  const double dn = std::hypot(p.d[0], p.d[1], p.d[2]);
  if (std::abs(dn - 1.0) > 1e-12) throw InvalidArgument("beam direction must be a unit vector");
  const double delay = (p.d[0] * x[0] + p.d[1] * x[1] + p.d[2] * x[2]) / p.c;
  const double s = t - p.t_p - delay;
  double g = -std::cos(2.0 * std::numbers::pi * p.f * (t - delay)) * std::exp(-s * s / (2.0 * p.sigma * p.sigma));
  if (p.sigma_w) g *= 1.0 - std::exp(-t * t / (2.0 * *p.sigma_w * *p.sigma_w));
  return g;
}

struct PulseParams {
  double a = 25.0;
  double b = 300.0;
  int m = 10;
  double p = 150.0;

  bool operator==(const PulseParams&) const = default;
};

/// b (a t)^m e^{-p t}, zero for t < 0.
inline double polynomial_pulse(const PulseParams& q, double t) {
  if (t <= 0.0) return q.m == 0 && t == 0.0 ? q.b : 0.0;
  return q.b * std::pow(q.a * t, q.m) * std::exp(-q.p * t);
}

/// Radiating monopole with boundary trace f on the unit sphere: H(tau) f(tau) / r, tau = t - (r-1)/c.
inline double exact_monopole_solution(const PulseParams& q, double c, double r, double t) {
  if (r < 1.0) throw DomainError("monopole solution is defined for r >= 1");
  const double tau = t + (1.0 - r) / c;
  if (tau < 0.0) return 0.0;
  return polynomial_pulse(q, tau) / r;
}

}  // namespace cqwave
