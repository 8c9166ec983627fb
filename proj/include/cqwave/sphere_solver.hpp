#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "cqwave/errors.hpp"
#include "cqwave/special_functions.hpp"
#include "cqwave/spherical_harmonics.hpp"

namespace cqwave {

/// Default series truncation for wavenumber k.
inline int sphere_truncation_degree(cplx k) {
  return std::max(8, static_cast<int>(std::ceil(std::abs(k))) + 10);
}

/// Exterior field sum_nm a_nm h_n(kr) Y_n^m on the unit sphere.
/// The boundary coefficients and h_n(k) are kept so evaluation can use
/// the ratio h_n(kr)/h_n(k), which stays bounded where h_n itself underflows.
struct SphereSolution {
  cplx k;
  SphericalHarmonicExpansion data;
  std::vector<cplx> hankel_at_boundary;  // h_n(k), n = 0..L

  int degree() const noexcept { return data.L; }
  cplx coeff(int n, int m) const { return data(n, m) / hankel_at_boundary.at(static_cast<size_t>(n)); }
};

inline constexpr double kNearPoleTolerance = 1e-13;

inline SphereSolution solve_exterior_dirichlet_sphere(const SphericalHarmonicExpansion& data, cplx k) {
  if (k == 0.0) throw DomainError("the static exterior problem is not supported by the Hankel series");
  auto h = spherical_hankel1_all(data.L, k);
  double gmax = 0.0;
  for (const auto& g : data.coeffs) gmax = std::max(gmax, std::abs(g));
  double hscale = 0.0;
  for (int n = 0; n <= data.L; ++n) {
    const double hn = std::abs(h[static_cast<size_t>(n)]);
    if (!std::isfinite(hn)) throw DomainError("spherical Hankel function overflow; reduce the truncation degree");
    hscale = std::max(hscale, hn);
    bool present = false;
    for (int m = -n; m <= n && !present; ++m) present = std::abs(data(n, m)) > 1e-14 * gmax;
    if (present && hn < kNearPoleTolerance * hscale)
      throw NearPoleError("k = (" + std::to_string(k.real()) + ", " + std::to_string(k.imag()) +
                          ") is at a scattering pole of mode n = " + std::to_string(n) +
                          "; change lambda or Nf");
  }
  return {k, data, std::move(h)};
}

/// Radial factors h_n(kr)/h_n(k) for n = 0..L.
inline std::vector<cplx> sphere_radial_factors(const SphereSolution& sol, double r) {
  if (r < 1.0 - 1e-14) throw DomainError("evaluation point lies inside the unit sphere");
  auto hr = spherical_hankel1_all(sol.degree(), sol.k * r);
  for (int n = 0; n <= sol.degree(); ++n) hr[static_cast<size_t>(n)] /= sol.hankel_at_boundary[static_cast<size_t>(n)];
  return hr;
}

/// Field value given precomputed harmonics at the direction and radial factors.
inline cplx sphere_field(const SphereSolution& sol, std::span<const cplx> radial, std::span<const cplx> Y) {
  cplx acc = 0.0;
  for (int n = 0; n <= sol.degree(); ++n) {
    cplx mode = 0.0;
    for (int m = -n; m <= n; ++m) {
      const auto i = static_cast<size_t>(sh_index(n, m));
      mode += sol.data.coeffs[i] * Y[i];
    }
    if (mode != 0.0) acc += radial[static_cast<size_t>(n)] * mode;
  }
  return acc;
}

inline cplx evaluate_sphere_solution(const SphereSolution& sol, const Vec3& point) {
  const double r = std::hypot(point[0], point[1], point[2]);
  if (r < 1.0 - 1e-14) throw DomainError("evaluation point lies inside the unit sphere");
  const auto radial = sphere_radial_factors(sol, r);
  const auto Y = spherical_harmonics_all(sol.degree(), point);
  return sphere_field(sol, radial, Y);
}

}  // namespace cqwave
