#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "cqwave/contour.hpp"
#include "cqwave/errors.hpp"

namespace cqwave {

using Vec3 = std::array<double, 3>;

inline constexpr int sh_index(int n, int m) { return n * n + n + m; }
inline constexpr int sh_count(int L) { return (L + 1) * (L + 1); }

/// Orthonormal Y_n^m (Condon-Shortley phase) for all 0 <= n <= L at one direction.
inline std::vector<cplx> spherical_harmonics_all(int L, double cos_theta, double phi) {
  if (L < 0) throw InvalidArgument("harmonic degree must be >= 0");
  std::vector<cplx> Y(static_cast<size_t>(sh_count(L)));
  const double x = std::clamp(cos_theta, -1.0, 1.0);
  const double s = std::sqrt(std::max(0.0, 1.0 - x * x));
  // Normalized associated Legendre functions, column m at a time.
  double pmm = 1.0 / std::sqrt(4.0 * std::numbers::pi);
  for (int m = 0; m <= L; ++m) {
    if (m > 0) pmm *= -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s;
    double p_nm2 = 0.0;
    double p_nm1 = pmm;
    const cplx phase(std::cos(m * phi), std::sin(m * phi));
    auto store = [&](int n, double p) {
      Y[static_cast<size_t>(sh_index(n, m))] = p * phase;
      if (m > 0) {
        const double sign = (m % 2 == 0) ? 1.0 : -1.0;
        Y[static_cast<size_t>(sh_index(n, -m))] = sign * p * std::conj(phase);
      }
    };
    store(m, pmm);
    for (int n = m + 1; n <= L; ++n) {
      const double a = std::sqrt((4.0 * n * n - 1.0) / (static_cast<double>(n) * n - static_cast<double>(m) * m));
      const double b = std::sqrt((static_cast<double>(n - 1) * (n - 1) - static_cast<double>(m) * m) /
                                 (4.0 * (n - 1) * (n - 1) - 1.0));
      const double p = a * (x * p_nm1 - b * p_nm2);
      p_nm2 = p_nm1;
      p_nm1 = p;
      store(n, p);
    }
  }
  return Y;
}

inline std::vector<cplx> spherical_harmonics_all(int L, const Vec3& direction) {
  const double r = std::hypot(direction[0], direction[1], direction[2]);
  if (r == 0.0) throw DomainError("direction must be nonzero");
  return spherical_harmonics_all(L, direction[2] / r, std::atan2(direction[1], direction[0]));
}

inline cplx spherical_harmonic(int n, int m, double cos_theta, double phi) {
  if (std::abs(m) > n) throw InvalidArgument("|m| must not exceed n");
  return spherical_harmonics_all(n, cos_theta, phi)[static_cast<size_t>(sh_index(n, m))];
}

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussLegendre gauss_legendre(int n) {
  if (n < 1) throw InvalidArgument("Gauss-Legendre rule needs n >= 1");
  GaussLegendre gl{std::vector<double>(static_cast<size_t>(n)), std::vector<double>(static_cast<size_t>(n))};
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0, p1 = x;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    gl.nodes[static_cast<size_t>(i)] = x;
    gl.weights[static_cast<size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return gl;
}

/// Product grid: Gauss-Legendre in cos(theta) (L+1 points) times uniform phi (2L+2 points).
/// Points are ordered theta-major.
class SphereGrid {
 public:
  explicit SphereGrid(int L) : L_(L), gl_(gauss_legendre(L + 1)) {
    if (L < 0) throw InvalidArgument("grid degree must be >= 0");
    const int nphi = 2 * L + 2;
    for (int i = 0; i <= L; ++i) {
      const double ct = gl_.nodes[static_cast<size_t>(i)];
      const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
      for (int j = 0; j < nphi; ++j) {
        const double phi = 2.0 * std::numbers::pi * j / nphi;
        points_.push_back({st * std::cos(phi), st * std::sin(phi), ct});
        weights_.push_back(gl_.weights[static_cast<size_t>(i)] * 2.0 * std::numbers::pi / nphi);
        harmonics_.push_back(spherical_harmonics_all(L, ct, phi));
      }
    }
  }

  int degree() const noexcept { return L_; }
  int size() const noexcept { return static_cast<int>(points_.size()); }
  const std::vector<Vec3>& points() const noexcept { return points_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<cplx>& harmonics_at(int p) const { return harmonics_[static_cast<size_t>(p)]; }

 private:
  int L_;
  GaussLegendre gl_;
  std::vector<Vec3> points_;
  std::vector<double> weights_;
  std::vector<std::vector<cplx>> harmonics_;
};

/// Coefficients g_(n,m), 0 <= n <= L, stored at sh_index(n, m).
struct SphericalHarmonicExpansion {
  int L = 0;
  std::vector<cplx> coeffs;

  SphericalHarmonicExpansion() : coeffs(1, 0.0) {}
  SphericalHarmonicExpansion(int degree, std::vector<cplx> c) : L(degree), coeffs(std::move(c)) {
    if (static_cast<int>(coeffs.size()) != sh_count(L))
      throw InvalidArgument("expansion length must be (L+1)^2");
  }
  cplx operator()(int n, int m) const { return coeffs.at(static_cast<size_t>(sh_index(n, m))); }

  /// Copy restricted to degree <= L_new (zero-padded when L_new > L).
  SphericalHarmonicExpansion truncated(int L_new) const {
    std::vector<cplx> c(static_cast<size_t>(sh_count(L_new)), 0.0);
    for (int i = 0; i < std::min(sh_count(L_new), sh_count(L)); ++i) c[static_cast<size_t>(i)] = coeffs[static_cast<size_t>(i)];
    return {L_new, std::move(c)};
  }
};

/// Projection g_(n,m) = sum_p w_p conj(Y_n^m(x_p)) f(x_p); exact for data of degree <= grid degree.
inline SphericalHarmonicExpansion sh_analyze(std::span<const cplx> values, const SphereGrid& grid, int L) {
  if (static_cast<int>(values.size()) != grid.size())
    throw InvalidArgument("boundary samples do not match the quadrature grid");
  if (L < 0 || L > grid.degree()) throw InvalidArgument("analysis degree exceeds the grid degree");
  std::vector<cplx> c(static_cast<size_t>(sh_count(L)), 0.0);
  for (int p = 0; p < grid.size(); ++p) {
    const cplx wf = grid.weights()[static_cast<size_t>(p)] * values[static_cast<size_t>(p)];
    if (wf == 0.0) continue;
    const auto& Y = grid.harmonics_at(p);
    for (int i = 0; i < sh_count(L); ++i) c[static_cast<size_t>(i)] += std::conj(Y[static_cast<size_t>(i)]) * wf;
  }
  return {L, std::move(c)};
}

inline SphericalHarmonicExpansion sh_analyze(std::span<const cplx> values, const SphereGrid& grid) {
  return sh_analyze(values, grid, grid.degree());
}

inline std::vector<cplx> sh_synthesize(const SphericalHarmonicExpansion& e, const SphereGrid& grid) {
  if (e.L > grid.degree()) throw InvalidArgument("expansion degree exceeds the grid degree");
  std::vector<cplx> v(static_cast<size_t>(grid.size()), 0.0);
  for (int p = 0; p < grid.size(); ++p) {
    const auto& Y = grid.harmonics_at(p);
    cplx acc = 0.0;
    for (int i = 0; i < sh_count(e.L); ++i) acc += e.coeffs[static_cast<size_t>(i)] * Y[static_cast<size_t>(i)];
    v[static_cast<size_t>(p)] = acc;
  }
  return v;
}

}  // namespace cqwave
