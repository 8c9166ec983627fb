#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "cqwave/contour.hpp"
#include "cqwave/errors.hpp"
#include "cqwave/formulation.hpp"
#include "cqwave/special_functions.hpp"
#include "cqwave/time_rule.hpp"

namespace cqwave {

enum class PoleKind { dirichlet, neumann, impedance, scattering };

inline std::string pole_kind_name(PoleKind k) {
  switch (k) {
    case PoleKind::dirichlet: return "dirichlet";
    case PoleKind::neumann: return "neumann";
    case PoleKind::impedance: return "impedance";
    case PoleKind::scattering: return "scattering";
  }
  return "?";
}

struct PoleEntry {
  cplx k_value;
  PoleKind kind;
  int n = 0;
  cplx z_image = 0.0;
  double z_modulus = std::numeric_limits<double>::infinity();
};

namespace detail {

inline double bisect(const std::function<double(double)>& f, double a, double b, double fa) {
  for (int it = 0; it < 200 && b - a > 1e-12; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm < 0) == (fa < 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

/// Defining function of an interior eigenproblem on the unit sphere, mode n.
inline double interior_eigen_function(PoleKind kind, double eta, int n, double k) {
  const cplx x(k, 0.0);
  switch (kind) {
    case PoleKind::dirichlet: return spherical_bessel_j(n, x).real();
    case PoleKind::neumann: return spherical_bessel_j_derivative(n, x).real();
    case PoleKind::impedance:
      return (k * spherical_bessel_j_derivative(n, x) + eta * spherical_bessel_j(n, x)).real();
    default: throw InvalidArgument("not an interior eigenproblem");
  }
}

/// Real roots in (0, k_max] by sign changes on a 0.01 grid and bisection; Neumann adds k = 0.
inline std::vector<PoleEntry> interior_eigenvalues_sphere(PoleKind kind, cplx eta, int n_max, double k_max) {
  if (n_max < 0) throw InvalidArgument("n_max must be >= 0");
  if (!(k_max > 0)) throw InvalidArgument("k_max must be positive");
  if (kind == PoleKind::scattering) throw InvalidArgument("use scattering_poles_sphere for scattering poles");
  if (kind == PoleKind::impedance && eta.imag() != 0.0)
    throw DomainError("complex eta is not supported by the real root finder; locate poles with an inverse-norm scan");
  std::vector<PoleEntry> out;
  if (kind == PoleKind::neumann) out.push_back({0.0, PoleKind::neumann, 0});
  const double h = 0.01;
  const int steps = static_cast<int>(std::floor(k_max / h + 1e-9));
  for (int n = 0; n <= n_max; ++n) {
    std::function<double(double)> f = [&](double k) { return interior_eigen_function(kind, eta.real(), n, k); };
    double a = h, fa = f(a);
    for (int s = 2; s <= steps; ++s) {
      const double b = s * h, fb = f(b);
      if (fa == 0.0) {
        out.push_back({a, kind, n});
      } else if ((fa < 0) != (fb < 0) && fb != 0.0) {
        out.push_back({detail::bisect(f, a, b, fa), kind, n});
      }
      a = b;
      fa = fb;
    }
    if (fa == 0.0) out.push_back({a, kind, n});
  }
  return out;
}

/// Zeros of h_n^(1): h_n(x) = (-i)^{n+1} e^{ix}/x p_n(1/x), p_n(y) = sum_k i^k (n+k)! / (k! (n-k)! 2^k) y^k.
inline std::vector<PoleEntry> scattering_poles_sphere(int n_max) {
  if (n_max < 0 || n_max > 12) throw InvalidArgument("scattering pole search supports 0 <= n_max <= 12");
  std::vector<PoleEntry> out;
  for (int n = 1; n <= n_max; ++n) {
    std::vector<cplx> a(static_cast<size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
      double c = 1.0;  // (n+k)! / (k! (n-k)!) / 2^k
      for (int t = n - k + 1; t <= n + k; ++t) c *= t;
      for (int t = 2; t <= k; ++t) c /= t;
      c /= std::ldexp(1.0, k);
      a[static_cast<size_t>(k)] = std::pow(I, k) * c;
    }
    MatrixXc C = MatrixXc::Zero(n, n);
    for (int i = 1; i < n; ++i) C(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) C(i, n - 1) = -a[static_cast<size_t>(i)] / a[static_cast<size_t>(n)];
    Eigen::ComplexEigenSolver<MatrixXc> es(C, false);
    auto p = [&](cplx y) {
      cplx v = 0.0, d = 0.0;
      for (int k = n; k >= 0; --k) {
        d = d * y + v;
        v = v * y + a[static_cast<size_t>(k)];
      }
      return std::pair{v, d};
    };
    std::vector<cplx> roots;
    for (int i = 0; i < n; ++i) {
      cplx y = es.eigenvalues()(i);
      for (int it = 0; it < 20; ++it) {
        const auto [v, d] = p(y);
        if (d == 0.0) break;
        const cplx step = v / d;
        y -= step;
        if (std::abs(step) < 1e-16 * std::abs(y)) break;
      }
      roots.push_back(1.0 / y);
    }
    std::sort(roots.begin(), roots.end(), [](cplx u, cplx v) {
      return std::make_pair(u.real(), u.imag()) < std::make_pair(v.real(), v.imag());
    });
    for (cplx k : roots) out.push_back({k, PoleKind::scattering, n});
  }
  return out;
}

/// z-plane images of a k-plane pole: solutions of gamma(z) = -i c dt k.
/// Runge-Kutta: some eigenvalue of Delta(z) equals sigma = -i c dt k, i.e. z = 1/R(sigma).
inline std::vector<cplx> map_pole_to_z(const TimeRule& rule, cplx k_pole, const TimeGrid& grid) {
  const cplx sigma = -I * grid.c_dt() * k_pole;
  if (rule.is_rk()) {
    const cplx R = rule.rk->stability_function(sigma);
    if (R == 0.0) return {};
    return {1.0 / R};
  }
  switch (rule.multistep->kind()) {
    case MultistepKind::backward_euler: return {1.0 - sigma};
    case MultistepKind::bdf2: {
      // z^2/2 - 2z + 3/2 - sigma = 0.
      const cplx root = std::sqrt(1.0 + 2.0 * sigma);
      return {2.0 - root, 2.0 + root};
    }
  }
  return {};
}

inline std::vector<cplx> map_pole_to_z(const MultistepRule& rule, cplx k_pole, const TimeGrid& grid) {
  return map_pole_to_z(TimeRule{rule, std::nullopt}, k_pole, grid);
}

/// One entry per z-image.
inline std::vector<PoleEntry> map_entries(const std::vector<PoleEntry>& poles, const TimeRule& rule,
                                          const TimeGrid& grid) {
  std::vector<PoleEntry> out;
  for (const auto& p : poles)
    for (cplx z : map_pole_to_z(rule, p.k_value, grid)) {
      PoleEntry e = p;
      e.z_image = z;
      e.z_modulus = std::abs(z);
      out.push_back(e);
    }
  return out;
}

struct AnalyticityReport {
  double lambda_B = std::numeric_limits<double>::infinity();
  double lambda_G = std::numeric_limits<double>::infinity();
  double lambda_U = std::numeric_limits<double>::infinity();
  std::optional<PoleEntry> dominant;

  double rate(double lambda) const { return predicted_rate_value(lambda); }

 private:
  double predicted_rate_value(double lambda) const {
    if (!(lambda < lambda_U)) throw DomainError("contour radius is not inside the analyticity radius");
    return lambda / lambda_U;
  }
};

inline AnalyticityReport analyticity_report(const std::vector<PoleEntry>& entries, double lambda_G) {
  if (entries.empty() && !std::isfinite(lambda_G))
    throw InvalidArgument("no poles and no data radius: analyticity radius is undefined");
  AnalyticityReport r;
  r.lambda_G = lambda_G;
  auto key = [](const PoleEntry& e) {
    return std::make_tuple(e.z_modulus, static_cast<int>(e.kind), e.n, e.k_value.real(), e.k_value.imag());
  };
  for (const auto& e : entries)
    if (!r.dominant || key(e) < key(*r.dominant)) r.dominant = e;
  if (r.dominant) r.lambda_B = r.dominant->z_modulus;
  r.lambda_U = std::min(r.lambda_B, r.lambda_G);
  return r;
}

enum class DataKind { gaussian_beam, exponential_envelope };

/// Radius of analyticity of the boundary data transform G(z).
inline double data_analyticity_radius(DataKind kind, double beta, const TimeGrid& grid) {
  if (kind == DataKind::gaussian_beam) return std::numeric_limits<double>::infinity();
  return std::exp(beta * grid.dt());
}

struct SphereAtlasOptions {
  int n_max = 8;
  double k_max = 12.0;
};

/// k-plane singularities of a formulation on the unit sphere. The analytic
/// series back end has only scattering poles; the indirect formulations add
/// the interior eigenvalues they inherit. combined-omega is singular only at
/// k = 0 among real wavenumbers.
inline std::vector<PoleEntry> sphere_poles(const Formulation& f, bool analytic_backend,
                                           const SphereAtlasOptions& opt = {}) {
  auto out = scattering_poles_sphere(std::min(opt.n_max, 12));
  if (analytic_backend) return out;
  std::vector<PoleEntry> interior;
  switch (f.kind) {
    case FormulationKind::first_kind:
      interior = interior_eigenvalues_sphere(PoleKind::dirichlet, 0.0, opt.n_max, opt.k_max);
      break;
    case FormulationKind::second_kind:
      interior = interior_eigenvalues_sphere(PoleKind::neumann, 0.0, opt.n_max, opt.k_max);
      break;
    case FormulationKind::combined_const:
      interior = interior_eigenvalues_sphere(PoleKind::impedance, f.eta, opt.n_max, opt.k_max);
      break;
    case FormulationKind::combined_omega:
      interior.push_back({0.0, PoleKind::neumann, 0});
      break;
  }
  interior.insert(interior.end(), out.begin(), out.end());
  return interior;
}

}  // namespace cqwave
