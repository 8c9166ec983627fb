#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "cqwave/bem.hpp"
#include "cqwave/config.hpp"
#include "cqwave/contour.hpp"
#include "cqwave/diagnostics.hpp"
#include "cqwave/error_theory.hpp"
#include "cqwave/pole_atlas.hpp"
#include "cqwave/radau.hpp"
#include "cqwave/signals.hpp"
#include "cqwave/sphere_solver.hpp"
#include "cqwave/time_rule.hpp"
#include "cqwave/ztransform.hpp"

namespace cqwave {

/// Real field u[n][p] at observation points for n = 0..Nt-1.
struct TimeDomainField {
  TimeGrid grid{1.0, 1.0, 1};
  std::vector<Vec3> points;
  std::vector<std::vector<double>> values;
  double imag_residue = 0.0;  // max |Im u| / max |u|
  int n_freq = 0;             // nodes actually used (after any defective-point nudge)

  int n_steps() const { return static_cast<int>(values.size()); }
  int n_points() const { return static_cast<int>(points.size()); }
};

/// One frequency problem: Dirichlet data at the boundary sample points in,
/// field at the observation points out.
class FrequencyBackend {
 public:
  virtual ~FrequencyBackend() = default;
  virtual const std::vector<Vec3>& boundary_points() const = 0;
  virtual const std::vector<Vec3>& observation_points() const = 0;
  virtual std::vector<cplx> solve(cplx omega, std::span<const cplx> data) const = 0;
};

/// Spherical-harmonics series on the unit sphere.
class SphereBackend final : public FrequencyBackend {
 public:
  SphereBackend(int grid_degree, std::vector<Vec3> points) : grid_(grid_degree), obs_(std::move(points)) {
    for (const auto& p : obs_) {
      const double r = norm(p);
      if (r < 1.0) throw DomainError("observation point lies inside the unit sphere");
      radius_.push_back(r);
      harmonics_.push_back(spherical_harmonics_all(grid_degree, p));
    }
  }
  const std::vector<Vec3>& boundary_points() const override { return grid_.points(); }
  const std::vector<Vec3>& observation_points() const override { return obs_; }

  std::vector<cplx> solve(cplx omega, std::span<const cplx> data) const override {
    const cplx k = I * omega;
    const int L = std::min(sphere_truncation_degree(k), grid_.degree());
    const auto sol = solve_exterior_dirichlet_sphere(sh_analyze(data, grid_, L), k);
    std::vector<cplx> u(obs_.size());
    for (size_t p = 0; p < obs_.size(); ++p) {
      const auto radial = sphere_radial_factors(sol, radius_[p]);
      u[p] = sphere_field(sol, radial, harmonics_[p]);
    }
    return u;
  }

 private:
  SphereGrid grid_;
  std::vector<Vec3> obs_;
  std::vector<double> radius_;
  std::vector<std::vector<cplx>> harmonics_;
};

/// Dense collocation BEM with an indirect formulation.
class BemBackend final : public FrequencyBackend {
 public:
  BemBackend(std::shared_ptr<const BemDiscretization> bem, Formulation f, std::vector<Vec3> points)
      : bem_(std::move(bem)), f_(f), obs_(std::move(points)) {
    for (const auto& x : obs_) bem_->check_exterior(x);
  }
  const std::vector<Vec3>& boundary_points() const override { return bem_->mesh().centroids(); }
  const std::vector<Vec3>& observation_points() const override { return obs_; }

  std::vector<cplx> solve(cplx omega, std::span<const cplx> data) const override {
    const VectorXc rhs = Eigen::Map<const VectorXc>(data.data(), static_cast<Eigen::Index>(data.size()));
    const auto sol = solve_density(formulation_matrix(*bem_, omega, f_), rhs, omega, f_);
    std::vector<cplx> s, d;
    std::span<const cplx> phi(sol.phi.data(), static_cast<size_t>(sol.phi.size()));
    bem_->potentials(obs_, phi, omega, f_.uses_single_layer() ? &s : nullptr, f_.uses_double_layer() ? &d : nullptr);
    const cplx eta = f_.kind == FormulationKind::first_kind ? cplx(1.0) : f_.eta_at(omega);
    std::vector<cplx> u(obs_.size(), 0.0);
    for (size_t p = 0; p < obs_.size(); ++p) {
      if (f_.uses_double_layer()) u[p] += d[p];
      if (f_.uses_single_layer()) u[p] += eta * s[p];
    }
    return u;
  }

  const BemDiscretization& discretization() const { return *bem_; }
  const Formulation& formulation() const { return f_; }

 private:
  std::shared_ptr<const BemDiscretization> bem_;
  Formulation f_;
  std::vector<Vec3> obs_;
};

/// Field values per node, keyed by the reduced node angle k/Nf so that a
/// reference run can serve coarser contours of the same radius.
class NodeCache {
 public:
  explicit NodeCache(double lambda) : lambda_(lambda) {}
  double lambda() const { return lambda_; }
  const std::vector<cplx>* find(int k, int nf) const {
    auto it = map_.find(key(k, nf));
    return it == map_.end() ? nullptr : &it->second;
  }
  void store(int k, int nf, std::vector<cplx> v) { map_.emplace(key(k, nf), std::move(v)); }
  size_t size() const { return map_.size(); }

 private:
  static std::pair<int, int> key(int k, int nf) {
    const int kk = k % nf;
    const int g = std::gcd(kk, nf);
    return {kk / g, nf / g};
  }
  double lambda_;
  std::map<std::pair<int, int>, std::vector<cplx>> map_;
};

struct CqSettings {
  TimeGrid grid;
  ContourSpec contour;
  TimeRule rule;
  SpectrumMode spectrum = SpectrumMode::half;
  int workers = 1;
};

using BoundaryFunction = std::function<double(double t, const Vec3& x)>;

namespace detail {

/// Runs task(i) for i in [0, n) on a pool; results are index-addressed by the task.
/// The failure with the smallest index is rethrown after all workers join.
inline void parallel_for(int n, int workers, const std::function<void(int)>& task) {
  std::vector<std::exception_ptr> errors(static_cast<size_t>(n));
  std::atomic<int> next{0};
  auto body = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[static_cast<size_t>(i)] = std::current_exception();
      }
    }
  };
  const int w = std::max(1, std::min(workers, n));
  if (w == 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < w; ++t) pool.emplace_back(body);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline std::string node_context(int k, cplx z, cplx omega) {
  return "frequency solve failed at node k=" + std::to_string(k) + " (z=" + std::to_string(z.real()) + "+" +
         std::to_string(z.imag()) + "i, omega=" + std::to_string(omega.real()) + "+" + std::to_string(omega.imag()) +
         "i): ";
}

// Re-raises the in-flight exception with node context, keeping its type.
[[noreturn]] inline void rethrow_with_context(const std::string& ctx) {
  try {
    throw;
  } catch (const NearPoleError& e) {
    throw NearPoleError(ctx + e.what() + "; change lambda or Nf");
  } catch (const DefectivePointError& e) {
    throw DefectivePointError(ctx + e.what() + "; change Nf");
  } catch (const SingularMatrixError& e) {
    throw SingularMatrixError(ctx + e.what(), e.rcond());
  } catch (const std::exception& e) {
    throw Error(ctx + e.what());
  }
}

inline bool near_defective(const ContourSpec& c) {
  const double zd = radau2_defective_point();
  for (int k = 1; k <= c.n_freq(); ++k)
    if (std::abs(c.node(k) - zd) < 1e-6) return true;
  return false;
}

}  // namespace detail

/// Moves Nf up until no node is within 1e-6 of the Radau IIa defective point.
inline ContourSpec avoid_defective_nodes(const ContourSpec& c, const TimeRule& rule) {
  if (!rule.is_rk() || rule.rk->name != "radau2a") return c;
  // Node Nf is z = lambda for every Nf, so only lambda can move it.
  if (std::abs(c.lambda() - radau2_defective_point()) < 1e-6)
    throw DefectivePointError("contour radius lambda = " + std::to_string(c.lambda()) +
                              " puts a node on the defective point 3 sqrt(3) - 5; change lambda");
  ContourSpec out = c;
  while (detail::near_defective(out)) out = ContourSpec(out.lambda(), out.n_freq() + 1);
  if (out.n_freq() != c.n_freq())
    diag::emit("contour node near the defective point 3 sqrt(3) - 5; Nf nudged from " + std::to_string(c.n_freq()) +
               " to " + std::to_string(out.n_freq()));
  return out;
}

/// U(z_k) at the observation points for every node of the contour (full spectrum, index k-1).
inline std::vector<std::vector<cplx>> solve_all_nodes(const FrequencyBackend& backend, const BoundaryFunction& g,
                                                      const CqSettings& s, NodeCache* cache = nullptr) {
  const auto& contour = s.contour;
  const int nf = contour.n_freq();
  const int nt = s.grid.n_steps();
  const double dt = s.grid.dt();
  const auto& bpts = backend.boundary_points();
  const size_t nb = bpts.size();
  const size_t nobs = backend.observation_points().size();
  const int stages = s.rule.is_rk() ? s.rule.rk->stages() : 1;

  // G[stage][k-1][b]
  std::vector<std::vector<std::vector<cplx>>> G(static_cast<size_t>(stages),
                                                std::vector<std::vector<cplx>>(static_cast<size_t>(nf), std::vector<cplx>(nb)));
  {
    Dft dft(nf, +1);
    std::vector<cplx> samples(static_cast<size_t>(nt));
    for (int st = 0; st < stages; ++st) {
      const double shift = s.rule.is_rk() ? s.rule.rk->c(st) * dt : 0.0;
      for (size_t b = 0; b < nb; ++b) {
        for (int n = 0; n < nt; ++n) samples[static_cast<size_t>(n)] = g(n * dt + shift, bpts[b]);
        const auto fs = ztransform_all_nodes(truncate_tail(samples), contour, dft);
        for (int k = 0; k < nf; ++k) G[static_cast<size_t>(st)][static_cast<size_t>(k)][b] = fs.values[static_cast<size_t>(k)];
      }
    }
  }

  std::vector<int> nodes;
  if (s.spectrum == SpectrumMode::half) {
    nodes = half_spectrum_indices(nf);
  } else {
    for (int k = 1; k <= nf; ++k) nodes.push_back(k);
  }
  std::vector<std::vector<cplx>> solved(nodes.size());
  std::vector<char> from_cache(nodes.size(), 0);
  if (cache && cache->lambda() == contour.lambda())
    for (size_t i = 0; i < nodes.size(); ++i)
      if (const auto* v = cache->find(nodes[i], nf)) {
        solved[i] = *v;
        from_cache[i] = 1;
      }

  auto task = [&](int i) {
    if (from_cache[static_cast<size_t>(i)]) return;
    const int k = nodes[static_cast<size_t>(i)];
    const cplx z = contour.node(k);
    cplx omega = 0.0;
    try {
      if (!s.rule.is_rk()) {
        omega = frequency_of_node(multistep_symbol(*s.rule.multistep, z), s.grid).omega;
        solved[static_cast<size_t>(i)] = backend.solve(omega, G[0][static_cast<size_t>(k - 1)]);
        return;
      }
      const auto dec = stage_decomposition(*s.rule.rk, z);
      std::vector<cplx> U(nobs, 0.0);
      std::vector<cplx> data(nb);
      for (int j = 0; j < stages; ++j) {
        omega = dec.gamma(j) / s.grid.c_dt();
        for (size_t b = 0; b < nb; ++b) {
          cplx acc = 0.0;
          for (int l = 0; l < stages; ++l) acc += dec.P_inv(j, l) * G[static_cast<size_t>(l)][static_cast<size_t>(k - 1)][b];
          data[b] = acc;
        }
        const auto W = backend.solve(omega, data);
        const cplx weight = z * dec.P(stages - 1, j);
        for (size_t p = 0; p < nobs; ++p) U[p] += weight * W[p];
      }
      solved[static_cast<size_t>(i)] = std::move(U);
    } catch (...) {
      detail::rethrow_with_context(detail::node_context(k, z, omega));
    }
  };
  detail::parallel_for(static_cast<int>(nodes.size()), s.workers, task);

  if (cache && cache->lambda() == contour.lambda())
    for (size_t i = 0; i < nodes.size(); ++i)
      if (!from_cache[i]) cache->store(nodes[i], nf, solved[i]);

  // Per observation point, node-major -> full spectrum.
  std::vector<std::vector<cplx>> full(nobs, std::vector<cplx>(static_cast<size_t>(nf)));
  std::vector<cplx> half(nodes.size());
  for (size_t p = 0; p < nobs; ++p) {
    if (s.spectrum == SpectrumMode::half) {
      for (size_t i = 0; i < nodes.size(); ++i) half[i] = solved[i][p];
      full[p] = expand_half_spectrum(half, contour).values;
    } else {
      for (size_t i = 0; i < nodes.size(); ++i) full[p][static_cast<size_t>(nodes[i] - 1)] = solved[i][p];
    }
  }
  return full;
}

/// Inverts per-point spectra into a real time-domain field.
inline TimeDomainField invert_spectra(const std::vector<std::vector<cplx>>& spectra, const std::vector<Vec3>& points,
                                      const ContourSpec& contour, const TimeGrid& grid) {
  const int nt = grid.n_steps();
  check_inversion(contour, nt);
  TimeDomainField f;
  f.grid = grid;
  f.points = points;
  f.n_freq = contour.n_freq();
  f.values.assign(static_cast<size_t>(nt), std::vector<double>(points.size(), 0.0));
  Dft dft(contour.n_freq(), -1);
  double umax = 0.0, imax = 0.0;
  for (size_t p = 0; p < points.size(); ++p) {
    const auto u = inverse_ztransform_values(spectra[p], contour, nt, dft);
    for (int n = 0; n < nt; ++n) {
      f.values[static_cast<size_t>(n)][p] = u[static_cast<size_t>(n)].real();
      umax = std::max(umax, std::abs(u[static_cast<size_t>(n)].real()));
      imax = std::max(imax, std::abs(u[static_cast<size_t>(n)].imag()));
    }
  }
  f.imag_residue = umax > 0 ? imax / umax : imax;
  if (f.imag_residue > 1e-8)
    diag::emit("inverse transform left an imaginary residue of " + std::to_string(f.imag_residue) +
               " relative to max|u|; the discrete operator is not conjugation symmetric");
  return f;
}

inline TimeDomainField run_cq(const FrequencyBackend& backend, const BoundaryFunction& g, CqSettings s,
                              NodeCache* cache = nullptr) {
  s.contour = avoid_defective_nodes(s.contour, s.rule);
  const auto spectra = solve_all_nodes(backend, g, s, cache);
  return invert_spectra(spectra, backend.observation_points(), s.contour, s.grid);
}

// ---------------------------------------------------------------------------
// Synthetic mode: U(z) = numerator(z) / denominator(z), no solves.

inline cplx eval_poly(std::span<const cplx> c, cplx z) {
  cplx acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
  return acc;
}

/// Taylor coefficients of numerator/denominator by series division.
inline std::vector<cplx> rational_taylor(std::span<const cplx> num, std::span<const cplx> den, long count) {
  if (den.empty() || den[0] == 0.0) throw DomainError("denominator must be nonzero at z = 0");
  std::vector<cplx> c(static_cast<size_t>(count), 0.0);
  for (long n = 0; n < count; ++n) {
    cplx acc = n < static_cast<long>(num.size()) ? num[static_cast<size_t>(n)] : cplx(0.0);
    for (long i = 1; i <= std::min<long>(n, static_cast<long>(den.size()) - 1); ++i)
      acc -= den[static_cast<size_t>(i)] * c[static_cast<size_t>(n - i)];
    c[static_cast<size_t>(n)] = acc / den[0];
  }
  return c;
}

inline TimeDomainField run_synthetic(std::span<const cplx> num, std::span<const cplx> den, const ContourSpec& contour,
                                     const TimeGrid& grid, SpectrumMode spectrum = SpectrumMode::half) {
  const int nf = contour.n_freq();
  std::vector<std::vector<cplx>> spectra(1, std::vector<cplx>(static_cast<size_t>(nf)));
  if (spectrum == SpectrumMode::half) {
    const auto idx = half_spectrum_indices(nf);
    std::vector<cplx> half;
    for (int k : idx) half.push_back(eval_poly(num, contour.node(k)) / eval_poly(den, contour.node(k)));
    spectra[0] = expand_half_spectrum(half, contour).values;
  } else {
    for (int k = 1; k <= nf; ++k)
      spectra[0][static_cast<size_t>(k - 1)] = eval_poly(num, contour.node(k)) / eval_poly(den, contour.node(k));
  }
  return invert_spectra(spectra, {{0.0, 0.0, 0.0}}, contour, grid);
}

// ---------------------------------------------------------------------------
// Config-driven entry points.

inline BoundaryFunction boundary_function(const RunConfig& cfg) {
  if (cfg.boundary_data.kind == DataKindConfig::polynomial_pulse) {
    const auto q = cfg.boundary_data.pulse;
    return [q](double t, const Vec3&) { return polynomial_pulse(q, t); };
  }
  auto b = cfg.boundary_data.beam;
  b.c = cfg.c;
  return [b](double t, const Vec3& x) { return gaussian_beam(b, t, x); };
}

inline int sphere_grid_degree(const RunConfig& cfg) {
  if (cfg.geometry.grid_degree > 0) return cfg.geometry.grid_degree;
  if (cfg.boundary_data.kind == DataKindConfig::polynomial_pulse) return 8;  // data is constant on the sphere
  const double kdata = 2.0 * std::numbers::pi * cfg.boundary_data.beam.f / cfg.c;
  return std::max(16, static_cast<int>(std::ceil(kdata)) + 16);
}

inline SurfaceMesh config_mesh(const RunConfig& cfg) {
  if (cfg.geometry.kind == GeometryKind::mesh) return load_mesh(cfg.geometry.mesh_path);
  return icosphere(cfg.geometry.subdivisions);
}

/// Observation points that a back end can evaluate; others are dropped with a notice.
inline std::vector<Vec3> usable_points(const RunConfig& cfg, const BemDiscretization* bem) {
  std::vector<Vec3> kept;
  int dropped = 0;
  for (const auto& p : observation_points(cfg.observation)) {
    const bool ok = bem ? bem->is_evaluable(p) : norm(p) >= 1.0;
    if (ok) kept.push_back(p);
    else ++dropped;
  }
  if (dropped > 0)
    diag::emit("dropped " + std::to_string(dropped) + " observation point(s) too close to or inside the boundary");
  return kept;
}

/// Everything a run needs that does not depend on the contour.
struct PreparedRun {
  RunConfig config;
  std::unique_ptr<FrequencyBackend> backend;
  std::shared_ptr<const BemDiscretization> bem;
  BoundaryFunction g;
};

inline PreparedRun prepare_run(const RunConfig& cfg) {
  validate(cfg);
  PreparedRun r;
  r.config = cfg;
  if (cfg.geometry.kind == GeometryKind::synthetic) return r;
  r.g = boundary_function(cfg);
  if (cfg.uses_bem()) {
    r.bem = std::make_shared<const BemDiscretization>(config_mesh(cfg));
    r.backend = std::make_unique<BemBackend>(r.bem, *cfg.formulation, usable_points(cfg, r.bem.get()));
  } else {
    r.backend = std::make_unique<SphereBackend>(sphere_grid_degree(cfg), usable_points(cfg, nullptr));
  }
  return r;
}

inline TimeDomainField run_prepared(const PreparedRun& r, int n_freq, NodeCache* cache = nullptr) {
  const auto& cfg = r.config;
  const ContourSpec contour(cfg.lambda, n_freq);
  if (cfg.geometry.kind == GeometryKind::synthetic)
    return run_synthetic(cfg.geometry.numerator, cfg.geometry.denominator, contour, cfg.time_grid(), cfg.spectrum);
  CqSettings s{cfg.time_grid(), contour, cfg.time_rule(), cfg.spectrum, effective_workers(cfg)};
  return run_cq(*r.backend, r.g, s, cache);
}

inline TimeDomainField run_cq(const RunConfig& cfg) {
  const auto r = prepare_run(cfg);
  return run_prepared(r, cfg.n_freq);
}

// ---------------------------------------------------------------------------
// Error metrics and convergence studies.

inline double abs_diff(const TimeDomainField& a, const TimeDomainField& b) {
  if (a.n_steps() != b.n_steps() || a.n_points() != b.n_points())
    throw InvalidArgument("fields have different shapes");
  double m = 0.0;
  for (int n = 0; n < a.n_steps(); ++n)
    for (int p = 0; p < a.n_points(); ++p)
      m = std::max(m, std::abs(a.values[static_cast<size_t>(n)][static_cast<size_t>(p)] -
                               b.values[static_cast<size_t>(n)][static_cast<size_t>(p)]));
  return m;
}

inline double max_abs(const TimeDomainField& a) {
  double m = 0.0;
  for (const auto& row : a.values)
    for (double v : row) m = std::max(m, std::abs(v));
  return m;
}

/// Poles relevant to a run, mapped to the z-plane; empty when no atlas applies.
struct RunAtlas {
  std::vector<PoleEntry> entries;
  double lambda_G = std::numeric_limits<double>::infinity();
  bool available = false;
  std::optional<cplx> defective_k;  // advisory for Radau IIa runs
};

inline bool is_unit_sphere_mesh(const SurfaceMesh& m) {
  for (const auto& v : m.vertices())
    if (std::abs(norm(v) - 1.0) > 1e-6) return false;
  return true;
}

inline RunAtlas run_atlas(const RunConfig& cfg, const SurfaceMesh* mesh = nullptr, const SphereAtlasOptions& opt = {}) {
  RunAtlas a;
  const auto grid = cfg.time_grid();
  const auto rule = cfg.time_rule();
  if (rule.is_rk())
    a.defective_k = I * (radau2_defective_point() + 2.0) / grid.c_dt();
  if (cfg.geometry.kind == GeometryKind::synthetic) {
    // Poles of U are the denominator roots.
    const auto& d = cfg.geometry.denominator;
    size_t deg = d.size() - 1;
    while (deg > 0 && d[deg] == 0.0) --deg;
    if (deg > 0) {
      MatrixXc C = MatrixXc::Zero(static_cast<Eigen::Index>(deg), static_cast<Eigen::Index>(deg));
      for (size_t i = 1; i < deg; ++i) C(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
      for (size_t i = 0; i < deg; ++i) C(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(deg - 1)) = -d[i] / d[deg];
      Eigen::ComplexEigenSolver<MatrixXc> es(C, false);
      for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const cplx z = es.eigenvalues()(i);
        a.entries.push_back({std::numeric_limits<double>::quiet_NaN(), PoleKind::scattering, 0, z, std::abs(z)});
      }
    }
    a.available = true;
    return a;
  }
  if (cfg.boundary_data.kind == DataKindConfig::polynomial_pulse)
    a.lambda_G = data_analyticity_radius(DataKind::exponential_envelope, cfg.boundary_data.pulse.p, grid);
  else
    a.lambda_G = data_analyticity_radius(DataKind::gaussian_beam, 0.0, grid);
  const bool analytic = cfg.geometry.kind == GeometryKind::sphere_analytic;
  if (!analytic) {
    if (cfg.geometry.kind == GeometryKind::mesh) {
      if (!mesh) {
        const auto m = load_mesh(cfg.geometry.mesh_path);
        if (!is_unit_sphere_mesh(m)) return a;
      } else if (!is_unit_sphere_mesh(*mesh)) {
        return a;
      }
    }
  }
  const auto poles = sphere_poles(cfg.formulation.value_or(Formulation::first_kind()), analytic, opt);
  a.entries = map_entries(poles, rule, grid);
  a.available = true;
  return a;
}

inline double predicted_rate_for(const RunConfig& cfg, const RunAtlas& a) {
  if (!a.available || (a.entries.empty() && !std::isfinite(a.lambda_G))) return std::numeric_limits<double>::quiet_NaN();
  const auto rep = analyticity_report(a.entries, a.lambda_G);
  if (!(cfg.lambda < rep.lambda_U)) {
    diag::emit("contour radius " + std::to_string(cfg.lambda) + " is not inside the predicted analyticity radius " +
               std::to_string(rep.lambda_U) + "; no rate prediction");
    return std::numeric_limits<double>::quiet_NaN();
  }
  return predicted_rate(cfg.lambda, rep.lambda_U);
}

struct ConvergenceRow {
  int n_freq;
  double abs_diff;
};

struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;
  int reference_n_freq = 0;
  double floor = 0.0;
  double fitted_rate = std::numeric_limits<double>::quiet_NaN();
  double predicted_rate = std::numeric_limits<double>::quiet_NaN();
  int fit_points = 0;
};

/// exp(slope) of a least-squares line through (nf, ln abs_diff), using points at least 100x above the floor.
inline std::pair<double, int> fit_rate(const std::vector<ConvergenceRow>& rows, double floor) {
  std::vector<double> xs, ys;
  for (const auto& r : rows)
    if (r.abs_diff >= 100.0 * floor && r.abs_diff > 0) {
      xs.push_back(r.n_freq);
      ys.push_back(std::log(r.abs_diff));
    }
  const int n = static_cast<int>(xs.size());
  if (n < 3) {
    diag::emit("rate fit unavailable: only " + std::to_string(n) + " point(s) above the accuracy floor");
    return {std::numeric_limits<double>::quiet_NaN(), n};
  }
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0, sxx = 0;
  for (int i = 0; i < n; ++i) {
    sxy += (xs[static_cast<size_t>(i)] - mx) * (ys[static_cast<size_t>(i)] - my);
    sxx += (xs[static_cast<size_t>(i)] - mx) * (xs[static_cast<size_t>(i)] - mx);
  }
  return {std::exp(sxy / sxx), n};
}

inline ConvergenceResult convergence_study(const PreparedRun& r, std::vector<int> nf_list, int reference_nf = 0) {
  if (nf_list.empty()) throw InvalidArgument("convergence study needs at least one Nf");
  if (!std::is_sorted(nf_list.begin(), nf_list.end())) throw InvalidArgument("Nf list must be increasing");
  if (nf_list.front() < 1) throw InvalidArgument("Nf values must be >= 1");
  const int nmax = nf_list.back();
  if (reference_nf == 0) reference_nf = 4 * nmax;
  if (reference_nf < 4 * nmax) throw InvalidArgument("reference Nf must be at least 4x the largest studied Nf");
  const auto& cfg = r.config;
  NodeCache cache(cfg.lambda);
  const auto ref = run_prepared(r, reference_nf, &cache);
  ConvergenceResult out;
  out.reference_n_freq = ref.n_freq;
  out.floor = 1e-14 * std::pow(cfg.lambda, -static_cast<double>(cfg.n_steps - 1)) * max_abs(ref);
  for (int nf : nf_list) {
    const auto f = run_prepared(r, nf, &cache);
    out.rows.push_back({nf, abs_diff(f, ref)});
  }
  std::tie(out.fitted_rate, out.fit_points) = fit_rate(out.rows, out.floor);
  const SurfaceMesh* mesh = r.bem ? &r.bem->mesh() : nullptr;
  out.predicted_rate = predicted_rate_for(cfg, run_atlas(cfg, mesh));
  return out;
}

inline ConvergenceResult convergence_study(const RunConfig& cfg, std::vector<int> nf_list, int reference_nf = 0) {
  return convergence_study(prepare_run(cfg), std::move(nf_list), reference_nf);
}

}  // namespace cqwave
