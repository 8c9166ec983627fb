#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "cqwave/contour.hpp"
#include "cqwave/diagnostics.hpp"
#include "cqwave/errors.hpp"
#include "cqwave/formulation.hpp"
#include "cqwave/mesh.hpp"
#include "cqwave/radau.hpp"

namespace cqwave {

inline constexpr double kInv4Pi = 1.0 / (4.0 * std::numbers::pi);

/// e^{-omega r} / (4 pi r).
inline cplx green_kernel(cplx omega, const Vec3& x, const Vec3& y) {
  const double r = norm(x - y);
  if (r == 0.0) throw DomainError("Green's function is singular at coincident points");
  return std::exp(-omega * r) * (kInv4Pi / r);
}

enum class Layer { single, double_ };

namespace detail {

// Dunavant degree-5 rule: barycentric (l1, l2) and weights summing to 1.
struct TriRule {
  std::array<std::array<double, 2>, 7> bary;
  std::array<double, 7> w;
};

inline const TriRule& dunavant7() {
  static const TriRule r = [] {
    const double a1 = 0.059715871789770, b1 = 0.470142064105115, w1 = 0.132394152788506;
    const double a2 = 0.797426985353087, b2 = 0.101286507323456, w2 = 0.125939180544827;
    TriRule t;
    t.bary = {{{1.0 / 3.0, 1.0 / 3.0}, {a1, b1}, {b1, a1}, {b1, b1}, {a2, b2}, {b2, a2}, {b2, b2}}};
    t.w = {0.225, w1, w1, w1, w2, w2, w2};
    return t;
  }();
  return r;
}

struct QuadPoint {
  Vec3 y;
  double w;  // includes the panel area
};

inline void panel_rule(const Vec3& a, const Vec3& b, const Vec3& c, int levels, std::vector<QuadPoint>& out) {
  if (levels > 0) {
    const Vec3 ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
    panel_rule(a, ab, ca, levels - 1, out);
    panel_rule(ab, b, bc, levels - 1, out);
    panel_rule(ca, bc, c, levels - 1, out);
    panel_rule(ab, bc, ca, levels - 1, out);
    return;
  }
  const auto& r = dunavant7();
  const double area = 0.5 * norm(cross(b - a, c - a));
  for (int q = 0; q < 7; ++q) {
    const double l1 = r.bary[static_cast<size_t>(q)][0], l2 = r.bary[static_cast<size_t>(q)][1];
    out.push_back({l1 * a + l2 * b + (1.0 - l1 - l2) * c, r.w[static_cast<size_t>(q)] * area});
  }
}

// Refinement depth for a target at relative distance rho = |x - centroid| / diameter.
inline int refinement_levels(double rho) {
  if (rho < 0.75) return 3;
  if (rho < 1.5) return 2;
  if (rho < 3.0) return 1;
  return 0;
}

// Integral of 1/|x - y| over the flat triangle (a, b, c), x in its plane and interior.
inline double inverse_distance_integral(const Vec3& x, const Vec3& a, const Vec3& b, const Vec3& c) {
  double total = 0.0;
  const std::array<Vec3, 3> v = {a, b, c};
  for (int e = 0; e < 3; ++e) {
    const Vec3& p = v[static_cast<size_t>(e)];
    const Vec3& q = v[static_cast<size_t>((e + 1) % 3)];
    const Vec3 t = q - p;
    const double len = norm(t);
    const Vec3 u = (1.0 / len) * t;
    const double s1 = dot(p - x, u);
    const double s2 = dot(q - x, u);
    const double h = norm((p - x) - s1 * u);
    if (h < 1e-300) continue;
    total += h * (std::asinh(s2 / h) - std::asinh(s1 / h));
  }
  return total;
}

// e^{-omega r} split into modulus and phase by hand; faster than std::exp(cplx).
inline cplx exp_neg(cplx omega, double r) {
  const double m = std::exp(-omega.real() * r);
  const double ph = -omega.imag() * r;
  return {m * std::cos(ph), m * std::sin(ph)};
}

}  // namespace detail

/// Precomputed panel quadrature for one mesh; the frequency enters only through the kernel.
class BemDiscretization {
 public:
  explicit BemDiscretization(SurfaceMesh mesh) : mesh_(std::move(mesh)) {
    mesh_.require_closed();
    const int n = mesh_.size();
    far_.reserve(static_cast<size_t>(n) * 7);
    for (int j = 0; j < n; ++j) {
      const auto [a, b, c] = mesh_.corners(j);
      detail::panel_rule(a, b, c, 0, far_);
      self_static_.push_back(kInv4Pi * detail::inverse_distance_integral(mesh_.centroid(j), a, b, c));
    }
    // Near pairs (target i, source j) get a subdivided rule.
    near_offset_.assign(static_cast<size_t>(n) + 1, 0);
    for (int i = 0; i < n; ++i) {
      near_offset_[static_cast<size_t>(i)] = static_cast<int>(near_src_.size());
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const double rho = norm(mesh_.centroid(i) - mesh_.centroid(j)) / mesh_.diameter(j);
        const int lv = detail::refinement_levels(rho);
        if (lv == 0) continue;
        const auto [a, b, c] = mesh_.corners(j);
        near_src_.push_back(j);
        near_pts_offset_.push_back(static_cast<int>(near_pts_.size()));
        detail::panel_rule(a, b, c, lv, near_pts_);
      }
    }
    near_offset_[static_cast<size_t>(n)] = static_cast<int>(near_src_.size());
    near_pts_offset_.push_back(static_cast<int>(near_pts_.size()));
  }

  const SurfaceMesh& mesh() const noexcept { return mesh_; }
  int size() const noexcept { return mesh_.size(); }

  /// Returns alpha*I + beta_d*K + beta_s*S (collocation at centroids).
  MatrixXc assemble(cplx omega, cplx alpha, cplx beta_s, cplx beta_d) const {
    const int n = size();
    MatrixXc M(n, n);
    const bool want_s = beta_s != 0.0, want_d = beta_d != 0.0;
    std::vector<char> is_near(static_cast<size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
      const Vec3 x = mesh_.centroid(i);
      const int nb = near_offset_[static_cast<size_t>(i)], ne = near_offset_[static_cast<size_t>(i) + 1];
      for (int t = nb; t < ne; ++t) is_near[static_cast<size_t>(near_src_[static_cast<size_t>(t)])] = 1;
      for (int j = 0; j < n; ++j) {
        cplx entry = 0.0;
        if (j == i) {
          if (want_s) entry += beta_s * self_single(j, omega);
          entry += alpha;  // flat panel: double-layer self term vanishes
        } else if (!is_near[static_cast<size_t>(j)]) {
          entry = panel_sum(x, j, omega, &far_[static_cast<size_t>(j) * 7], 7, want_s, want_d, beta_s, beta_d);
        }
        M(i, j) = entry;
      }
      for (int t = nb; t < ne; ++t) {
        const int j = near_src_[static_cast<size_t>(t)];
        const int p0 = near_pts_offset_[static_cast<size_t>(t)], p1 = near_pts_offset_[static_cast<size_t>(t) + 1];
        M(i, j) = panel_sum(x, j, omega, &near_pts_[static_cast<size_t>(p0)], p1 - p0, want_s, want_d, beta_s, beta_d);
        is_near[static_cast<size_t>(j)] = 0;
      }
    }
    return M;
  }

  /// Single-layer self entry: analytic static part plus quadrature of the bounded remainder.
  cplx self_single(int j, cplx omega) const {
    cplx rem = 0.0;
    const Vec3& x = mesh_.centroid(j);
    for (int q = 0; q < 7; ++q) {
      const auto& qp = far_[static_cast<size_t>(j) * 7 + static_cast<size_t>(q)];
      const double r = norm(x - qp.y);
      const cplx f = r < 1e-12 * mesh_.diameter(j) ? -omega : (detail::exp_neg(omega, r) - 1.0) / r;
      rem += qp.w * f;
    }
    return self_static_[static_cast<size_t>(j)] + kInv4Pi * rem;
  }

  /// Single- and double-layer potentials of panel densities at exterior points.
  /// Points closer than half a panel diameter to a panel are rejected.
  void potentials(std::span<const Vec3> points, std::span<const cplx> phi, cplx omega, std::vector<cplx>* single,
                  std::vector<cplx>* dbl) const {
    if (static_cast<int>(phi.size()) != size()) throw InvalidArgument("density length does not match the mesh");
    if (single) single->assign(points.size(), 0.0);
    if (dbl) dbl->assign(points.size(), 0.0);
    std::vector<detail::QuadPoint> refined;
    for (size_t p = 0; p < points.size(); ++p) {
      const Vec3& x = points[p];
      cplx s = 0.0, d = 0.0;
      for (int j = 0; j < size(); ++j) {
        if (phi[static_cast<size_t>(j)] == 0.0) continue;
        const double rho = near_distance_ratio(x, j);
        const detail::QuadPoint* pts = &far_[static_cast<size_t>(j) * 7];
        int npts = 7;
        const int lv = detail::refinement_levels(rho);
        if (lv > 0) {
          refined.clear();
          const auto [a, b, c] = mesh_.corners(j);
          detail::panel_rule(a, b, c, lv + 1, refined);
          pts = refined.data();
          npts = static_cast<int>(refined.size());
        }
        cplx ps = 0.0, pd = 0.0;
        kernel_sums(x, j, omega, pts, npts, ps, pd);
        s += ps * phi[static_cast<size_t>(j)];
        d += pd * phi[static_cast<size_t>(j)];
      }
      if (single) (*single)[p] = s;
      if (dbl) (*dbl)[p] = d;
    }
  }

  /// Smallest distance-to-diameter ratio over panels; throws for points too close to the surface.
  void check_exterior(const Vec3& x) const {
    for (int j = 0; j < size(); ++j)
      if (near_distance_ratio(x, j) < kMinDistanceRatio)
        throw DomainError("observation point is too close to the surface for panel quadrature");
  }
  bool is_evaluable(const Vec3& x) const {
    for (int j = 0; j < size(); ++j)
      if (near_distance_ratio(x, j) < kMinDistanceRatio) return false;
    return true;
  }

  static constexpr double kMinDistanceRatio = 0.5;

 private:
  double near_distance_ratio(const Vec3& x, int j) const {
    // Distance to the panel plane is a cheap lower bound that is exact above the panel interior.
    const double dc = norm(x - mesh_.centroid(j));
    const double diam = mesh_.diameter(j);
    if (dc > 3.0 * diam) return dc / diam;
    return point_triangle_distance(x, j) / diam;
  }

  double point_triangle_distance(const Vec3& x, int j) const {
    const auto [a, b, c] = mesh_.corners(j);
    // Closest point on triangle (Ericson, Real-Time Collision Detection 5.1.5).
    const Vec3 ab = b - a, ac = c - a, ap = x - a;
    const double d1 = dot(ab, ap), d2 = dot(ac, ap);
    if (d1 <= 0 && d2 <= 0) return norm(ap);
    const Vec3 bp = x - b;
    const double d3 = dot(ab, bp), d4 = dot(ac, bp);
    if (d3 >= 0 && d4 <= d3) return norm(bp);
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0 && d1 >= 0 && d3 <= 0) return norm(x - (a + (d1 / (d1 - d3)) * ab));
    const Vec3 cp = x - c;
    const double d5 = dot(ab, cp), d6 = dot(ac, cp);
    if (d6 >= 0 && d5 <= d6) return norm(cp);
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0 && d2 >= 0 && d6 <= 0) return norm(x - (a + (d2 / (d2 - d6)) * ac));
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0)
      return norm(x - (b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b)));
    const double den = 1.0 / (va + vb + vc);
    return norm(x - (a + (vb * den) * ab + (vc * den) * ac));
  }

  void kernel_sums(const Vec3& x, int j, cplx omega, const detail::QuadPoint* pts, int npts, cplx& s, cplx& d) const {
    const Vec3& n = mesh_.normal(j);
    for (int q = 0; q < npts; ++q) {
      const Vec3 diff = x - pts[q].y;
      const double r = norm(diff);
      const cplx e = detail::exp_neg(omega, r) * (pts[q].w * kInv4Pi / r);
      s += e;
      d += e * ((1.0 + omega * r) * dot(diff, n) / (r * r));
    }
  }

  cplx panel_sum(const Vec3& x, int j, cplx omega, const detail::QuadPoint* pts, int npts, bool want_s, bool want_d,
                 cplx beta_s, cplx beta_d) const {
    const Vec3& n = mesh_.normal(j);
    cplx s = 0.0, d = 0.0;
    for (int q = 0; q < npts; ++q) {
      const Vec3 diff = x - pts[q].y;
      const double r2 = dot(diff, diff);
      const double r = std::sqrt(r2);
      const cplx e = detail::exp_neg(omega, r) * (pts[q].w * kInv4Pi / r);
      if (want_s) s += e;
      if (want_d) d += e * ((1.0 + omega * r) * (dot(diff, n) / r2));
    }
    return beta_s * s + beta_d * d;
  }

  SurfaceMesh mesh_;
  std::vector<detail::QuadPoint> far_;
  std::vector<double> self_static_;
  std::vector<int> near_offset_;
  std::vector<int> near_src_;
  std::vector<int> near_pts_offset_;
  std::vector<detail::QuadPoint> near_pts_;
};

inline MatrixXc assemble_layer(const BemDiscretization& bem, cplx omega, Layer which) {
  return which == Layer::single ? bem.assemble(omega, 0.0, 1.0, 0.0) : bem.assemble(omega, 0.0, 0.0, 1.0);
}

/// first-kind: S; second-kind: I/2 + K; combined: I/2 + K + eta S.
inline MatrixXc formulation_matrix(const BemDiscretization& bem, cplx omega, const Formulation& f) {
  switch (f.kind) {
    case FormulationKind::first_kind: return bem.assemble(omega, 0.0, 1.0, 0.0);
    case FormulationKind::second_kind: return bem.assemble(omega, 0.5, 0.0, 1.0);
    default: return bem.assemble(omega, 0.5, f.eta_at(omega), 1.0);
  }
}

struct DensitySolution {
  cplx omega;
  Formulation formulation;
  VectorXc phi;
  double residual = 0.0;  // ||A phi - G|| / ||G||
  double rcond = 1.0;
};

inline constexpr double kSingularRcond = 1e-12;

inline DensitySolution solve_density(const MatrixXc& A, const VectorXc& rhs, cplx omega = 0.0,
                                     Formulation f = Formulation::first_kind()) {
  if (A.rows() != A.cols()) throw InvalidArgument("system matrix must be square");
  if (A.rows() != rhs.size()) throw InvalidArgument("right-hand side length does not match the matrix");
  Eigen::PartialPivLU<MatrixXc> lu(A);
  double rc = lu.rcond();
  if (std::isnan(rc)) rc = 0.0;  // exactly singular pivots
  if (!(rc >= kSingularRcond))
    throw SingularMatrixError("system matrix is singular to working precision at omega = (" +
                                  std::to_string(omega.real()) + ", " + std::to_string(omega.imag()) + ")",
                              rc);
  DensitySolution out{omega, f, lu.solve(rhs), 0.0, rc};
  const double rn = rhs.norm();
  out.residual = rn > 0 ? (A * out.phi - rhs).norm() / rn : (A * out.phi).norm();
  return out;
}

/// first-kind: S phi; second-kind: K phi; combined: K phi + eta S phi.
inline std::vector<cplx> evaluate_potential(const BemDiscretization& bem, const DensitySolution& sol,
                                            std::span<const Vec3> points) {
  for (const auto& x : points) bem.check_exterior(x);
  const Formulation& f = sol.formulation;
  std::vector<cplx> s, d;
  std::span<const cplx> phi(sol.phi.data(), static_cast<size_t>(sol.phi.size()));
  bem.potentials(points, phi, sol.omega, f.uses_single_layer() ? &s : nullptr, f.uses_double_layer() ? &d : nullptr);
  std::vector<cplx> u(points.size(), 0.0);
  const cplx eta = f.kind == FormulationKind::first_kind ? cplx(1.0) : f.eta_at(sol.omega);
  for (size_t p = 0; p < points.size(); ++p) {
    if (f.uses_double_layer()) u[p] += d[p];
    if (f.uses_single_layer()) u[p] += eta * s[p];
  }
  return u;
}

/// p(omega) = 1 / sigma_min(C A C), C = diag(sqrt(area)). Infinity when sigma_min underflows.
inline double inverse_norm(const MatrixXc& A, std::span<const double> areas) {
  const auto n = A.rows();
  Eigen::VectorXd c(n);
  for (Eigen::Index i = 0; i < n; ++i) c(i) = std::sqrt(areas[static_cast<size_t>(i)]);
  const MatrixXc B = c.asDiagonal() * A * c.asDiagonal();
  Eigen::BDCSVD<MatrixXc> svd(B);
  const double smin = svd.singularValues()(n - 1);
  return smin > 0 ? 1.0 / smin : std::numeric_limits<double>::infinity();
}

inline std::vector<double> inverse_norm_scan(const BemDiscretization& bem, const Formulation& f,
                                             std::span<const cplx> omegas) {
  std::vector<double> p;
  p.reserve(omegas.size());
  for (const cplx w : omegas) {
    const double v = inverse_norm(formulation_matrix(bem, w, f), bem.mesh().areas());
    if (!std::isfinite(v)) diag::emit("inverse-norm scan: sigma_min underflow at omega = " + std::to_string(w.imag()) + "i");
    p.push_back(v);
  }
  return p;
}

}  // namespace cqwave
