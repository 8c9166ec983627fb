#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "cqwave/contour.hpp"
#include "cqwave/errors.hpp"

namespace cqwave {

using MatrixXc = Eigen::MatrixXcd;
using VectorXc = Eigen::VectorXcd;

/// Butcher tableau (A, b, c) of an m-stage Runge-Kutta rule.
struct RKTableau {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  std::string name;

  int stages() const { return static_cast<int>(b.size()); }

  /// Last row of A equals b, so the last stage is the step value.
  bool stiffly_accurate() const {
    const int m = stages();
    for (int j = 0; j < m; ++j)
      if (A(m - 1, j) != b(j)) return false;
    return true;
  }

  static RKTableau radau2a() {
    RKTableau t;
    t.A.resize(2, 2);
    t.A << 5.0 / 12.0, -1.0 / 12.0, 3.0 / 4.0, 1.0 / 4.0;
    t.b.resize(2);
    t.b << 3.0 / 4.0, 1.0 / 4.0;
    t.c.resize(2);
    t.c << 1.0 / 3.0, 1.0;
    t.name = "radau2a";
    return t;
  }

  /// Stability function R(s) = 1 + s b^T (I - s A)^-1 1.
  cplx stability_function(cplx s) const {
    const int m = stages();
    MatrixXc M = MatrixXc::Identity(m, m) - s * A.cast<cplx>();
    VectorXc y = M.partialPivLu().solve(VectorXc::Ones(m));
    return 1.0 + s * b.cast<cplx>().dot(y);
  }
};

/// The point where the 2-stage Radau IIa stage matrix has a double eigenvalue.
inline double radau2_defective_point() { return 3.0 * std::sqrt(3.0) - 5.0; }

/// Delta(z) = (A + z/(1-z) 1 b^T)^-1, via LU with partial pivoting.
inline MatrixXc delta_matrix(const RKTableau& tab, cplx z) {
  if (z == 1.0) throw DomainError("Delta(z) is undefined at z = 1");
  const int m = tab.stages();
  const cplx w = z / (1.0 - z);
  MatrixXc inner = tab.A.cast<cplx>() + w * VectorXc::Ones(m) * tab.b.cast<cplx>().transpose();
  Eigen::PartialPivLU<MatrixXc> lu(inner);
  MatrixXc delta = lu.solve(MatrixXc::Identity(m, m));
  const double residual = (inner * delta - MatrixXc::Identity(m, m)).norm();
  if (!std::isfinite(residual) || residual > 1e-10)
    throw SingularMatrixError("stage matrix A + z/(1-z) 1 b^T is singular at z = (" + std::to_string(z.real()) +
                                  ", " + std::to_string(z.imag()) + ")",
                              lu.rcond());
  return delta;
}

struct RadauEigenvalues {
  cplx gamma1;
  cplx gamma2;
};

/// Closed-form eigenvalues of Delta(z) for 2-stage Radau IIa (principal square root).
inline RadauEigenvalues radau2_eigenvalues(cplx z) {
  // z^2 + 10z - 2 in factored form, so the discriminant vanishes exactly at the defective point.
  const cplx root = std::sqrt((z - radau2_defective_point()) * (z + 5.0 + 3.0 * std::sqrt(3.0)));
  return {2.0 + z - root, 2.0 + z + root};
}

/// Delta(z) = P diag(gamma) P^-1.
struct StageDecomposition {
  VectorXc gamma;
  MatrixXc P;
  MatrixXc P_inv;
  double condition = 1.0;   // ||P||_2 ||P^-1||_2
  double residual = 0.0;    // ||P D P^-1 - Delta||_F / ||Delta||_F
};

/// Relative eigenvalue gap below which Delta(z) is treated as non-diagonalizable.
inline constexpr double kDefectiveGap = 1e-8;

namespace detail {

// Unit Euclidean norm, first nonzero component real positive.
inline VectorXc normalize_eigenvector(VectorXc v) {
  v /= v.norm();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-14) {
      v *= std::conj(v(i)) / std::abs(v(i));
      v(i) = std::abs(v(i));
      break;
    }
  }
  return v;
}

inline double spectral_norm(const MatrixXc& M) {
  Eigen::JacobiSVD<MatrixXc> svd(M);
  return svd.singularValues()(0);
}

}  // namespace detail

inline StageDecomposition stage_decomposition(const RKTableau& tab, cplx z) {
  const MatrixXc delta = delta_matrix(tab, z);
  const int m = tab.stages();
  StageDecomposition out;
  out.gamma.resize(m);
  out.P.resize(m, m);

  if (tab.name == "radau2a" && m == 2) {
    const auto [g1, g2] = radau2_eigenvalues(z);
    if (std::abs(g1 - g2) < kDefectiveGap * std::abs(g1))
      throw DefectivePointError("Delta(z) is not diagonalizable near z = 3 sqrt(3) - 5; perturb the contour");
    out.gamma << g1, g2;
    for (int j = 0; j < 2; ++j) {
      const cplx g = out.gamma(j);
      // Null vector of [[d11-g, d12],[d21, d22-g]]: take the better-scaled row.
      VectorXc a(2), b(2);
      a << delta(0, 1), g - delta(0, 0);
      b << g - delta(1, 1), delta(1, 0);
      out.P.col(j) = detail::normalize_eigenvector(a.norm() >= b.norm() ? a : b);
    }
  } else {
    Eigen::ComplexEigenSolver<MatrixXc> es(delta);
    if (es.info() != Eigen::Success) throw ConvergenceError("eigendecomposition of Delta(z) failed");
    out.gamma = es.eigenvalues();
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j)
        if (std::abs(out.gamma(i) - out.gamma(j)) < kDefectiveGap * std::abs(out.gamma(i)))
          throw DefectivePointError("Delta(z) has a (near) multiple eigenvalue; perturb the contour");
    for (int j = 0; j < m; ++j) out.P.col(j) = detail::normalize_eigenvector(es.eigenvectors().col(j));
  }

  out.P_inv = out.P.partialPivLu().inverse();
  const MatrixXc recomposed = out.P * out.gamma.asDiagonal() * out.P_inv;
  out.residual = (recomposed - delta).norm() / delta.norm();
  out.condition = detail::spectral_norm(out.P) * detail::spectral_norm(out.P_inv);
  return out;
}

/// G_j(z) = sum_n g(t_n + c_j dt) z^n for each stage j; samples[j][n] = g(t_n + c_j dt).
inline VectorXc stage_boundary_transform(std::span<const std::vector<double>> samples, cplx z) {
  VectorXc out(static_cast<Eigen::Index>(samples.size()));
  for (size_t j = 0; j < samples.size(); ++j) {
    cplx acc = 0.0;
    for (auto it = samples[j].rbegin(); it != samples[j].rend(); ++it) acc = acc * z + *it;
    out(static_cast<Eigen::Index>(j)) = acc;
  }
  return out;
}

/// Dirichlet data of the decoupled stage problems: P^-1 G.
inline VectorXc mix_stage_data(const MatrixXc& P_inv, const VectorXc& G) {
  if (P_inv.cols() != G.size()) throw InvalidArgument("stage mixing shape mismatch");
  return P_inv * G;
}

/// U_d(z) = z sum_j P_(m,j) W_j, valid for stiffly accurate tableaus.
inline cplx recombine_solution(const MatrixXc& P, const VectorXc& W, cplx z) {
  if (P.cols() != W.size()) throw InvalidArgument("stage recombination shape mismatch");
  cplx acc = 0.0;
  for (Eigen::Index j = 0; j < W.size(); ++j) acc += P(P.rows() - 1, j) * W(j);
  return z * acc;
}

}  // namespace cqwave
