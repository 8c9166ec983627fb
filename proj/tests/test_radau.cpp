#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cqwave/radau.hpp"

using namespace cqwave;

namespace {

MatrixXc inner_matrix(const RKTableau& t, cplx z) {
  const int m = t.stages();
  return t.A.cast<cplx>() + (z / (1.0 - z)) * VectorXc::Ones(m) * t.b.cast<cplx>().transpose();
}

cplx random_disc_point(std::mt19937& rng, double rmax) {
  std::uniform_real_distribution<double> u(0, 1);
  return std::polar(rmax * std::sqrt(u(rng)), 2 * std::numbers::pi * u(rng));
}

}  // namespace

TEST(RadauTableau, StifflyAccurate) {
  const auto t = RKTableau::radau2a();
  EXPECT_TRUE(t.stiffly_accurate());
  EXPECT_EQ(t.A(1, 0), t.b(0));
  EXPECT_EQ(t.A(1, 1), t.b(1));
  EXPECT_EQ(t.c(1), 1.0);
  // R(s) = (1 + s/3) / (1 - 2s/3 + s^2/6)
  const cplx s(-0.3, 0.7);
  EXPECT_NEAR(std::abs(t.stability_function(s) - (1.0 + s / 3.0) / (1.0 - 2.0 * s / 3.0 + s * s / 6.0)), 0.0, 1e-14);
}

TEST(RadauDelta, AtOriginIsInverseOfA) {
  const auto D = delta_matrix(RKTableau::radau2a(), 0.0);
  EXPECT_NEAR(std::abs(D(0, 0) - 1.5), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(D(0, 1) - 0.5), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(D(1, 0) + 4.5), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(D(1, 1) - 2.5), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(D.trace() - 4.0), 0.0, 1e-14);
}

TEST(RadauDelta, InvertsInnerMatrix) {
  std::mt19937 rng(5);
  const auto t = RKTableau::radau2a();
  for (int i = 0; i < 100; ++i) {
    const cplx z = random_disc_point(rng, 0.99);
    const MatrixXc E = delta_matrix(t, z) * inner_matrix(t, z) - MatrixXc::Identity(2, 2);
    EXPECT_LE(E.norm(), 1e-13);
  }
}

TEST(RadauEigen, ClosedFormValues) {
  const auto e0 = radau2_eigenvalues(0.0);
  EXPECT_NEAR(std::abs(e0.gamma1 - cplx(2, -std::sqrt(2.0))), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(e0.gamma2 - cplx(2, std::sqrt(2.0))), 0.0, 1e-15);
  const double zd = radau2_defective_point();
  EXPECT_NEAR(zd, 0.196152422706632, 1e-14);
  const auto ed = radau2_eigenvalues(zd);
  EXPECT_NEAR(std::abs(ed.gamma1 - (3 * std::sqrt(3.0) - 3)), 0.0, 1e-7);
  EXPECT_NEAR(std::abs(ed.gamma2 - ed.gamma1), 0.0, 1e-7);
}

TEST(RadauEigen, TraceAndDeterminantMatchDelta) {
  std::mt19937 rng(9);
  for (int i = 0; i < 200; ++i) {
    const cplx z = random_disc_point(rng, 0.99);
    const auto e = radau2_eigenvalues(z);
    const MatrixXc D = delta_matrix(RKTableau::radau2a(), z);
    const double scale = std::max(1.0, D.norm());
    EXPECT_LE(std::abs(e.gamma1 + e.gamma2 - D.trace()), 1e-12 * scale);
    EXPECT_LE(std::abs(e.gamma1 * e.gamma2 - D.determinant()), 1e-12 * scale * scale);
  }
}

TEST(RadauDecomposition, RecomposesDelta) {
  const auto t = RKTableau::radau2a();
  for (cplx z : {cplx(0.0), cplx(0.5), cplx(-0.9, 0.1), cplx(0.3, -0.8)}) {
    const auto s = stage_decomposition(t, z);
    const MatrixXc D = delta_matrix(t, z);
    const MatrixXc R = s.P * s.gamma.asDiagonal() * s.P_inv - D;
    EXPECT_LE(R.norm(), 1e-12 * D.norm());
    EXPECT_GE(s.condition, 1.0 - 1e-12);
  }
  const auto s0 = stage_decomposition(t, 0.0);
  const MatrixXc A_inv = t.A.cast<cplx>().inverse();
  for (int j = 0; j < 2; ++j) EXPECT_LE((A_inv * s0.P.col(j) - s0.gamma(j) * s0.P.col(j)).norm(), 1e-13);
}

TEST(RadauDecomposition, ColumnsNormalized) {
  const auto s = stage_decomposition(RKTableau::radau2a(), cplx(0.2, 0.4));
  for (int j = 0; j < 2; ++j) {
    EXPECT_NEAR(s.P.col(j).norm(), 1.0, 1e-14);
    EXPECT_EQ(s.P(0, j).imag(), 0.0);
    EXPECT_GT(s.P(0, j).real(), 0.0);
  }
}

TEST(RadauDecomposition, DefectivePointThrows) {
  EXPECT_THROW(stage_decomposition(RKTableau::radau2a(), radau2_defective_point()), DefectivePointError);
  EXPECT_NO_THROW(stage_decomposition(RKTableau::radau2a(), radau2_defective_point() + 1e-3));
}

TEST(RadauStages, BoundaryTransform) {
  const std::vector<std::vector<double>> delta = {{1.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
  const auto G = stage_boundary_transform(delta, cplx(0.4, 0.3));
  EXPECT_EQ(G(0), cplx(1.0));
  EXPECT_EQ(G(1), cplx(1.0));

  const std::vector<std::vector<double>> s = {{2.0, 5.0}, {3.0, 7.0}};
  const auto G0 = stage_boundary_transform(s, 0.0);
  EXPECT_EQ(G0(0), cplx(2.0));
  EXPECT_EQ(G0(1), cplx(3.0));

  const double dt = 0.1;
  std::vector<std::vector<double>> e(2);
  for (int n = 0; n < 400; ++n) {
    e[0].push_back(std::exp(-(n + 1.0 / 3.0) * dt));
    e[1].push_back(std::exp(-(n + 1.0) * dt));
  }
  const auto Ge = stage_boundary_transform(e, 0.5);
  EXPECT_NEAR(Ge(1).real(), std::exp(-0.1) / (1.0 - 0.5 * std::exp(-0.1)), 1e-14);
}

TEST(RadauStages, MixAndRecombine) {
  VectorXc G(2);
  G << cplx(1, 2), cplx(3, -1);
  EXPECT_EQ(mix_stage_data(MatrixXc::Identity(2, 2), G), G);
  MatrixXc swap(2, 2);
  swap << 0, 1, 1, 0;
  const VectorXc w = mix_stage_data(swap, G);
  EXPECT_EQ(w(0), G(1));
  EXPECT_EQ(w(1), G(0));
  std::mt19937 rng(2);
  std::normal_distribution<double> d;
  MatrixXc M(2, 2);
  for (int i = 0; i < 4; ++i) M(i / 2, i % 2) = {d(rng), d(rng)};
  const VectorXc r = mix_stage_data(M, G);
  for (int i = 0; i < 2; ++i) EXPECT_LE(std::abs(r(i) - (M(i, 0) * G(0) + M(i, 1) * G(1))), 1e-14);

  EXPECT_EQ(recombine_solution(MatrixXc::Identity(2, 2), G, cplx(0.5)), 0.5 * G(1));
  EXPECT_EQ(recombine_solution(M, G, 0.0), cplx(0.0));
  EXPECT_THROW(mix_stage_data(MatrixXc::Identity(3, 3), G), InvalidArgument);
}

TEST(RadauProperties, RecompositionOnRandomNodes) {
  std::mt19937 rng(13);
  const auto t = RKTableau::radau2a();
  const double zd = radau2_defective_point();
  int checked = 0;
  while (checked < 1000) {
    const cplx z = random_disc_point(rng, 0.99);
    if (std::abs(z - zd) < 1e-3) continue;
    const auto s = stage_decomposition(t, z);
    const MatrixXc D = delta_matrix(t, z);
    EXPECT_LE((s.P * s.gamma.asDiagonal() * s.P_inv - D).norm(), 1e-11 * D.norm());
    ++checked;
  }
}

TEST(RadauProperties, DecoupledSolveMatchesCoupledLinearSystem) {
  // With a scalar "operator" W_j = G_j / gamma_j the decoupled path must equal
  // solving Delta(z) W = G directly.
  std::mt19937 rng(17);
  const auto t = RKTableau::radau2a();
  for (int i = 0; i < 50; ++i) {
    const cplx z = random_disc_point(rng, 0.95);
    if (std::abs(z - radau2_defective_point()) < 1e-3) continue;
    VectorXc G(2);
    G << cplx(1.0, 0.5), cplx(-0.2, 0.3);
    const auto s = stage_decomposition(t, z);
    VectorXc W = mix_stage_data(s.P_inv, G);
    for (int j = 0; j < 2; ++j) W(j) /= s.gamma(j);
    const VectorXc direct = delta_matrix(t, z).partialPivLu().solve(G);
    const cplx u1 = recombine_solution(s.P, W, z);
    EXPECT_LE(std::abs(u1 - z * direct(1)), 1e-12 * std::max(1.0, std::abs(u1)));
  }
}
