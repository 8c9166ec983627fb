#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "cqwave/bem.hpp"
#include "cqwave/mesh.hpp"
#include "cqwave/scan.hpp"

using namespace cqwave;
using std::numbers::pi;

namespace {

const BemDiscretization& sphere(int s) {
  static std::map<int, std::unique_ptr<BemDiscretization>> cache;
  auto& p = cache[s];
  if (!p) p = std::make_unique<BemDiscretization>(icosphere(s));
  return *p;
}

VectorXc ones(int n) { return VectorXc::Ones(n); }

double monopole_error(const BemDiscretization& bem, cplx omega, const std::vector<Vec3>& pts) {
  const auto A = formulation_matrix(bem, omega, Formulation::first_kind());
  const auto sol = solve_density(A, ones(bem.size()), omega, Formulation::first_kind());
  const auto u = evaluate_potential(bem, sol, pts);
  double err = 0;
  for (size_t p = 0; p < pts.size(); ++p) {
    const double r = norm(pts[p]);
    err = std::max(err, std::abs(u[p] - std::exp(-omega * (r - 1)) / r) / std::abs(std::exp(-omega * (r - 1)) / r));
  }
  return err;
}

}  // namespace

TEST(Mesh, IcosphereGeometry) {
  const auto m = icosphere(2);
  EXPECT_EQ(m.size(), 320);
  EXPECT_TRUE(m.closed());
  EXPECT_NEAR(m.total_area(), 4 * pi, 0.02 * 4 * pi);
  EXPECT_GT(m.position_flux(), 0.0);
  for (int i = 0; i < m.size(); ++i) EXPECT_GT(dot(m.normal(i), m.centroid(i)), 0.0);
  EXPECT_EQ(icosphere(3).size(), 1280);
  EXPECT_THROW(icosphere(8), InvalidArgument);
}

TEST(Mesh, ReversedOrientationIsFixed) {
  const auto m = icosphere(1);
  std::ostringstream os;
  os << "OFF\n" << m.vertices().size() << ' ' << m.size() << " 0\n";
  for (const auto& v : m.vertices()) os << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
  // reverse every face, and additionally flip only some to test consistent orientation
  int i = 0;
  for (const auto& t : m.triangles()) {
    if (i++ % 3 == 0)
      os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    else
      os << "3 " << t[0] << ' ' << t[2] << ' ' << t[1] << '\n';
  }
  std::istringstream is(os.str());
  const auto r = parse_off(is);
  EXPECT_TRUE(r.closed());
  EXPECT_GT(r.position_flux(), 0.0);
  for (int j = 0; j < r.size(); ++j) EXPECT_GT(dot(r.normal(j), r.centroid(j)), 0.0);
}

TEST(Mesh, DegenerateTriangleRejected) {
  std::istringstream is("OFF\n4 2 0\n0 0 0\n1 0 0\n0 1 0\n2 0 0\n3 0 1 2\n3 0 1 3\n");
  EXPECT_THROW(parse_off(is), MeshError);
}

TEST(Mesh, ParseErrorsCarryLineNumbers) {
  auto line_of = [](const std::string& text) {
    std::istringstream is(text);
    try {
      (void)parse_off(is);
    } catch (const ParseError& e) {
      return e.line();
    }
    return -1;
  };
  EXPECT_EQ(line_of("PLY\n"), 1);
  EXPECT_EQ(line_of("OFF\n3 1 0\n0 0 0\n1 0 x\n"), 4);
  EXPECT_EQ(line_of("OFF\n# comment\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n4 0 1 2 0\n"), 7);
  EXPECT_EQ(line_of("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 5\n"), 6);
  EXPECT_EQ(line_of("OFF 3 1 0\n0 0 0\n1 0 0\n"), 3);
}

TEST(Mesh, OpenSurfaceRejectedForFormulations) {
  std::istringstream is("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
  const auto m = parse_off(is);
  EXPECT_FALSE(m.closed());
  EXPECT_THROW(m.require_closed(), MeshError);
  EXPECT_THROW(BemDiscretization{m}, MeshError);
}

TEST(Mesh, WriteReadRoundTrip) {
  const auto m = icosphere(1);
  std::stringstream ss;
  write_off(m, ss);
  const auto r = parse_off(ss);
  ASSERT_EQ(r.size(), m.size());
  for (int i = 0; i < m.size(); ++i) {
    EXPECT_EQ(r.centroid(i), m.centroid(i));
    EXPECT_EQ(r.area(i), m.area(i));
  }
}

TEST(Green, Values) {
  EXPECT_NEAR(green_kernel(0.0, {0, 0, 0}, {1, 0, 0}).real(), 0.0795775, 1e-7);
  EXPECT_NEAR(green_kernel(1.0, {0, 0, 0}, {0, 1, 0}).real(), std::exp(-1.0) / (4 * pi), 1e-17);
  EXPECT_NEAR(green_kernel(1.0, {0, 0, 0}, {0, 1, 0}).real(), 0.029275, 1e-6);
  const cplx w(0.7, 2.3);
  const Vec3 x{0.1, 0.2, 0.3}, y{-1, 0.5, 2};
  EXPECT_EQ(green_kernel(std::conj(w), x, y), std::conj(green_kernel(w, x, y)));
  EXPECT_THROW(green_kernel(1.0, x, x), DomainError);
}

TEST(Assembly, DoubleLayerDiagonalIsZero) {
  const auto K = assemble_layer(sphere(2), cplx(0.5, 1.5), Layer::double_);
  for (int i = 0; i < K.rows(); ++i) EXPECT_EQ(K(i, i), cplx(0.0));
}

TEST(Assembly, StaticSingleLayerOfUniformDensity) {
  const auto& bem = sphere(3);
  const VectorXc s = assemble_layer(bem, 0.0, Layer::single) * ones(bem.size());
  for (int i = 0; i < s.size(); ++i) EXPECT_NEAR(std::abs(s(i) - 1.0), 0.0, 0.02);
}

TEST(Assembly, GaussIdentity) {
  const auto& bem = sphere(3);
  const VectorXc k = assemble_layer(bem, 0.0, Layer::double_) * ones(bem.size());
  for (int i = 0; i < k.size(); ++i) EXPECT_NEAR(std::abs(k(i) + 0.5), 0.0, 0.01);
}

TEST(Assembly, ConjugateFrequency) {
  const auto& bem = sphere(1);
  const cplx w(0.8, -2.5);
  for (auto layer : {Layer::single, Layer::double_}) {
    const auto A = assemble_layer(bem, w, layer);
    const auto B = assemble_layer(bem, std::conj(w), layer);
    EXPECT_LE((B - A.conjugate()).norm(), 1e-14 * A.norm());
  }
}

TEST(Assembly, FormulationMatrices) {
  const auto& bem = sphere(1);
  const cplx w = 5.0;
  EXPECT_EQ(formulation_matrix(bem, w, Formulation::combined(0.0)), formulation_matrix(bem, w, Formulation::second_kind()));
  const auto S = assemble_layer(bem, w, Layer::single);
  const auto K = assemble_layer(bem, w, Layer::double_);
  const MatrixXc ref = 0.5 * MatrixXc::Identity(bem.size(), bem.size()) + K + 5.0 * S;
  EXPECT_LE((formulation_matrix(bem, w, Formulation::combined_omega()) - ref).norm(), 1e-14 * ref.norm());
  EXPECT_EQ(formulation_matrix(bem, w, Formulation::first_kind()), S);
}

TEST(Density, Solves) {
  VectorXc g(3);
  g << 1.0, cplx(2, 1), -3.0;
  EXPECT_EQ(solve_density(MatrixXc::Identity(3, 3), g).phi, g);

  std::mt19937 rng(42);
  std::normal_distribution<double> d;
  MatrixXc A(50, 50);
  VectorXc b(50);
  for (int i = 0; i < 50; ++i) {
    b(i) = {d(rng), d(rng)};
    for (int j = 0; j < 50; ++j) A(i, j) = {d(rng), d(rng)};
    A(i, i) += 20.0;
  }
  EXPECT_LE(solve_density(A, b).residual, 1e-12);

  MatrixXc sing = MatrixXc::Ones(4, 4);
  try {
    (void)solve_density(sing, VectorXc::Ones(4));
    FAIL() << "expected a singular-matrix error";
  } catch (const SingularMatrixError& e) {
    EXPECT_GE(e.rcond(), 0.0);
    EXPECT_LT(e.rcond(), kSingularRcond);
  }
  EXPECT_THROW(solve_density(MatrixXc::Identity(3, 3), VectorXc::Ones(2)), InvalidArgument);
}

TEST(Potential, MonopoleMatchesSphereSeries) {
  EXPECT_LE(monopole_error(sphere(3), 2.0, {{0, 0, 2}, {2, 0, 0}, {0, -1.4, 1.4}}), 0.02);
}

TEST(Potential, ZeroDensityAndNearPoints) {
  const auto& bem = sphere(2);
  DensitySolution z{1.0, Formulation::combined(1.0), VectorXc::Zero(bem.size()), 0.0, 1.0};
  const std::vector<Vec3> pts = {{0, 0, 2}, {3, 0, 0}};
  for (cplx u : evaluate_potential(bem, z, pts)) EXPECT_EQ(u, cplx(0.0));
  const std::vector<Vec3> close = {{0, 0, 1.01}};
  EXPECT_THROW(evaluate_potential(bem, z, close), DomainError);
  EXPECT_FALSE(bem.is_evaluable({0, 0, 1.01}));
  EXPECT_TRUE(bem.is_evaluable({0, 0, 2}));
}

TEST(Potential, SecondKindAndCombinedAgree) {
  const auto& bem = sphere(2);
  const cplx w(1.0, 0.5);
  std::vector<Vec3> pts = {{0, 0, 2}, {1.5, 1.5, 0}, {-2.5, 0, 0.5}};
  VectorXc g(bem.size());
  for (int i = 0; i < bem.size(); ++i) g(i) = 1.0 + bem.mesh().centroid(i)[2];
  std::vector<std::vector<cplx>> us;
  for (auto f : {Formulation::second_kind(), Formulation::combined(1.0)}) {
    const auto sol = solve_density(formulation_matrix(bem, w, f), g, w, f);
    us.push_back(evaluate_potential(bem, sol, pts));
  }
  for (size_t p = 0; p < pts.size(); ++p) EXPECT_LE(std::abs(us[0][p] - us[1][p]), 0.02 * std::abs(us[1][p]));
}

TEST(InverseNorm, Homogeneity) {
  const auto& bem = sphere(1);
  const auto A = formulation_matrix(bem, cplx(0, 1), Formulation::combined(1.0));
  const double p1 = inverse_norm(A, bem.mesh().areas());
  const double p2 = inverse_norm(2.0 * A, bem.mesh().areas());
  EXPECT_NEAR(p2, p1 / 2, 1e-12 * p1);
}

TEST(InverseNorm, FirstKindPeaksAtDirichletEigenvalue) {
  const auto& bem = sphere(2);
  std::vector<cplx> w;
  for (double s = 2.6; s <= 3.8 + 1e-9; s += 0.05) w.push_back(cplx(0, s));
  const auto p = inverse_norm_scan(bem, Formulation::first_kind(), w);
  const auto it = std::max_element(p.begin(), p.end());
  const double peak = w[static_cast<size_t>(it - p.begin())].imag();
  EXPECT_NEAR(peak, pi, 0.05 * pi);
  EXPECT_GT(*it, 5 * std::min(p.front(), p.back()));
}

TEST(BemProperties, RefinementReducesMonopoleError) {
  const std::vector<Vec3> pts = {{0, 0, 2}, {2, 0, 0}, {0, 1.5, 1.5}};
  const double e1 = monopole_error(sphere(1), 2.0, pts);
  const double e2 = monopole_error(sphere(2), 2.0, pts);
  const double e3 = monopole_error(sphere(3), 2.0, pts);
  EXPECT_LT(e2, e1);
  EXPECT_LT(e3, e2);
}

TEST(BemProperties, ConjugationPropagates) {
  const auto& bem = sphere(1);
  const cplx w(0.6, 1.7);
  VectorXc g(bem.size());
  for (int i = 0; i < bem.size(); ++i) g(i) = cplx(1.0 + bem.mesh().centroid(i)[0], bem.mesh().centroid(i)[1]);
  const std::vector<Vec3> pts = {{0, 0, 2}, {2.5, 1, 0}};
  const auto f = Formulation::combined(1.0);
  const auto s1 = solve_density(formulation_matrix(bem, w, f), g, w, f);
  const auto s2 = solve_density(formulation_matrix(bem, std::conj(w), f), g.conjugate(), std::conj(w), f);
  EXPECT_LE((s2.phi - s1.phi.conjugate()).norm(), 1e-12 * s1.phi.norm());
  const auto u1 = evaluate_potential(bem, s1, pts), u2 = evaluate_potential(bem, s2, pts);
  for (size_t p = 0; p < pts.size(); ++p) EXPECT_LE(std::abs(u2[p] - std::conj(u1[p])), 1e-12 * std::abs(u1[p]));
}

TEST(Scan, ParsesAxis) {
  const auto a = parse_omega_axis("imag:0.5:3:0.05");
  EXPECT_TRUE(a.imaginary);
  const auto s = a.parameters();
  ASSERT_EQ(s.size(), 51u);
  EXPECT_NEAR(s.back(), 3.0, 1e-12);
  EXPECT_EQ(a.omega(2.0), cplx(0, 2.0));
  const auto r = parse_omega_axis("real:1:2:0.5");
  EXPECT_FALSE(r.imaginary);
  EXPECT_EQ(r.omegas().size(), 3u);
  EXPECT_EQ(r.omega(1.5), cplx(1.5, 0));
  for (const char* bad : {"imag:1:2", "diag:0:1:0.1", "imag:a:1:0.1", "imag:0:1:0", "imag:2:1:0.1", "imag:0:1:0.1x"})
    EXPECT_THROW(parse_omega_axis(bad), InvalidArgument) << bad;
}

TEST(Scan, PeakRefinementRecoversParabolaVertex) {
  std::vector<double> s, p;
  for (int i = 0; i <= 20; ++i) {
    s.push_back(0.1 * i);
    p.push_back(5.0 - (s.back() - 1.234) * (s.back() - 1.234));
  }
  const auto peaks = scan_peaks(s, p);
  ASSERT_EQ(peaks.size(), 1u);
  EXPECT_EQ(peaks[0].index, 12);
  EXPECT_NEAR(peaks[0].parameter, 1.234, 1e-12);
  // Monotone data and endpoints are not peaks.
  EXPECT_TRUE(scan_peaks({0, 1, 2}, {1, 2, 3}).empty());
  EXPECT_THROW(scan_peaks({0, 1}, {1}), InvalidArgument);
}

TEST(Scan, FirstKindPeakNearDirichletEigenvalue) {
  // Coarse version of the acceptance scan: p peaks where the interior Dirichlet problem resonates.
  const auto a = parse_omega_axis("imag:2.8:3.6:0.1");
  const auto p = inverse_norm_scan(sphere(1), Formulation::first_kind(), a.omegas());
  const auto peaks = scan_peaks(a.parameters(), p);
  ASSERT_FALSE(peaks.empty());
  EXPECT_NEAR(peaks[0].parameter, pi, 0.1 * pi);
}
