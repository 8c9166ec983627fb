// Acceptance checks. One PASS/FAIL line per criterion.
//   cqwave_acceptance [N ...] [--expect-fail N ...] [--report FILE]
// Runs the listed criteria (default: 1-10). Exit status is 0 when exactly the --expect-fail criteria fail.
// --report also writes the result lines to FILE.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cqwave.hpp"

#ifndef CQWAVE_CONFIG_DIR
#define CQWAVE_CONFIG_DIR "configs"
#endif

using namespace cqwave;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const std::string kSphere1280 = std::string(CQWAVE_CONFIG_DIR) + "/meshes/sphere_1280.off";

std::vector<int> nf_range(int from, int to, int step) {
  std::vector<int> v;
  for (int n = from; n <= to; n += step) v.push_back(n);
  return v;
}

// Sphere rate studies: pulse short enough that the data poles sit outside every contour used here.
RunConfig rate_config(const Formulation& f, const std::string& rule, double lambda) {
  RunConfig c;
  c.geometry.kind = GeometryKind::mesh;
  c.geometry.mesh_path = kSphere1280;
  c.c = 343.0;
  c.t_final = 0.02;
  c.n_steps = 40;
  c.lambda = lambda;
  c.n_freq = 40;
  c.rule = rule;
  c.formulation = f;
  c.boundary_data.pulse = {1000.0, 1.0, 6, 4000.0};
  c.observation.kind = ObservationKind::grid;
  c.observation.n = 21;
  c.workers = 0;
  return c;
}

double first_positive_root(const std::vector<PoleEntry>& v, int n) {
  double best = INFINITY;
  for (const auto& e : v)
    if ((n < 0 || e.n == n) && e.k_value.real() > 0) best = std::min(best, e.k_value.real());
  return best;
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<cplx> num{1.0}, den{1.0, -0.5};  // U(z) = 1 / (1 - z/2), u_n = 2^-n
  const TimeGrid grid = TimeGrid::from_step(1.0, 1.0, 3);
  double worst = 0, worst_vs_e = 0;
  for (double lambda : {0.8, 0.95})
    for (int nf : {4, 8, 16}) {
      const auto f = run_synthetic(num, den, ContourSpec(lambda, nf), grid);
      const double q = std::pow(lambda / 2.0, nf);
      for (int n = 0; n <= 2; ++n) {
        const double un = std::ldexp(1.0, -n);
        const double E = un * q / (1.0 - q);
        const double dev = std::abs((f.values[static_cast<size_t>(n)][0] - un) - E);
        worst = std::max(worst, dev / un);
        worst_vs_e = std::max(worst_vs_e, dev / E);
      }
    }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {worst <= 1e-12 && secs < 1.0,
          fmt("max |err - E|/|u_n| = %.2e (<= 1e-12), max |err - E|/|E| = %.2e, %.3f s", worst, worst_vs_e, secs)};
}

Outcome rate_check(const RunConfig& cfg, const std::vector<int>& nfs, double lo, double hi) {
  const auto r = convergence_study(cfg, nfs);
  std::string rows;
  for (const auto& row : r.rows) rows += fmt(" %d:%.2e", row.n_freq, row.abs_diff);
  return {r.fitted_rate >= lo && r.fitted_rate <= hi,
          fmt("fitted %.4f in [%.3f, %.3f], predicted %.4f, %d fit points;", r.fitted_rate, lo, hi, r.predicted_rate,
              r.fit_points) +
              rows};
}

Outcome criterion2() {
  return rate_check(rate_config(Formulation::second_kind(), "backward-euler", 0.95), nf_range(40, 200, 20), 0.94, 0.96);
}

Outcome criterion3() {
  return rate_check(rate_config(Formulation::combined(1.0), "backward-euler", 0.95), nf_range(40, 200, 20), 0.908, 0.928);
}

Outcome criterion4() {
  // BE loses ~0.8 per frequency, so a step of 20 leaves only two points above the roundoff floor. The first
  // frequencies past Nf = Nt also carry the wrap-around of faster resonances; the BE sweep starts at Nt + 10.
  const auto be = rate_check(rate_config(Formulation::combined(20.0), "backward-euler", 0.9), nf_range(50, 100, 5),
                             0.795 - 0.02, 0.795 + 0.02);
  const auto bdf = rate_check(rate_config(Formulation::combined(20.0), "bdf2", 0.9), nf_range(40, 200, 20),
                              0.890 - 0.02, 0.890 + 0.02);
  return {be.pass && bdf.pass, "BE " + be.detail + " | BDF2 " + bdf.detail};
}

Outcome criterion5() {
  const auto t0 = std::chrono::steady_clock::now();
  const double dir = first_positive_root(interior_eigenvalues_sphere(PoleKind::dirichlet, 0.0, 3, 12.0), 0);
  bool neumann_zero = false;
  for (const auto& e : interior_eigenvalues_sphere(PoleKind::neumann, 0.0, 3, 12.0))
    if (e.k_value == cplx(0.0)) neumann_zero = true;
  double n1 = INFINITY;
  for (const auto& e : scattering_poles_sphere(4))
    if (e.n == 1) n1 = std::min(n1, std::abs(e.k_value - cplx(0, -1)));
  const double imp = first_positive_root(interior_eigenvalues_sphere(PoleKind::impedance, 1.0, 3, 12.0), 0);
  const cplx z0 = map_pole_to_z(MultistepRule::backward_euler(), 0.0, TimeGrid(343.0, 0.02, 40)).at(0);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool pass = std::abs(dir - pi) <= 1e-10 && neumann_zero && n1 <= 1e-12 && std::abs(imp - pi / 2) <= 1e-10 &&
                    z0 == cplx(1.0) && secs < 1.0;
  return {pass, fmt("Dirichlet %.2e, Neumann 0 %s, n=1 pole %.2e, impedance %.2e, BE z(0) = %.17g%+.17gi, %.3f s",
                    std::abs(dir - pi), neumann_zero ? "present" : "missing", n1, std::abs(imp - pi / 2), z0.real(),
                    z0.imag(), secs)};
}

Outcome criterion6() {
  const BemDiscretization bem(load_mesh(kSphere1280));
  const auto axis = parse_omega_axis("imag:0.5:3:0.05");
  const auto s = axis.parameters();
  const auto p = inverse_norm_scan(bem, Formulation::combined(1.0), axis.omegas());
  const double predicted = first_positive_root(interior_eigenvalues_sphere(PoleKind::impedance, 1.0, 8, 12.0), -1);
  double best = INFINITY, at = NAN;
  for (const auto& pk : scan_peaks(s, p))
    if (std::abs(pk.parameter - predicted) < best) {
      best = std::abs(pk.parameter - predicted);
      at = pk.parameter;
    }
  return {best <= 0.02 * predicted,
          fmt("peak at Im omega = %.4f, predicted %.4f, relative offset %.2e (<= 0.02)", at, predicted, best / predicted)};
}

struct StabilityRun {
  double late400 = 0, late100 = 0, max_u400 = 0, diff = 0;
  std::vector<double> t, err400;  // per step, max over the points
};

StabilityRun stability_run(const Formulation& f) {
  RunConfig c;
  c.geometry.kind = GeometryKind::mesh;
  c.geometry.mesh_path = kSphere1280;
  c.c = 343.0;
  c.t_final = 0.3;
  c.n_steps = 80;
  c.lambda = 0.95;
  c.rule = "radau2a";
  c.formulation = f;
  c.boundary_data.pulse = {25.0, 300.0, 10, 150.0};
  c.observation.kind = ObservationKind::circle;
  c.observation.radius = 1.1;
  c.observation.n = 8;
  c.workers = 0;
  const auto pr = prepare_run(c);
  NodeCache cache(c.lambda);
  const auto f400 = run_prepared(pr, 400, &cache);
  const auto f100 = run_prepared(pr, 100, &cache);  // every node is already in the cache
  StabilityRun out;
  for (int n = 0; n < f400.n_steps(); ++n) {
    const auto i = static_cast<size_t>(n);
    const double t = f400.grid.time(n);
    double e400 = 0;
    for (int q = 0; q < f400.n_points(); ++q) {
      const auto j = static_cast<size_t>(q);
      const double ex = exact_monopole_solution(c.boundary_data.pulse, c.c, norm(f400.points[j]), t);
      out.max_u400 = std::max(out.max_u400, std::abs(f400.values[i][j]));
      out.diff = std::max(out.diff, std::abs(f400.values[i][j] - f100.values[i][j]));
      e400 = std::max(e400, std::abs(f400.values[i][j] - ex));
      if (t > 0.2) out.late100 = std::max(out.late100, std::abs(f100.values[i][j] - ex));
    }
    if (t > 0.2) out.late400 = std::max(out.late400, e400);
    out.t.push_back(t);
    out.err400.push_back(e400);
  }
  return out;
}

Outcome criterion7() {
  const auto sl = stability_run(Formulation::first_kind());
  const auto dl = stability_run(Formulation::second_kind());
  const auto c1 = stability_run(Formulation::combined(1.0));
  const auto cw = stability_run(Formulation::combined_omega());
  const double good = std::max(sl.late400, c1.late400);
  const double bad = std::min(dl.late400, cw.late400);
  const double rel = sl.diff / sl.max_u400;
  // Not part of the check: first time from which the 10x separation holds at every later step.
  double from = NAN;
  for (size_t n = sl.t.size(); n-- > 0;) {
    const double g = std::max(sl.err400[n], c1.err400[n]), b = std::min(dl.err400[n], cw.err400[n]);
    if (b < 10.0 * g) break;
    from = sl.t[n];
  }
  return {bad >= 10.0 * good && rel <= 0.01,
          fmt("late-time error SL %.2e, eta=1 %.2e, DL %.2e, eta=omega %.2e (ratio %.1f >= 10; 10x separation holds "
              "pointwise from t = %.4f); SL Nf=100 vs 400 max difference %.2e of max|u| (<= 0.01)",
              sl.late400, c1.late400, dl.late400, cw.late400, bad / good, from, rel)};
}

Outcome criterion8() {
  // (a) stage decomposition on random nodes
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(0, 1);
  const auto tab = RKTableau::radau2a();
  double resid = 0;
  for (int checked = 0; checked < 1000;) {
    const cplx z = std::polar(0.99 * std::sqrt(u(rng)), 2 * pi * u(rng));
    if (std::abs(z - radau2_defective_point()) < 1e-3) continue;
    const auto s = stage_decomposition(tab, z);
    const MatrixXc D = delta_matrix(tab, z);
    resid = std::max(resid, (s.P * s.gamma.asDiagonal() * s.P_inv - D).norm() / D.norm());
    ++checked;
  }
  const bool a = resid <= 1e-11;

  // (b) time order against the exact monopole; Nf = 2 Nt with aliasing error ~1e-8
  std::vector<double> xs, ys;
  for (int nt : {160, 320, 640}) {
    RunConfig c;
    c.c = 343.0;
    c.t_final = 0.1;
    c.n_steps = nt;
    c.n_freq = 2 * nt;
    c.lambda = std::pow(1e-8, 1.0 / (2 * nt));
    c.rule = "radau2a";
    c.boundary_data.pulse = {25.0, 300.0, 10, 150.0};
    c.observation.kind = ObservationKind::points;
    c.observation.points = {{1.1, 0, 0}, {0, 1.5, 0}, {0, 0, 2.0}};
    c.workers = 0;
    const auto f = run_cq(c);
    double err = 0;
    for (int n = 0; n < nt; ++n)
      for (int q = 0; q < f.n_points(); ++q) {
        const auto i = static_cast<size_t>(n), j = static_cast<size_t>(q);
        err = std::max(err, std::abs(f.values[i][j] -
                                     exact_monopole_solution(c.boundary_data.pulse, c.c, norm(f.points[j]), f.grid.time(n))));
      }
    xs.push_back(std::log(f.grid.dt()));
    ys.push_back(std::log(err));
  }
  const double mx = (xs[0] + xs[1] + xs[2]) / 3, my = (ys[0] + ys[1] + ys[2]) / 3;
  double sxy = 0, sxx = 0;
  for (int i = 0; i < 3; ++i) {
    sxy += (xs[static_cast<size_t>(i)] - mx) * (ys[static_cast<size_t>(i)] - my);
    sxx += (xs[static_cast<size_t>(i)] - mx) * (xs[static_cast<size_t>(i)] - mx);
  }
  const double order = sxy / sxx;
  const bool b = order >= 2.7 && order <= 3.2;

  // (c) Nf-rate with combined-omega on the 320-panel sphere
  RunConfig cc = rate_config(Formulation::combined_omega(), "radau2a", 0.95);
  cc.geometry.kind = GeometryKind::icosphere;
  cc.geometry.subdivisions = 2;
  // The early points still carry faster-decaying components; the asymptotic rate comes from the tail.
  const auto r = convergence_study(cc, nf_range(40, 200, 20));
  std::vector<ConvergenceRow> tail;
  for (const auto& row : r.rows)
    if (row.n_freq >= 100) tail.push_back(row);
  const double tail_rate = fit_rate(tail, r.floor).first;
  const bool advisory = run_atlas(cc).defective_k.has_value();
  const bool c = std::abs(tail_rate - r.predicted_rate) <= 0.02;

  return {a && b && c, fmt("(a) residual %.2e (<= 1e-11); (b) order %.3f in [2.7, 3.2]; (c) tail rate %.4f vs predicted "
                           "%.4f (+-0.02; all-points fit %.4f), advisory point %s",
                           resid, order, tail_rate, r.predicted_rate, r.fitted_rate, advisory ? "listed" : "not listed")};
}

Outcome criterion9() {
  // half vs full spectrum
  RunConfig a;
  a.c = 343.0;
  a.t_final = 0.3;
  a.n_steps = 80;
  a.n_freq = 160;
  a.lambda = 0.95;
  a.rule = "radau2a";
  a.observation.kind = ObservationKind::circle;
  a.observation.n = 8;
  a.workers = 0;
  RunConfig b = a;
  b.geometry.kind = GeometryKind::icosphere;
  b.geometry.subdivisions = 1;
  b.formulation = Formulation::combined(1.0);
  b.rule = "bdf2";
  b.t_final = 0.02;
  b.n_steps = 40;
  b.n_freq = 60;
  b.boundary_data.pulse = {1000.0, 1.0, 6, 4000.0};
  b.observation.radius = 1.5;
  double worst = 0;
  for (RunConfig cfg : {a, b}) {
    cfg.spectrum = SpectrumMode::half;
    const auto h = run_cq(cfg);
    cfg.spectrum = SpectrumMode::full;
    const auto f = run_cq(cfg);
    worst = std::max(worst, abs_diff(h, f) / max_abs(f));
  }

  // worker counts
  unsetenv("CQWAVE_WORKERS");
  std::vector<std::string> csv;
  for (int w : {1, 4, 8}) {
    RunConfig cfg = b;
    cfg.workers = w;
    std::ostringstream os;
    write_time_series_csv(run_cq(cfg), os);
    csv.push_back(os.str());
  }
  const bool same = csv[0] == csv[1] && csv[0] == csv[2];
  return {worst <= 1e-13 && same, fmt("half vs full %.2e (<= 1e-13); CSVs for workers 1/4/8 %s", worst,
                                      same ? "byte-identical" : "DIFFER")};
}

Outcome criterion10() {
  const double r1 = predicted_rate(0.95, 1.0346), r2 = predicted_rate(0.95, 1.045);
  return {std::abs(r1 - 0.91824) <= 5e-5 && std::abs(r2 - 0.90909) <= 5e-5,
          fmt("predicted_rate(0.95, 1.0346) = %.6f, predicted_rate(0.95, 1.045) = %.6f", r1, r2)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<std::string, std::function<Outcome()>>> criteria = {
      {1, {"aliasing exactness (synthetic)", criterion1}},
      {2, {"second-kind rate, BE, 1280 panels", criterion2}},
      {3, {"combined eta=1 rate, BE, 1280 panels", criterion3}},
      {4, {"combined eta=20 rates, BE vs BDF2", criterion4}},
      {5, {"pole atlas values", criterion5}},
      {6, {"inverse-norm scan peak", criterion6}},
      {7, {"formulation stability against the exact monopole", criterion7}},
      {8, {"Radau IIa decomposition, order and rate", criterion8}},
      {9, {"half spectrum and worker determinism", criterion9}},
      {10, {"rate spot values", criterion10}},
  };
  std::vector<int> which;
  std::set<int> expected_fail;
  std::string report_path;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--report") {
      if (i + 1 == argc) {
        std::fprintf(stderr, "--report needs a file name\n");
        return 2;
      }
      report_path = argv[++i];
      continue;
    }
    const bool xf = arg == "--expect-fail";
    if (xf && i + 1 == argc) {
      std::fprintf(stderr, "--expect-fail needs a criterion number\n");
      return 2;
    }
    const char* num = xf ? argv[++i] : argv[i];
    const int n = std::atoi(num);
    if (!criteria.contains(n)) {
      std::fprintf(stderr, "unknown criterion '%s'\n", num);
      return 2;
    }
    if (xf) expected_fail.insert(n);
    else which.push_back(n);
  }
  if (which.empty())
    for (const auto& [n, _] : criteria) which.push_back(n);

  std::ofstream report;
  if (!report_path.empty()) {
    report.open(report_path);
    if (!report) {
      std::fprintf(stderr, "cannot write %s\n", report_path.c_str());
      return 2;
    }
  }
  int unexpected = 0;
  for (int n : which) {
    const auto& [name, fn] = criteria.at(n);
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool known = expected_fail.contains(n);
    const std::string line = fmt("%s criterion %d (%s): ", o.pass ? "PASS" : "FAIL", n, name.c_str()) + o.detail +
                             fmt(" [%.1f s]", secs) +
                             (known ? (o.pass ? " (listed as a known failure but passed)" : " (known failure)") : "");
    std::printf("%s\n", line.c_str());
    std::fflush(stdout);
    if (report) report << line << '\n' << std::flush;
    if (o.pass == known) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
