// cqwave command-line front end.
#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cqwave.hpp"

using namespace cqwave;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<int> parse_nf_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    // START:STOP:STEP ranges are accepted alongside plain values.
    if (item.find(':') != std::string::npos) {
      int a = 0, b = 0, s = 0;
      char c1 = 0, c2 = 0;
      std::istringstream is(item);
      if (!(is >> a >> c1 >> b >> c2 >> s) || c1 != ':' || c2 != ':' || s <= 0 || b < a)
        throw InvalidArgument("bad Nf range '" + item + "', expected START:STOP:STEP");
      for (int v = a; v <= b; v += s) out.push_back(v);
    } else {
      size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size()) throw InvalidArgument("bad Nf value '" + item + "'");
      out.push_back(v);
    }
  }
  return out;
}

void apply_overrides(RunConfig& cfg, int nf, int workers, const std::string& outdir) {
  if (nf > 0) cfg.n_freq = nf;
  if (workers >= 0) cfg.workers = workers;
  if (!outdir.empty()) cfg.output.directory = outdir;
  validate(cfg);
}

int cmd_run(RunConfig cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto field = run_cq(cfg);
  const auto csv = output_path(cfg, "_timeseries.csv");
  write_time_series_csv(field, csv);
  write_manifest(cfg,
                 {{"command", "run"},
                  {"n_freq_used", field.n_freq},
                  {"observation_points", field.n_points()},
                  {"imag_residue", field.imag_residue},
                  {"max_abs_u", max_abs(field)}},
                 output_path(cfg, "_manifest.json"));
  std::printf("wrote %s (%d steps x %d points, Nf=%d) in %.2f s\n", csv.string().c_str(), field.n_steps(),
              field.n_points(), field.n_freq, seconds_since(t0));
  return 0;
}

int cmd_converge(RunConfig cfg, const std::vector<int>& nf, int reference_nf) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = convergence_study(cfg, nf, reference_nf);
  const auto csv = output_path(cfg, "_convergence.csv");
  write_convergence_csv(r, csv);
  write_manifest(cfg,
                 {{"command", "converge"},
                  {"nf_list", nf},
                  {"reference_n_freq", r.reference_n_freq},
                  {"floor", r.floor},
                  {"fit_points", r.fit_points},
                  {"fitted_rate", std::isfinite(r.fitted_rate) ? json(r.fitted_rate) : json(nullptr)},
                  {"predicted_rate", std::isfinite(r.predicted_rate) ? json(r.predicted_rate) : json(nullptr)}},
                 output_path(cfg, "_manifest.json"));
  std::printf("%6s  %-12s\n", "Nf", "abs_diff");
  for (const auto& row : r.rows) std::printf("%6d  %.4e\n", row.n_freq, row.abs_diff);
  std::printf("fitted rate %.5f (%d points), predicted %.5f, reference Nf %d\n", r.fitted_rate, r.fit_points,
              r.predicted_rate, r.reference_n_freq);
  std::printf("wrote %s in %.1f s\n", csv.string().c_str(), seconds_since(t0));
  return 0;
}

int cmd_poles(RunConfig cfg, int n_max, double k_max) {
  std::optional<SurfaceMesh> mesh;
  if (cfg.uses_bem()) mesh = config_mesh(cfg);
  const auto atlas = run_atlas(cfg, mesh ? &*mesh : nullptr, {n_max, k_max});
  if (!atlas.available) {
    std::fprintf(stderr, "cqwave: no pole atlas for this geometry (the unit sphere is required)\n");
    return 1;
  }
  const auto csv = output_path(cfg, "_poles.csv");
  write_pole_csv(atlas, csv);
  json facts = {{"command", "poles"}, {"n_max", n_max}, {"k_max", k_max}};
  if (!atlas.entries.empty() || std::isfinite(atlas.lambda_G)) {
    const auto rep = analyticity_report(atlas.entries, atlas.lambda_G);
    facts["lambda_B"] = std::isfinite(rep.lambda_B) ? json(rep.lambda_B) : json(nullptr);
    facts["lambda_G"] = std::isfinite(rep.lambda_G) ? json(rep.lambda_G) : json(nullptr);
    facts["lambda_U"] = rep.lambda_U;
    std::printf("lambda_B = %.6f  lambda_G = %.6f  lambda_U = %.6f\n", rep.lambda_B, rep.lambda_G, rep.lambda_U);
    if (rep.dominant)
      std::printf("dominant: %s n=%d k=(%.6f, %.6f) |z|=%.6f\n", pole_kind_name(rep.dominant->kind).c_str(),
                  rep.dominant->n, rep.dominant->k_value.real(), rep.dominant->k_value.imag(), rep.dominant->z_modulus);
    const double rate = predicted_rate_for(cfg, atlas);
    if (std::isfinite(rate)) {
      facts["predicted_rate"] = rate;
      std::printf("predicted rate at lambda = %.4f: %.5f\n", cfg.lambda, rate);
    }
  }
  write_manifest(cfg, facts, output_path(cfg, "_manifest.json"));
  std::printf("wrote %s (%zu entries)\n", csv.string().c_str(), atlas.entries.size());
  return 0;
}

int cmd_scan(RunConfig cfg, const std::string& axis_text) {
  if (!cfg.uses_bem()) throw ConfigError("scan needs a mesh or icosphere geometry with a formulation");
  const auto axis = parse_omega_axis(axis_text);
  const auto t0 = std::chrono::steady_clock::now();
  const BemDiscretization bem(config_mesh(cfg));
  const auto s = axis.parameters();
  const auto w = axis.omegas();
  std::vector<double> p(w.size());
  detail::parallel_for(static_cast<int>(w.size()), effective_workers(cfg), [&](int i) {
    p[static_cast<size_t>(i)] = inverse_norm(formulation_matrix(bem, w[static_cast<size_t>(i)], *cfg.formulation),
                                             bem.mesh().areas());
  });
  const auto csv = output_path(cfg, "_scan.csv");
  write_scan_csv(axis, s, p, csv);
  json peaks = json::array();
  for (const auto& pk : scan_peaks(s, p)) {
    peaks.push_back({{"parameter", pk.parameter}, {"p", pk.value}});
    std::printf("local maximum of p at %s = %.5f (p = %.4e)\n", axis.imaginary ? "Im omega" : "Re omega", pk.parameter,
                pk.value);
  }
  write_manifest(cfg, {{"command", "scan"}, {"omega_axis", axis_text}, {"peaks", peaks}},
                 output_path(cfg, "_manifest.json"));
  std::printf("wrote %s (%zu samples) in %.1f s\n", csv.string().c_str(), s.size(), seconds_since(t0));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convolution quadrature for exterior wave problems"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string config_path, outdir, nf_text, axis_text, mesh_out;
  int nf = 0, workers = -1, reference_nf = 0, n_max = 8, subdivisions = 3;
  double k_max = 12.0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--workers", workers, "concurrent frequency solves (0 = all cores)");
    sub->add_option("--output-dir", outdir, "override output.directory");
  };
  auto* run = app.add_subcommand("run", "time-domain field at the observation points");
  add_common(run);
  run->add_option("--nf", nf, "override contour.n_freq");
  auto* conv = app.add_subcommand("converge", "Nf convergence study against a large-Nf reference");
  add_common(conv);
  conv->add_option("--nf", nf_text, "increasing Nf values, e.g. 40,60,80 or 40:200:20")->required();
  conv->add_option("--reference-nf", reference_nf, "reference Nf (default 4x the largest)");
  auto* poles = app.add_subcommand("poles", "pole atlas and predicted rate (unit sphere)");
  add_common(poles);
  poles->add_option("--n-max", n_max, "largest mode number searched");
  poles->add_option("--k-max", k_max, "largest real wavenumber searched");
  auto* scan = app.add_subcommand("scan", "inverse-norm scan p(omega) of the BEM operator");
  add_common(scan);
  scan->add_option("--omega-axis", axis_text, "imag:START:STOP:STEP or real:START:STOP:STEP")->required();
  auto* ico = app.add_subcommand("icosphere", "write a unit icosphere as an OFF file");
  ico->add_option("subdivisions", subdivisions, "0..7 (20 * 4^s faces)")->required();
  ico->add_option("output", mesh_out, "OFF file to write")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (ico->parsed()) {
      const auto m = icosphere(subdivisions);
      write_off(m, mesh_out);
      std::printf("wrote %s (%d faces)\n", mesh_out.c_str(), m.size());
      return 0;
    }
    auto cfg = load_config(config_path);
    apply_overrides(cfg, nf, workers, outdir);
    std::filesystem::create_directories(cfg.output.directory);
    if (run->parsed()) return cmd_run(cfg);
    if (conv->parsed()) return cmd_converge(cfg, parse_nf_list(nf_text), reference_nf);
    if (poles->parsed()) return cmd_poles(cfg, n_max, k_max);
    if (scan->parsed()) return cmd_scan(cfg, axis_text);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "cqwave: configuration error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "cqwave: %s\n", e.what());
    return 1;
  }
  return 0;
}
