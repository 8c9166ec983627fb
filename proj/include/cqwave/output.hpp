#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "cqwave/config.hpp"
#include "cqwave/errors.hpp"
#include "cqwave/pipeline.hpp"
#include "cqwave/pole_atlas.hpp"
#include "cqwave/scan.hpp"
#include "cqwave/version.hpp"

namespace cqwave {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v + 0.0);  // no "-0"
  return buf;
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

inline void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace detail

inline void write_time_series_csv(const TimeDomainField& f, std::ostream& out) {
  out << "t,point_id,x,y,z,u\n";
  for (int n = 0; n < f.n_steps(); ++n)
    for (int p = 0; p < f.n_points(); ++p) {
      const auto& x = f.points[static_cast<size_t>(p)];
      out << fmt17(f.grid.time(n)) << ',' << p << ',' << fmt17(x[0]) << ',' << fmt17(x[1]) << ',' << fmt17(x[2])
          << ',' << fmt17(f.values[static_cast<size_t>(n)][static_cast<size_t>(p)]) << '\n';
    }
}

inline void write_time_series_csv(const TimeDomainField& f, const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  write_time_series_csv(f, out);
  detail::finish(out, path);
}

inline void write_convergence_csv(const ConvergenceResult& r, std::ostream& out) {
  out << "Nf,abs_diff,fitted_rate,predicted_rate\n";
  for (const auto& row : r.rows)
    out << row.n_freq << ',' << fmt17(row.abs_diff) << ',' << fmt17(r.fitted_rate) << ',' << fmt17(r.predicted_rate)
        << '\n';
}

inline void write_convergence_csv(const ConvergenceResult& r, const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  write_convergence_csv(r, out);
  detail::finish(out, path);
}

inline void write_pole_csv(const RunAtlas& a, std::ostream& out) {
  out << "kind,n,k_re,k_im,z_re,z_im,z_mod\n";
  std::vector<PoleEntry> sorted = a.entries;
  std::stable_sort(sorted.begin(), sorted.end(), [](const PoleEntry& x, const PoleEntry& y) {
    return std::tie(x.z_modulus, x.kind, x.n) < std::tie(y.z_modulus, y.kind, y.n);
  });
  for (const auto& e : sorted)
    out << pole_kind_name(e.kind) << ',' << e.n << ',' << fmt17(e.k_value.real()) << ',' << fmt17(e.k_value.imag())
        << ',' << fmt17(e.z_image.real()) << ',' << fmt17(e.z_image.imag()) << ',' << fmt17(e.z_modulus) << '\n';
  if (a.defective_k) {
    const double zd = radau2_defective_point();
    out << "defective-advisory,-1," << fmt17(a.defective_k->real()) << ',' << fmt17(a.defective_k->imag()) << ','
        << fmt17(zd) << ",0," << fmt17(zd) << '\n';
  }
}

inline void write_pole_csv(const RunAtlas& a, const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  write_pole_csv(a, out);
  detail::finish(out, path);
}

inline void write_scan_csv(const OmegaAxis& axis, const std::vector<double>& s, const std::vector<double>& p,
                           std::ostream& out) {
  out << "omega_re,omega_im,p\n";
  for (size_t i = 0; i < s.size(); ++i) {
    const cplx w = axis.omega(s[i]);
    out << fmt17(w.real()) << ',' << fmt17(w.imag()) << ',' << fmt17(p[i]) << '\n';
  }
}

inline void write_scan_csv(const OmegaAxis& axis, const std::vector<double>& s, const std::vector<double>& p,
                           const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  write_scan_csv(axis, s, p, out);
  detail::finish(out, path);
}

/// Resolved config plus library version and run facts.
inline json make_manifest(const RunConfig& cfg, const json& facts = json::object()) {
  return {{"config", config_to_json(cfg)}, {"library", {{"name", "cqwave"}, {"version", kVersion}}}, {"run", facts}};
}

inline RunConfig config_from_manifest(const json& manifest) {
  if (!manifest.contains("config")) throw ConfigError("manifest has no config section");
  return config_from_json(manifest.at("config"));
}

inline void write_manifest(const RunConfig& cfg, const json& facts, const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  out << make_manifest(cfg, facts).dump(2) << '\n';
  detail::finish(out, path);
}

inline std::filesystem::path output_path(const RunConfig& cfg, const std::string& suffix) {
  return std::filesystem::path(cfg.output.directory) / (cfg.output.prefix + suffix);
}

}  // namespace cqwave
