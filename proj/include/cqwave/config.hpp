#pragma once

#include "json.hpp"

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "cqwave/contour.hpp"
#include "cqwave/errors.hpp"
#include "cqwave/formulation.hpp"
#include "cqwave/signals.hpp"
#include "cqwave/time_rule.hpp"

namespace cqwave {

using nlohmann::json;

enum class GeometryKind { sphere_analytic, mesh, icosphere, synthetic };
enum class DataKindConfig { polynomial_pulse, gaussian_beam };
enum class ObservationKind { grid, points, circle };
enum class SpectrumMode { half, full };

struct GeometryConfig {
  GeometryKind kind = GeometryKind::sphere_analytic;
  std::string mesh_path;           // mesh
  int subdivisions = 3;            // icosphere
  int grid_degree = 0;             // sphere-analytic data grid; 0 = automatic
  std::vector<cplx> numerator;     // synthetic U(z) = numerator(z) / denominator(z)
  std::vector<cplx> denominator;
  bool operator==(const GeometryConfig&) const = default;
};

struct BoundaryDataConfig {
  DataKindConfig kind = DataKindConfig::polynomial_pulse;
  PulseParams pulse;
  GaussianBeamParams beam;
  bool operator==(const BoundaryDataConfig&) const = default;
};

struct ObservationConfig {
  ObservationKind kind = ObservationKind::grid;
  double extent = 3.0;          // grid: [-extent, extent]^2 in the z = 0 plane
  int n = 61;                   // grid: points per side; circle: point count
  double exclude_radius = 1.0;  // grid: drop x^2 + y^2 <= exclude_radius^2
  double radius = 1.1;          // circle in the z = 0 plane
  std::vector<Vec3> points;
  bool operator==(const ObservationConfig&) const = default;
};

struct OutputConfig {
  std::string directory = ".";
  std::string prefix = "cqwave";
  bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
  GeometryConfig geometry;
  double c = 343.0;
  double t_final = 0.02;
  int n_steps = 40;
  double lambda = 0.95;
  int n_freq = 40;
  std::string rule = "backward-euler";
  std::optional<Formulation> formulation;
  BoundaryDataConfig boundary_data;
  ObservationConfig observation;
  OutputConfig output;
  int workers = 0;  // 0 = available parallelism
  SpectrumMode spectrum = SpectrumMode::half;

  TimeGrid time_grid() const { return TimeGrid(c, t_final, n_steps); }
  ContourSpec contour() const { return ContourSpec(lambda, n_freq); }
  TimeRule time_rule() const { return TimeRule::from_name(rule); }
  bool uses_bem() const { return geometry.kind == GeometryKind::mesh || geometry.kind == GeometryKind::icosphere; }
  bool operator==(const RunConfig&) const = default;
};

namespace detail {

inline void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items())
    if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <class T>
T get(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError("missing key '" + std::string(key) + "' in " + where);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + std::string(key) + "' in " + where + ": " + e.what());
  }
}

template <class T>
T get_or(const json& j, const char* key, const std::string& where, T fallback) {
  return j.contains(key) ? get<T>(j, key, where) : fallback;
}

inline cplx to_complex(const json& v, const std::string& where) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  throw ConfigError(where + ": expected a number or [re, im]");
}

inline json from_complex(cplx z) { return json::array({z.real(), z.imag()}); }

inline Vec3 to_vec3(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 3) throw ConfigError(where + ": expected [x, y, z]");
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    if (!v[static_cast<size_t>(i)].is_number()) throw ConfigError(where + ": expected numbers");
    out[static_cast<size_t>(i)] = v[static_cast<size_t>(i)].get<double>();
  }
  return out;
}

inline std::vector<cplx> to_complex_list(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw ConfigError(where + ": expected a non-empty list");
  std::vector<cplx> out;
  for (const auto& x : v) out.push_back(to_complex(x, where));
  return out;
}

}  // namespace detail

/// Checks parameter combinations before any solve; referenced files must exist.
inline void validate(const RunConfig& c) {
  if (!(c.c > 0) || !(c.t_final > 0) || c.n_steps < 1) throw ConfigError("time: need c > 0, t_final > 0, n_steps >= 1");
  if (!(c.lambda > 0) || c.n_freq < 1) throw ConfigError("contour: need lambda > 0 and n_freq >= 1");
  if (c.geometry.kind != GeometryKind::synthetic && !(c.lambda < 1.0))
    throw ConfigError("contour: lambda must be < 1 for solver runs");
  try {
    (void)c.time_rule();
  } catch (const Error& e) {
    throw ConfigError(std::string("rule: ") + e.what());
  }
  if (c.workers < 0) throw ConfigError("workers must be >= 0");
  const auto& g = c.geometry;
  switch (g.kind) {
    case GeometryKind::mesh:
      if (!std::filesystem::exists(g.mesh_path)) throw ConfigError("mesh file not found: " + g.mesh_path);
      break;
    case GeometryKind::icosphere:
      if (g.subdivisions < 0 || g.subdivisions > 5) throw ConfigError("icosphere subdivisions must be in [0, 5]");
      break;
    case GeometryKind::sphere_analytic:
      if (g.grid_degree < 0) throw ConfigError("grid_degree must be >= 0");
      break;
    case GeometryKind::synthetic:
      if (g.numerator.empty() || g.denominator.empty()) throw ConfigError("synthetic geometry needs numerator and denominator");
      if (g.denominator.front() == 0.0) throw ConfigError("synthetic denominator must be nonzero at z = 0");
      break;
  }
  if (c.uses_bem() && !c.formulation) throw ConfigError("mesh geometries need a formulation");
  if (!c.uses_bem() && c.formulation) throw ConfigError("formulation applies to mesh geometries only");
  if (c.formulation && c.formulation->kind == FormulationKind::combined_const) {
    if (c.formulation->eta == 0.0) throw ConfigError("combined-const needs a nonzero eta");
    if (c.formulation->eta.imag() != 0.0 && c.spectrum == SpectrumMode::half)
      throw ConfigError("complex eta breaks conjugate symmetry; use \"spectrum\": \"full\"");
  }
  if (c.boundary_data.kind == DataKindConfig::gaussian_beam) {
    const auto& b = c.boundary_data.beam;
    if (!(b.f > 0)) throw ConfigError("gaussian-beam needs a carrier frequency f > 0");
    if (!(b.sigma > 0)) throw ConfigError("gaussian-beam needs sigma > 0");
    if (std::abs(std::hypot(b.d[0], b.d[1], b.d[2]) - 1.0) > 1e-12) throw ConfigError("gaussian-beam direction must be a unit vector");
    if (b.sigma_w && !(*b.sigma_w > 0)) throw ConfigError("sigma_w must be positive");
  } else {
    if (c.boundary_data.pulse.m < 0) throw ConfigError("polynomial-pulse needs m >= 0");
  }
  const auto& o = c.observation;
  if (o.kind == ObservationKind::grid && (o.n < 1 || !(o.extent > 0))) throw ConfigError("observation grid needs n >= 1 and extent > 0");
  if (o.kind == ObservationKind::circle && (o.n < 1 || !(o.radius > 0))) throw ConfigError("observation circle needs n >= 1 and radius > 0");
}

inline RunConfig config_from_json(const json& j, const std::filesystem::path& base_dir = {}) {
  using namespace detail;
  check_keys(j, "config", {"geometry", "time", "contour", "rule", "formulation", "boundary_data", "observation",
                           "output", "workers", "spectrum"});
  RunConfig c;
  {
    const json& g = j.contains("geometry") ? j.at("geometry") : json::object({{"kind", "sphere-analytic"}});
    check_keys(g, "geometry", {"kind", "path", "subdivisions", "grid_degree", "numerator", "denominator"});
    const auto kind = get<std::string>(g, "kind", "geometry");
    if (kind == "sphere-analytic") {
      c.geometry.kind = GeometryKind::sphere_analytic;
      c.geometry.grid_degree = get_or<int>(g, "grid_degree", "geometry", 0);
    } else if (kind == "mesh") {
      c.geometry.kind = GeometryKind::mesh;
      std::filesystem::path p = get<std::string>(g, "path", "geometry");
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      c.geometry.mesh_path = p.lexically_normal().string();
    } else if (kind == "icosphere") {
      c.geometry.kind = GeometryKind::icosphere;
      c.geometry.subdivisions = get_or<int>(g, "subdivisions", "geometry", 3);
    } else if (kind == "synthetic") {
      c.geometry.kind = GeometryKind::synthetic;
      if (!g.contains("numerator") || !g.contains("denominator"))
        throw ConfigError("synthetic geometry needs numerator and denominator");
      c.geometry.numerator = to_complex_list(g.at("numerator"), "geometry.numerator");
      c.geometry.denominator = to_complex_list(g.at("denominator"), "geometry.denominator");
    } else {
      throw ConfigError("unknown geometry kind '" + kind + "'");
    }
  }
  {
    if (!j.contains("time")) throw ConfigError("missing key 'time' in config");
    const json& t = j.at("time");
    check_keys(t, "time", {"c", "t_final", "n_steps"});
    c.c = get<double>(t, "c", "time");
    c.t_final = get<double>(t, "t_final", "time");
    c.n_steps = get<int>(t, "n_steps", "time");
  }
  {
    if (!j.contains("contour")) throw ConfigError("missing key 'contour' in config");
    const json& k = j.at("contour");
    check_keys(k, "contour", {"lambda", "n_freq"});
    c.lambda = get<double>(k, "lambda", "contour");
    c.n_freq = get<int>(k, "n_freq", "contour");
  }
  c.rule = get_or<std::string>(j, "rule", "config", "backward-euler");
  if (j.contains("formulation")) {
    const json& f = j.at("formulation");
    check_keys(f, "formulation", {"kind", "eta"});
    Formulation form;
    try {
      form.kind = Formulation::kind_from_name(get<std::string>(f, "kind", "formulation"));
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("formulation: ") + e.what());
    }
    if (form.kind == FormulationKind::combined_const) {
      if (!f.contains("eta")) throw ConfigError("combined-const needs eta");
      form.eta = to_complex(f.at("eta"), "formulation.eta");
    } else if (f.contains("eta")) {
      throw ConfigError("eta applies to combined-const only");
    }
    c.formulation = form;
  }
  if (j.contains("boundary_data")) {
    const json& b = j.at("boundary_data");
    const auto kind = get<std::string>(b, "kind", "boundary_data");
    if (kind == "polynomial-pulse") {
      check_keys(b, "boundary_data", {"kind", "a", "b", "m", "p"});
      c.boundary_data.kind = DataKindConfig::polynomial_pulse;
      auto& q = c.boundary_data.pulse;
      q.a = get<double>(b, "a", "boundary_data");
      q.b = get<double>(b, "b", "boundary_data");
      q.m = get<int>(b, "m", "boundary_data");
      q.p = get<double>(b, "p", "boundary_data");
    } else if (kind == "gaussian-beam") {
      check_keys(b, "boundary_data", {"kind", "f", "t_p", "sigma", "d", "sigma_w"});
      c.boundary_data.kind = DataKindConfig::gaussian_beam;
      auto& q = c.boundary_data.beam;
      q.f = get<double>(b, "f", "boundary_data");
      q.t_p = get_or<double>(b, "t_p", "boundary_data", q.t_p);
      q.sigma = get_or<double>(b, "sigma", "boundary_data", q.sigma);
      if (b.contains("d")) q.d = to_vec3(b.at("d"), "boundary_data.d");
      if (b.contains("sigma_w")) q.sigma_w = get<double>(b, "sigma_w", "boundary_data");
    } else {
      throw ConfigError("unknown boundary_data kind '" + kind + "'");
    }
  } else if (c.geometry.kind != GeometryKind::synthetic) {
    throw ConfigError("missing key 'boundary_data' in config");
  }
  c.boundary_data.beam.c = c.c;
  if (j.contains("observation")) {
    const json& o = j.at("observation");
    const auto kind = get<std::string>(o, "kind", "observation");
    auto& ob = c.observation;
    if (kind == "grid") {
      check_keys(o, "observation", {"kind", "extent", "n", "exclude_radius"});
      ob.kind = ObservationKind::grid;
      ob.extent = get_or<double>(o, "extent", "observation", 3.0);
      ob.n = get_or<int>(o, "n", "observation", 61);
      ob.exclude_radius = get_or<double>(o, "exclude_radius", "observation", 1.0);
    } else if (kind == "points") {
      check_keys(o, "observation", {"kind", "points"});
      ob.kind = ObservationKind::points;
      if (!o.contains("points") || !o.at("points").is_array()) throw ConfigError("observation.points must be a list");
      for (const auto& p : o.at("points")) ob.points.push_back(to_vec3(p, "observation.points"));
    } else if (kind == "circle") {
      check_keys(o, "observation", {"kind", "radius", "n"});
      ob.kind = ObservationKind::circle;
      ob.radius = get<double>(o, "radius", "observation");
      ob.n = get_or<int>(o, "n", "observation", 16);
    } else {
      throw ConfigError("unknown observation kind '" + kind + "'");
    }
  }
  if (j.contains("output")) {
    const json& o = j.at("output");
    check_keys(o, "output", {"directory", "prefix"});
    c.output.directory = get_or<std::string>(o, "directory", "output", ".");
    c.output.prefix = get_or<std::string>(o, "prefix", "output", "cqwave");
  }
  c.workers = get_or<int>(j, "workers", "config", 0);
  const bool complex_eta = c.formulation && c.formulation->kind == FormulationKind::combined_const &&
                           c.formulation->eta.imag() != 0.0;
  const auto spec = get_or<std::string>(j, "spectrum", "config", complex_eta ? "full" : "half");
  if (spec == "half") c.spectrum = SpectrumMode::half;
  else if (spec == "full") c.spectrum = SpectrumMode::full;
  else throw ConfigError("spectrum must be \"half\" or \"full\"");
  validate(c);
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

inline json config_to_json(const RunConfig& c) {
  using detail::from_complex;
  json j;
  json g;
  switch (c.geometry.kind) {
    case GeometryKind::sphere_analytic:
      g = {{"kind", "sphere-analytic"}, {"grid_degree", c.geometry.grid_degree}};
      break;
    case GeometryKind::mesh: g = {{"kind", "mesh"}, {"path", c.geometry.mesh_path}}; break;
    case GeometryKind::icosphere: g = {{"kind", "icosphere"}, {"subdivisions", c.geometry.subdivisions}}; break;
    case GeometryKind::synthetic: {
      g = {{"kind", "synthetic"}, {"numerator", json::array()}, {"denominator", json::array()}};
      for (cplx v : c.geometry.numerator) g["numerator"].push_back(from_complex(v));
      for (cplx v : c.geometry.denominator) g["denominator"].push_back(from_complex(v));
      break;
    }
  }
  j["geometry"] = g;
  j["time"] = {{"c", c.c}, {"t_final", c.t_final}, {"n_steps", c.n_steps}};
  j["contour"] = {{"lambda", c.lambda}, {"n_freq", c.n_freq}};
  j["rule"] = c.rule;
  if (c.formulation) {
    json f = {{"kind", c.formulation->name()}};
    if (c.formulation->kind == FormulationKind::combined_const) f["eta"] = from_complex(c.formulation->eta);
    j["formulation"] = f;
  }
  if (c.geometry.kind != GeometryKind::synthetic) {
    if (c.boundary_data.kind == DataKindConfig::polynomial_pulse) {
      const auto& q = c.boundary_data.pulse;
      j["boundary_data"] = {{"kind", "polynomial-pulse"}, {"a", q.a}, {"b", q.b}, {"m", q.m}, {"p", q.p}};
    } else {
      const auto& q = c.boundary_data.beam;
      json b = {{"kind", "gaussian-beam"}, {"f", q.f}, {"t_p", q.t_p}, {"sigma", q.sigma}, {"d", {q.d[0], q.d[1], q.d[2]}}};
      if (q.sigma_w) b["sigma_w"] = *q.sigma_w;
      j["boundary_data"] = b;
    }
    const auto& o = c.observation;
    switch (o.kind) {
      case ObservationKind::grid:
        j["observation"] = {{"kind", "grid"}, {"extent", o.extent}, {"n", o.n}, {"exclude_radius", o.exclude_radius}};
        break;
      case ObservationKind::circle: j["observation"] = {{"kind", "circle"}, {"radius", o.radius}, {"n", o.n}}; break;
      case ObservationKind::points: {
        json pts = json::array();
        for (const auto& p : o.points) pts.push_back({p[0], p[1], p[2]});
        j["observation"] = {{"kind", "points"}, {"points", pts}};
        break;
      }
    }
  }
  j["output"] = {{"directory", c.output.directory}, {"prefix", c.output.prefix}};
  j["workers"] = c.workers;
  j["spectrum"] = c.spectrum == SpectrumMode::half ? "half" : "full";
  return j;
}

/// Worker count: CQWAVE_WORKERS overrides the config; 0 means available parallelism.
inline int effective_workers(const RunConfig& c) {
  int w = c.workers;
  if (const char* env = std::getenv("CQWAVE_WORKERS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 0) throw ConfigError("CQWAVE_WORKERS must be a non-negative integer");
    w = static_cast<int>(v);
  }
  if (w == 0) w = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return w;
}

/// Observation points of the config (before any near-surface filtering).
inline std::vector<Vec3> observation_points(const ObservationConfig& o) {
  std::vector<Vec3> pts;
  switch (o.kind) {
    case ObservationKind::grid:
      for (int i = 0; i < o.n; ++i)
        for (int j = 0; j < o.n; ++j) {
          const double x = o.n == 1 ? 0.0 : -o.extent + 2.0 * o.extent * i / (o.n - 1);
          const double y = o.n == 1 ? 0.0 : -o.extent + 2.0 * o.extent * j / (o.n - 1);
          if (x * x + y * y <= o.exclude_radius * o.exclude_radius) continue;
          pts.push_back({x, y, 0.0});
        }
      break;
    case ObservationKind::circle:
      for (int i = 0; i < o.n; ++i) {
        const double phi = 2.0 * std::numbers::pi * i / o.n;
        pts.push_back({o.radius * std::cos(phi), o.radius * std::sin(phi), 0.0});
      }
      break;
    case ObservationKind::points: pts = o.points; break;
  }
  return pts;
}

}  // namespace cqwave
