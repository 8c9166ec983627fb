#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <queue>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cqwave/errors.hpp"
#include "cqwave/spherical_harmonics.hpp"

namespace cqwave {

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

using Triangle = std::array<int, 3>;

/// Flat-panel triangle mesh with cached centroid, area, outward normal and diameter per panel.
class SurfaceMesh {
 public:
  SurfaceMesh() = default;

  /// Validates, fixes orientation (consistent, then outward) and caches panel geometry.
  SurfaceMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles)
      : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
    if (triangles_.empty()) throw MeshError("mesh has no triangles");
    for (const auto& t : triangles_)
      for (int v : t)
        if (v < 0 || v >= static_cast<int>(vertices_.size())) throw MeshError("triangle references a missing vertex");
    check_degenerate();
    closed_ = orient_consistently();
    if (closed_ && signed_volume() < 0.0)
      for (auto& t : triangles_) std::swap(t[1], t[2]);
    cache_geometry();
  }

  const std::vector<Vec3>& vertices() const noexcept { return vertices_; }
  const std::vector<Triangle>& triangles() const noexcept { return triangles_; }
  int size() const noexcept { return static_cast<int>(triangles_.size()); }
  const Vec3& centroid(int i) const { return centroids_[static_cast<size_t>(i)]; }
  const Vec3& normal(int i) const { return normals_[static_cast<size_t>(i)]; }
  double area(int i) const { return areas_[static_cast<size_t>(i)]; }
  double diameter(int i) const { return diameters_[static_cast<size_t>(i)]; }
  const std::vector<Vec3>& centroids() const noexcept { return centroids_; }
  const std::vector<double>& areas() const noexcept { return areas_; }
  std::array<Vec3, 3> corners(int i) const {
    const auto& t = triangles_[static_cast<size_t>(i)];
    return {vertices_[static_cast<size_t>(t[0])], vertices_[static_cast<size_t>(t[1])], vertices_[static_cast<size_t>(t[2])]};
  }

  /// Every edge shared by exactly two panels.
  bool closed() const noexcept { return closed_; }
  double total_area() const {
    double a = 0.0;
    for (double x : areas_) a += x;
    return a;
  }
  /// Flux of the position field x -> x through the surface, i.e. 3 * enclosed volume.
  double position_flux() const {
    double f = 0.0;
    for (int i = 0; i < size(); ++i) f += area(i) * dot(centroid(i), normal(i));
    return f;
  }
  double max_diameter() const { return *std::max_element(diameters_.begin(), diameters_.end()); }

  void require_closed() const {
    if (!closed_) throw MeshError("integral formulations need a closed, watertight surface");
  }

 private:
  void check_degenerate() const {
    Vec3 lo = vertices_.front(), hi = vertices_.front();
    for (const auto& v : vertices_)
      for (int d = 0; d < 3; ++d) lo[d] = std::min(lo[d], v[d]), hi[d] = std::max(hi[d], v[d]);
    const double bbox = norm(hi - lo);
    for (size_t i = 0; i < triangles_.size(); ++i) {
      const auto& t = triangles_[i];
      const Vec3& a = vertices_[static_cast<size_t>(t[0])];
      const double area = 0.5 * norm(cross(vertices_[static_cast<size_t>(t[1])] - a, vertices_[static_cast<size_t>(t[2])] - a));
      if (!(area > 1e-14 * bbox * bbox))
        throw MeshError("triangle " + std::to_string(i) + " is degenerate (area " + std::to_string(area) + ")");
    }
  }

  // Breadth-first propagation of orientation across shared edges. Returns true
  // when every edge has exactly two incident panels.
  bool orient_consistently() {
    std::map<std::pair<int, int>, std::vector<int>> edges;
    for (size_t i = 0; i < triangles_.size(); ++i)
      for (int e = 0; e < 3; ++e) {
        int a = triangles_[i][static_cast<size_t>(e)], b = triangles_[i][static_cast<size_t>((e + 1) % 3)];
        edges[{std::min(a, b), std::max(a, b)}].push_back(static_cast<int>(i));
      }
    bool closed = true;
    for (const auto& [key, tris] : edges)
      if (tris.size() != 2) closed = false;

    auto has_directed = [&](int t, int a, int b) {
      const auto& tri = triangles_[static_cast<size_t>(t)];
      for (int e = 0; e < 3; ++e)
        if (tri[static_cast<size_t>(e)] == a && tri[static_cast<size_t>((e + 1) % 3)] == b) return true;
      return false;
    };
    std::vector<char> seen(triangles_.size(), 0);
    for (size_t seed = 0; seed < triangles_.size(); ++seed) {
      if (seen[seed]) continue;
      seen[seed] = 1;
      std::queue<int> q;
      q.push(static_cast<int>(seed));
      while (!q.empty()) {
        const int t = q.front();
        q.pop();
        for (int e = 0; e < 3; ++e) {
          const int a = triangles_[static_cast<size_t>(t)][static_cast<size_t>(e)];
          const int b = triangles_[static_cast<size_t>(t)][static_cast<size_t>((e + 1) % 3)];
          for (int nb : edges[{std::min(a, b), std::max(a, b)}]) {
            if (nb == t || seen[static_cast<size_t>(nb)]) continue;
            // A consistent neighbour traverses the shared edge as b -> a.
            if (has_directed(nb, a, b)) std::swap(triangles_[static_cast<size_t>(nb)][1], triangles_[static_cast<size_t>(nb)][2]);
            seen[static_cast<size_t>(nb)] = 1;
            q.push(nb);
          }
        }
      }
    }
    return closed;
  }

  double signed_volume() const {
    double v = 0.0;
    for (const auto& t : triangles_)
      v += dot(vertices_[static_cast<size_t>(t[0])],
               cross(vertices_[static_cast<size_t>(t[1])], vertices_[static_cast<size_t>(t[2])]));
    return v / 6.0;
  }

  void cache_geometry() {
    for (int i = 0; i < size(); ++i) {
      const auto [a, b, c] = corners(i);
      const Vec3 n = cross(b - a, c - a);
      const double len = norm(n);
      centroids_.push_back((1.0 / 3.0) * (a + b + c));
      areas_.push_back(0.5 * len);
      normals_.push_back((1.0 / len) * n);
      diameters_.push_back(std::max({norm(b - a), norm(c - b), norm(a - c)}));
    }
  }

  std::vector<Vec3> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<Vec3> centroids_;
  std::vector<Vec3> normals_;
  std::vector<double> areas_;
  std::vector<double> diameters_;
  bool closed_ = false;
};

/// ASCII OFF reader. Comments start with '#'; faces must be triangles.
inline SurfaceMesh parse_off(std::istream& in) {
  std::string raw;
  int line_no = 0;
  auto next = [&](std::string& out) {
    while (std::getline(in, raw)) {
      ++line_no;
      auto hash = raw.find('#');
      if (hash != std::string::npos) raw.erase(hash);
      if (raw.find_first_not_of(" \t\r") != std::string::npos) {
        out = raw;
        return true;
      }
    }
    return false;
  };
  std::string line;
  if (!next(line)) throw ParseError("empty OFF file", 0);
  {
    std::istringstream ss(line);
    std::string head;
    ss >> head;
    if (head != "OFF") throw ParseError("missing OFF header", line_no);
    // Counts may follow the header on the same line.
    std::string rest;
    std::getline(ss, rest);
    if (rest.find_first_not_of(" \t\r") != std::string::npos)
      line = rest;
    else if (!next(line))
      throw ParseError("missing counts line", line_no);
  }
  long nv = -1, nf = -1, ne = 0;
  {
    std::istringstream ss(line);
    if (!(ss >> nv >> nf) || nv < 0 || nf < 0) throw ParseError("bad counts line", line_no);
    ss >> ne;
  }
  std::vector<Vec3> verts;
  verts.reserve(static_cast<size_t>(nv));
  for (long i = 0; i < nv; ++i) {
    if (!next(line)) throw ParseError("unexpected end of file in vertex list", line_no);
    std::istringstream ss(line);
    Vec3 v;
    if (!(ss >> v[0] >> v[1] >> v[2])) throw ParseError("bad vertex line", line_no);
    if (!std::isfinite(v[0]) || !std::isfinite(v[1]) || !std::isfinite(v[2]))
      throw ParseError("non-finite vertex coordinate", line_no);
    verts.push_back(v);
  }
  std::vector<Triangle> tris;
  tris.reserve(static_cast<size_t>(nf));
  for (long i = 0; i < nf; ++i) {
    if (!next(line)) throw ParseError("unexpected end of file in face list", line_no);
    std::istringstream ss(line);
    int count = 0;
    Triangle t;
    if (!(ss >> count)) throw ParseError("bad face line", line_no);
    if (count != 3) throw ParseError("only triangular faces are supported", line_no);
    if (!(ss >> t[0] >> t[1] >> t[2])) throw ParseError("bad face line", line_no);
    for (int v : t)
      if (v < 0 || v >= nv) throw ParseError("face references vertex " + std::to_string(v) + " out of range", line_no);
    tris.push_back(t);
  }
  return SurfaceMesh(std::move(verts), std::move(tris));
}

inline SurfaceMesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open mesh file " + path.string());
  try {
    return parse_off(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

inline void write_off(const SurfaceMesh& mesh, std::ostream& out) {
  char buf[96];
  out << "OFF\n" << mesh.vertices().size() << ' ' << mesh.triangles().size() << " 0\n";
  for (const auto& v : mesh.vertices()) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", v[0], v[1], v[2]);
    out << buf;
  }
  for (const auto& t : mesh.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

inline void write_off(const SurfaceMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write mesh file " + path.string());
  write_off(mesh, out);
  if (!out) throw Error("write failed: " + path.string());
}

/// Unit icosphere: 20 * 4^s faces, vertices projected onto |x| = 1.
inline SurfaceMesh icosphere(int subdivisions) {
  if (subdivisions < 0 || subdivisions > 7) throw InvalidArgument("icosphere subdivisions must be in [0, 7]");
  const double p = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, p, 0}, {1, p, 0}, {-1, -p, 0}, {1, -p, 0}, {0, -1, p}, {0, 1, p},
                         {0, -1, -p}, {0, 1, -p}, {p, 0, -1}, {p, 0, 1}, {-p, 0, -1}, {-p, 0, 1}};
  for (auto& x : v) x = (1.0 / norm(x)) * x;
  std::vector<Triangle> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                             {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                             {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      auto key = std::make_pair(std::min(a, b), std::max(a, b));
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      Vec3 m = 0.5 * (v[static_cast<size_t>(a)] + v[static_cast<size_t>(b)]);
      v.push_back((1.0 / norm(m)) * m);
      const int id = static_cast<int>(v.size()) - 1;
      mid.emplace(key, id);
      return id;
    };
    std::vector<Triangle> g;
    g.reserve(f.size() * 4);
    for (const auto& t : f) {
      const int a = midpoint(t[0], t[1]), b = midpoint(t[1], t[2]), c = midpoint(t[2], t[0]);
      g.push_back({t[0], a, c});
      g.push_back({t[1], b, a});
      g.push_back({t[2], c, b});
      g.push_back({a, b, c});
    }
    f = std::move(g);
  }
  return SurfaceMesh(std::move(v), std::move(f));
}

}  // namespace cqwave
