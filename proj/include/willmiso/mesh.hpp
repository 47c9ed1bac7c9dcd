#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "willmiso/errors.hpp"

namespace willmiso {

using Vec3 = Eigen::Vector3d;
using Face = std::array<int, 3>;

/// Per-vertex field; positions, normals, curvature vectors or variation fields.
using VectorField = std::vector<Vec3>;
using ScalarField = std::vector<double>;

/// Closed oriented triangle mesh. Faces wind counter-clockwise seen from
/// outside, so enclosed_volume() is positive.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_faces() const { return faces.size(); }
};

/// Neumaier-compensated accumulator. Summation order is the caller's loop
/// order, so results are reproducible run to run.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// ---------------------------------------------------------------------------
// Per-triangle geometry

struct TriangleGeometry {
  Vec3 cross;                   // (p1 - p0) x (p2 - p0), length = 2 * area
  double area = 0.0;
  std::array<double, 3> cot{};  // cotangent of the interior angle at each corner
  std::array<double, 3> sq_edge{};  // squared length of the edge opposite each corner
};

inline TriangleGeometry triangle_geometry(const Vec3& p0, const Vec3& p1, const Vec3& p2) {
  TriangleGeometry g;
  g.cross = (p1 - p0).cross(p2 - p0);
  const double twice_area = g.cross.norm();
  g.area = 0.5 * twice_area;
  const std::array<const Vec3*, 3> p{&p0, &p1, &p2};
  for (int c = 0; c < 3; ++c) {
    const Vec3 u = *p[(c + 1) % 3] - *p[c];
    const Vec3 w = *p[(c + 2) % 3] - *p[c];
    g.cot[c] = u.dot(w) / twice_area;
    g.sq_edge[c] = (*p[(c + 2) % 3] - *p[(c + 1) % 3]).squaredNorm();
  }
  return g;
}

inline TriangleGeometry triangle_geometry(const TriMesh& mesh, const Face& f) {
  return triangle_geometry(mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]);
}

/// Mixed Voronoi share of a triangle's area for each of its corners.
inline std::array<double, 3> mixed_area_shares(const TriangleGeometry& g) {
  std::array<double, 3> share{};
  int obtuse = -1;
  for (int c = 0; c < 3; ++c) {
    if (g.cot[c] < 0.0) obtuse = c;
  }
  if (obtuse < 0) {
    for (int c = 0; c < 3; ++c) {
      // edge (c, c+1) is opposite corner c+2; edge (c, c+2) is opposite c+1
      share[c] = 0.125 * (g.sq_edge[(c + 2) % 3] * g.cot[(c + 2) % 3] +
                          g.sq_edge[(c + 1) % 3] * g.cot[(c + 1) % 3]);
    }
  } else {
    for (int c = 0; c < 3; ++c) share[c] = (c == obtuse) ? 0.5 * g.area : 0.25 * g.area;
  }
  return share;
}

// ---------------------------------------------------------------------------
// Combinatorics and validation

inline std::uint64_t edge_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

struct EdgeCounts {
  std::size_t undirected = 0;
  std::size_t boundary = 0;       // undirected edges with one incident face
  std::size_t non_manifold = 0;   // more than two incident faces
  std::size_t misoriented = 0;    // shared edge traversed in the same direction twice
};

inline EdgeCounts count_edges(const TriMesh& mesh) {
  std::unordered_map<std::uint64_t, int> directed;
  directed.reserve(mesh.faces.size() * 3);
  for (const Face& f : mesh.faces) {
    for (int c = 0; c < 3; ++c) ++directed[edge_key(f[c], f[(c + 1) % 3])];
  }
  EdgeCounts counts;
  std::unordered_map<std::uint64_t, std::pair<int, int>> undirected;
  for (const auto& [key, n] : directed) {
    const int a = static_cast<int>(key >> 32);
    const int b = static_cast<int>(key & 0xffffffffu);
    const std::uint64_t k = edge_key(std::min(a, b), std::max(a, b));
    auto& slot = undirected[k];
    if (a < b) {
      slot.first += n;
    } else {
      slot.second += n;
    }
  }
  counts.undirected = undirected.size();
  for (const auto& [key, fwd_back] : undirected) {
    const int total = fwd_back.first + fwd_back.second;
    if (total == 1) {
      ++counts.boundary;
    } else if (total > 2) {
      ++counts.non_manifold;
    } else if (fwd_back.first != 1 || fwd_back.second != 1) {
      ++counts.misoriented;
    }
  }
  return counts;
}

inline double bbox_diagonal(const TriMesh& mesh) {
  if (mesh.vertices.empty()) return 0.0;
  Vec3 lo = mesh.vertices.front();
  Vec3 hi = lo;
  for (const Vec3& p : mesh.vertices) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

struct ValidationReport {
  bool closed = false;
  bool oriented = false;
  bool manifold = false;
  bool indices_ok = false;
  long euler_characteristic = 0;
  std::size_t boundary_edges = 0;
  std::size_t degenerate_faces = 0;
  std::vector<std::string> failures;

  bool ok() const { return failures.empty(); }
};

inline ValidationReport validate(const TriMesh& mesh) {
  ValidationReport r;
  r.indices_ok = true;
  const int n = static_cast<int>(mesh.vertices.size());
  for (const Face& f : mesh.faces) {
    for (int c = 0; c < 3; ++c) {
      if (f[c] < 0 || f[c] >= n) r.indices_ok = false;
    }
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) r.indices_ok = false;
  }
  if (!r.indices_ok) {
    r.failures.emplace_back("face index out of range or repeated within a face");
    return r;
  }
  if (mesh.faces.empty()) {
    r.failures.emplace_back("mesh has no faces");
    return r;
  }

  const EdgeCounts e = count_edges(mesh);
  r.boundary_edges = e.boundary;
  r.closed = e.boundary == 0;
  r.manifold = e.non_manifold == 0;
  r.oriented = e.misoriented == 0;
  r.euler_characteristic = static_cast<long>(mesh.vertices.size()) -
                           static_cast<long>(e.undirected) +
                           static_cast<long>(mesh.faces.size());
  if (!r.closed) r.failures.push_back("boundary edge detected (" + std::to_string(e.boundary) + ")");
  if (!r.manifold) r.failures.push_back("non-manifold edge detected (" + std::to_string(e.non_manifold) + ")");
  if (!r.oriented) r.failures.push_back("inconsistent orientation (" + std::to_string(e.misoriented) + " edges)");
  if (r.euler_characteristic != 2) {
    r.failures.push_back("Euler characteristic " + std::to_string(r.euler_characteristic) + " != 2");
  }

  const double diag = bbox_diagonal(mesh);
  const double min_area = 1e-14 * diag * diag;
  for (const Face& f : mesh.faces) {
    const Vec3& p0 = mesh.vertices[f[0]];
    const double a = 0.5 * (mesh.vertices[f[1]] - p0).cross(mesh.vertices[f[2]] - p0).norm();
    if (!(a > min_area)) ++r.degenerate_faces;
  }
  if (r.degenerate_faces > 0) {
    r.failures.push_back("degenerate faces (" + std::to_string(r.degenerate_faces) + ")");
  }
  return r;
}

/// Throws InvalidMesh with the report's failures when validation fails.
inline void require_valid(const TriMesh& mesh, const std::string& context) {
  const ValidationReport r = validate(mesh);
  if (!r.ok()) {
    std::string msg = context + ":";
    for (const auto& f : r.failures) msg += " " + f + ";";
    throw Error(ErrorKind::InvalidMesh, msg);
  }
}

// ---------------------------------------------------------------------------
// Elementary integrals

inline double total_area(const TriMesh& mesh) {
  CompensatedSum s;
  for (const Face& f : mesh.faces) {
    const Vec3& p0 = mesh.vertices[f[0]];
    s.add(0.5 * (mesh.vertices[f[1]] - p0).cross(mesh.vertices[f[2]] - p0).norm());
  }
  return s.value();
}

/// Signed enclosed volume, (1/6) sum det(p0, p1, p2) over faces.
inline double enclosed_volume(const TriMesh& mesh) {
  // Centering at the first vertex keeps the determinants small, which makes
  // the result insensitive to large translations.
  const Vec3 origin = mesh.vertices.empty() ? Vec3::Zero() : mesh.vertices.front();
  CompensatedSum s;
  for (const Face& f : mesh.faces) {
    const Vec3 a = mesh.vertices[f[0]] - origin;
    const Vec3 b = mesh.vertices[f[1]] - origin;
    const Vec3 c = mesh.vertices[f[2]] - origin;
    s.add(a.dot(b.cross(c)));
  }
  return s.value() / 6.0;
}

/// Mixed Voronoi vertex areas (obtuse-safe); they partition total_area().
inline ScalarField vertex_areas(const TriMesh& mesh) {
  ScalarField areas(mesh.vertices.size(), 0.0);
  for (const Face& f : mesh.faces) {
    const auto share = mixed_area_shares(triangle_geometry(mesh, f));
    for (int c = 0; c < 3; ++c) areas[f[c]] += share[c];
  }
  return areas;
}

/// Area-weighted vertex normals, normalized.
inline VectorField outward_normals(const TriMesh& mesh) {
  VectorField normals(mesh.vertices.size(), Vec3::Zero());
  for (const Face& f : mesh.faces) {
    const Vec3& p0 = mesh.vertices[f[0]];
    const Vec3 cr = (mesh.vertices[f[1]] - p0).cross(mesh.vertices[f[2]] - p0);
    for (int c = 0; c < 3; ++c) normals[f[c]] += cr;
  }
  for (std::size_t i = 0; i < normals.size(); ++i) {
    const double len = normals[i].norm();
    if (!(len > 0.0)) {
      throw Error(ErrorKind::DegenerateNormal, "zero normal at vertex " + std::to_string(i));
    }
    normals[i] /= len;
  }
  return normals;
}

// ---------------------------------------------------------------------------
// Rigid motions and scaling

inline TriMesh translated(TriMesh mesh, const Vec3& offset) {
  for (Vec3& p : mesh.vertices) p += offset;
  return mesh;
}

inline TriMesh scaled(TriMesh mesh, double factor) {
  for (Vec3& p : mesh.vertices) p *= factor;
  return mesh;
}

inline TriMesh transformed(TriMesh mesh, const Eigen::Matrix3d& rotation, const Vec3& offset) {
  for (Vec3& p : mesh.vertices) p = rotation * p + offset;
  return mesh;
}

inline Vec3 vertex_centroid(const TriMesh& mesh) {
  Vec3 c = Vec3::Zero();
  for (const Vec3& p : mesh.vertices) c += p;
  return mesh.vertices.empty() ? c : Vec3(c / static_cast<double>(mesh.vertices.size()));
}

/// Area-weighted centroid of the surface.
inline Vec3 surface_centroid(const TriMesh& mesh) {
  Vec3 c = Vec3::Zero();
  double a = 0.0;
  for (const Face& f : mesh.faces) {
    const Vec3& p0 = mesh.vertices[f[0]];
    const Vec3& p1 = mesh.vertices[f[1]];
    const Vec3& p2 = mesh.vertices[f[2]];
    const double fa = 0.5 * (p1 - p0).cross(p2 - p0).norm();
    c += fa * (p0 + p1 + p2) / 3.0;
    a += fa;
  }
  return a > 0.0 ? Vec3(c / a) : c;
}

inline TriMesh flip_face(TriMesh mesh, std::size_t face) {
  std::swap(mesh.faces.at(face)[1], mesh.faces.at(face)[2]);
  return mesh;
}

inline TriMesh remove_face(TriMesh mesh, std::size_t face) {
  mesh.faces.erase(mesh.faces.begin() + static_cast<std::ptrdiff_t>(face));
  return mesh;
}

/// Ratio of inscribed to circumscribed radius times two; 1 for equilateral.
inline double triangle_quality(const Vec3& p0, const Vec3& p1, const Vec3& p2) {
  const double a = (p1 - p2).norm();
  const double b = (p0 - p2).norm();
  const double c = (p0 - p1).norm();
  const double s = 0.5 * (a + b + c);
  const double prod = (s - a) * (s - b) * (s - c);
  if (!(prod > 0.0) || !(a * b * c > 0.0)) return 0.0;
  return 8.0 * prod / (a * b * c);
}

inline double min_face_quality(const TriMesh& mesh) {
  double q = 1.0;
  for (const Face& f : mesh.faces) {
    q = std::min(q, triangle_quality(mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]));
  }
  return q;
}

inline double mean_edge_length(const TriMesh& mesh) {
  CompensatedSum s;
  for (const Face& f : mesh.faces) {
    for (int c = 0; c < 3; ++c) s.add((mesh.vertices[f[c]] - mesh.vertices[f[(c + 1) % 3]]).norm());
  }
  return mesh.faces.empty() ? 0.0 : s.value() / (3.0 * static_cast<double>(mesh.faces.size()));
}

// ---------------------------------------------------------------------------
// Generators

/// Midpoint 1-to-4 subdivision. `project` is applied to every new vertex.
template <typename Project>
TriMesh subdivide(const TriMesh& mesh, Project&& project) {
  TriMesh out;
  out.vertices = mesh.vertices;
  out.faces.reserve(mesh.faces.size() * 4);
  std::unordered_map<std::uint64_t, int> midpoint;
  midpoint.reserve(mesh.faces.size() * 2);
  auto mid = [&](int a, int b) {
    const std::uint64_t k = edge_key(std::min(a, b), std::max(a, b));
    auto it = midpoint.find(k);
    if (it != midpoint.end()) return it->second;
    const int idx = static_cast<int>(out.vertices.size());
    out.vertices.push_back(project(Vec3(0.5 * (mesh.vertices[a] + mesh.vertices[b]))));
    midpoint.emplace(k, idx);
    return idx;
  };
  for (const Face& f : mesh.faces) {
    const int ab = mid(f[0], f[1]);
    const int bc = mid(f[1], f[2]);
    const int ca = mid(f[2], f[0]);
    out.faces.push_back({f[0], ab, ca});
    out.faces.push_back({f[1], bc, ab});
    out.faces.push_back({f[2], ca, bc});
    out.faces.push_back({ab, bc, ca});
  }
  return out;
}

inline TriMesh subdivide(const TriMesh& mesh) {
  return subdivide(mesh, [](const Vec3& p) { return p; });
}

inline TriMesh icosahedron(double radius = 1.0) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  TriMesh m;
  m.vertices = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                {0, -1, -t}, {0, 1, -t}, {t, 0, -1},  {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  for (Vec3& p : m.vertices) p = radius * p.normalized();
  m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
             {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
             {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  return m;
}

/// Icosphere centered at the origin; level 0 is the icosahedron.
inline TriMesh icosphere(double radius, int level) {
  if (!(radius > 0.0) || level < 0) {
    throw Error(ErrorKind::InvalidArgument, "icosphere requires radius > 0 and level >= 0");
  }
  TriMesh m = icosahedron(radius);
  for (int l = 0; l < level; ++l) {
    m = subdivide(m, [radius](const Vec3& p) { return Vec3(radius * p.normalized()); });
  }
  return m;
}

/// Axis-aligned unit cube [0,1]^3 as 12 outward-wound triangles.
inline TriMesh unit_cube() {
  TriMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
  m.faces = {{0, 2, 1}, {0, 3, 2}, {4, 5, 6}, {4, 6, 7}, {0, 1, 5}, {0, 5, 4},
             {1, 2, 6}, {1, 6, 5}, {2, 3, 7}, {2, 7, 6}, {3, 0, 4}, {3, 4, 7}};
  return m;
}

}  // namespace willmiso
