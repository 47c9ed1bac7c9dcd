#pragma once

// Self-intersection diagnostic: counts pairs of non-adjacent triangles that
// intersect, using a uniform grid over triangle bounding boxes.

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <vector>

#include "willmiso/mesh.hpp"

namespace willmiso {

namespace detail {

/// Segment [p, q] against triangle (a, b, c), Moller-Trumbore style.
inline bool segment_hits_triangle(const Vec3& p, const Vec3& q, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 dir = q - p;
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 h = dir.cross(e2);
  const double det = e1.dot(h);
  const double scale = e1.norm() * e2.norm() * dir.norm();
  if (std::abs(det) <= 1e-14 * scale) return false;  // parallel: ignore coplanar touching
  const double inv = 1.0 / det;
  const Vec3 s = p - a;
  const double u = inv * s.dot(h);
  if (u < 0.0 || u > 1.0) return false;
  const Vec3 qv = s.cross(e1);
  const double v = inv * dir.dot(qv);
  if (v < 0.0 || u + v > 1.0) return false;
  const double t = inv * e2.dot(qv);
  return t >= 0.0 && t <= 1.0;
}

inline bool triangles_intersect(const std::array<Vec3, 3>& x, const std::array<Vec3, 3>& y) {
  for (int k = 0; k < 3; ++k) {
    if (segment_hits_triangle(x[k], x[(k + 1) % 3], y[0], y[1], y[2])) return true;
    if (segment_hits_triangle(y[k], y[(k + 1) % 3], x[0], x[1], x[2])) return true;
  }
  return false;
}

}  // namespace detail

/// Number of intersecting face pairs that share no vertex.
inline std::size_t count_self_intersections(const TriMesh& mesh) {
  const std::size_t nf = mesh.faces.size();
  if (nf == 0) return 0;
  const double cell = std::max(2.0 * mean_edge_length(mesh), 1e-12);
  Vec3 lo = mesh.vertices.front();
  for (const Vec3& p : mesh.vertices) lo = lo.cwiseMin(p);
  auto key = [](long i, long j, long k) {
    return (static_cast<std::uint64_t>(i & 0x1fffff) << 42) | (static_cast<std::uint64_t>(j & 0x1fffff) << 21) |
           static_cast<std::uint64_t>(k & 0x1fffff);
  };
  std::unordered_map<std::uint64_t, std::vector<int>> grid;
  std::vector<std::array<long, 6>> ranges(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    Vec3 a = mesh.vertices[mesh.faces[f][0]];
    Vec3 b = a;
    for (int c = 1; c < 3; ++c) {
      a = a.cwiseMin(mesh.vertices[mesh.faces[f][c]]);
      b = b.cwiseMax(mesh.vertices[mesh.faces[f][c]]);
    }
    auto& r = ranges[f];
    for (int d = 0; d < 3; ++d) {
      r[d] = static_cast<long>(std::floor((a[d] - lo[d]) / cell));
      r[d + 3] = static_cast<long>(std::floor((b[d] - lo[d]) / cell));
    }
    for (long i = r[0]; i <= r[3]; ++i)
      for (long j = r[1]; j <= r[4]; ++j)
        for (long k = r[2]; k <= r[5]; ++k) grid[key(i, j, k)].push_back(static_cast<int>(f));
  }
  std::vector<int> candidates;
  std::size_t count = 0;
  for (std::size_t f = 0; f < nf; ++f) {
    candidates.clear();
    const auto& r = ranges[f];
    for (long i = r[0]; i <= r[3]; ++i)
      for (long j = r[1]; j <= r[4]; ++j)
        for (long k = r[2]; k <= r[5]; ++k) {
          auto it = grid.find(key(i, j, k));
          if (it == grid.end()) continue;
          for (int g : it->second) {
            if (g > static_cast<int>(f)) candidates.push_back(g);
          }
        }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    const Face& fa = mesh.faces[f];
    const std::array<Vec3, 3> x{mesh.vertices[fa[0]], mesh.vertices[fa[1]], mesh.vertices[fa[2]]};
    for (int g : candidates) {
      const Face& fb = mesh.faces[g];
      bool shared = false;
      for (int u : fa)
        for (int v : fb) shared = shared || u == v;
      if (shared) continue;
      const std::array<Vec3, 3> y{mesh.vertices[fb[0]], mesh.vertices[fb[1]], mesh.vertices[fb[2]]};
      if (detail::triangles_intersect(x, y)) ++count;
    }
  }
  return count;
}

}  // namespace willmiso
