#pragma once

// Discrete curvature and the scale-invariant functionals.
//
// Convention: the mean curvature vector is the Laplace-Beltrami operator
// applied to the position map, so |H| = k1 + k2 and H points inward on a
// convex surface. With this choice W = (1/4) int |H|^2 equals 4 pi on every
// round sphere, and int <x, H> = -2A on a centered sphere.

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "willmiso/mesh.hpp"

namespace willmiso {

/// Integrated cotangent Laplacian of the positions, (1/2) sum (cot a + cot b)(x_j - x_i).
inline VectorField integrated_laplacian(const TriMesh& mesh) {
  VectorField lap(mesh.vertices.size(), Vec3::Zero());
  for (const Face& f : mesh.faces) {
    const TriangleGeometry g = triangle_geometry(mesh, f);
    for (int c = 0; c < 3; ++c) {
      const int a = f[(c + 1) % 3];
      const int b = f[(c + 2) % 3];
      const Vec3 d = 0.5 * g.cot[c] * (mesh.vertices[b] - mesh.vertices[a]);
      lap[a] += d;
      lap[b] -= d;
    }
  }
  return lap;
}

inline VectorField mean_curvature_vector(const TriMesh& mesh) {
  VectorField h = integrated_laplacian(mesh);
  const ScalarField areas = vertex_areas(mesh);
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(areas[i] > 0.0)) {
      throw Error(ErrorKind::DegenerateNormal, "zero-area vertex star at " + std::to_string(i));
    }
    h[i] /= areas[i];
  }
  return h;
}

/// Interior angles summed per vertex.
inline ScalarField angle_sums(const TriMesh& mesh) {
  ScalarField sums(mesh.vertices.size(), 0.0);
  for (const Face& f : mesh.faces) {
    for (int c = 0; c < 3; ++c) {
      const Vec3& p = mesh.vertices[f[c]];
      const Vec3 u = mesh.vertices[f[(c + 1) % 3]] - p;
      const Vec3 w = mesh.vertices[f[(c + 2) % 3]] - p;
      sums[f[c]] += std::atan2(u.cross(w).norm(), u.dot(w));
    }
  }
  return sums;
}

/// Integrated Gauss curvature per vertex (angle defect).
inline ScalarField angle_defects(const TriMesh& mesh) {
  ScalarField d = angle_sums(mesh);
  for (double& x : d) x = 2.0 * std::numbers::pi - x;
  return d;
}

/// Pointwise Gauss curvature: angle defect over mixed vertex area.
inline ScalarField gauss_curvature(const TriMesh& mesh) {
  ScalarField k = angle_defects(mesh);
  const ScalarField areas = vertex_areas(mesh);
  for (std::size_t i = 0; i < k.size(); ++i) k[i] /= areas[i];
  return k;
}

inline double total_gauss_curvature(const TriMesh& mesh) {
  CompensatedSum s;
  for (double d : angle_defects(mesh)) s.add(d);
  return s.value();
}

/// W = (1/4) sum |H_i|^2 A_i, evaluated as (1/4) sum |L_i|^2 / A_i.
inline double willmore_energy(const TriMesh& mesh) {
  const VectorField lap = integrated_laplacian(mesh);
  const ScalarField areas = vertex_areas(mesh);
  CompensatedSum s;
  for (std::size_t i = 0; i < lap.size(); ++i) s.add(lap[i].squaredNorm() / areas[i]);
  return 0.25 * s.value();
}

inline const double kIsoConstant = std::cbrt(6.0 * std::sqrt(std::numbers::pi));

/// Isoperimetric ratio from area and volume; 1 for a round sphere.
inline double iso_ratio_from(double area, double volume) {
  if (!(volume > 0.0)) {
    throw Error(ErrorKind::NonPositiveVolume, "enclosed volume " + std::to_string(volume) + " <= 0");
  }
  return kIsoConstant * std::cbrt(volume) / std::sqrt(area);
}

inline double iso_ratio(const TriMesh& mesh) {
  return iso_ratio_from(total_area(mesh), enclosed_volume(mesh));
}

struct SurfaceMetrics {
  double area = 0.0;
  double volume = 0.0;
  double iso_ratio = 0.0;
  double willmore = 0.0;
  double total_sff = 0.0;    // int |A|^2
  double total_gauss = 0.0;  // int K
};

inline SurfaceMetrics metrics(const TriMesh& mesh) {
  SurfaceMetrics m;
  m.area = total_area(mesh);
  m.volume = enclosed_volume(mesh);
  m.iso_ratio = iso_ratio_from(m.area, m.volume);
  m.willmore = willmore_energy(mesh);
  m.total_gauss = total_gauss_curvature(mesh);
  // |A|^2 = |H|^2 - 2K pointwise
  m.total_sff = 4.0 * m.willmore - 2.0 * m.total_gauss;
  return m;
}

inline std::string metrics_csv_header() { return "A,V,I,W,total_sff,total_gauss"; }

inline std::string metrics_csv_row(const SurfaceMetrics& m) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%.12e,%.12e,%.12e,%.12e,%.12e,%.12e", m.area, m.volume,
                m.iso_ratio, m.willmore, m.total_sff, m.total_gauss);
  return buf;
}

}  // namespace willmiso
