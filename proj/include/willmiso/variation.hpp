#pragma once

// Exact gradients of the discrete functionals with respect to vertex
// positions, and the first variation of the isoperimetric ratio.

#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "willmiso/functionals.hpp"
#include "willmiso/mesh.hpp"

namespace willmiso {

/// Vertex velocity field X with an optional support mask.
struct VariationField {
  VectorField values;
  std::optional<std::vector<bool>> mask;

  VariationField() = default;
  explicit VariationField(VectorField v) : values(std::move(v)) {}
  VariationField(VectorField v, std::vector<bool> m) : values(std::move(v)), mask(std::move(m)) {
    if (mask->size() != values.size()) {
      throw Error(ErrorKind::InvalidArgument, "variation mask length mismatch");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!(*mask)[i]) values[i].setZero();
    }
  }

  std::size_t size() const { return values.size(); }
  const Vec3& operator[](std::size_t i) const { return values[i]; }
};

// ---------------------------------------------------------------------------
// Small field algebra

inline double dot(const VectorField& a, const VectorField& b) {
  CompensatedSum s;
  for (std::size_t i = 0; i < a.size(); ++i) s.add(a[i].dot(b[i]));
  return s.value();
}

inline double norm(const VectorField& a) { return std::sqrt(dot(a, a)); }

inline void axpy(double alpha, const VectorField& x, VectorField& y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

inline VectorField scaled_field(const VectorField& x, double alpha) {
  VectorField y = x;
  for (Vec3& v : y) v *= alpha;
  return y;
}

inline TriMesh displaced(const TriMesh& mesh, const VectorField& dir, double t) {
  TriMesh out = mesh;
  for (std::size_t i = 0; i < out.vertices.size(); ++i) out.vertices[i] += t * dir[i];
  return out;
}

// ---------------------------------------------------------------------------
// Gradients

inline VectorField area_gradient(const TriMesh& mesh) {
  VectorField g(mesh.vertices.size(), Vec3::Zero());
  for (const Face& f : mesh.faces) {
    const Vec3& p0 = mesh.vertices[f[0]];
    const Vec3 cr = (mesh.vertices[f[1]] - p0).cross(mesh.vertices[f[2]] - p0);
    const double len = cr.norm();
    if (!(len > 0.0)) continue;
    const Vec3 n = cr / len;
    for (int c = 0; c < 3; ++c) {
      g[f[c]] += 0.5 * n.cross(mesh.vertices[f[(c + 2) % 3]] - mesh.vertices[f[(c + 1) % 3]]);
    }
  }
  return g;
}

/// Gradient of the signed volume; equals one third of the area-weighted
/// normal sum around each vertex.
inline VectorField volume_gradient(const TriMesh& mesh) {
  VectorField g(mesh.vertices.size(), Vec3::Zero());
  for (const Face& f : mesh.faces) {
    const Vec3& p0 = mesh.vertices[f[0]];
    const Vec3 cr = (mesh.vertices[f[1]] - p0).cross(mesh.vertices[f[2]] - p0) / 6.0;
    for (int c = 0; c < 3; ++c) g[f[c]] += cr;
  }
  return g;
}

/// Quotient-rule gradient of I = k V^(1/3) A^(-1/2).
inline VectorField iso_gradient(const TriMesh& mesh) {
  const double a = total_area(mesh);
  const double v = enclosed_volume(mesh);
  const double iso = iso_ratio_from(a, v);
  VectorField gv = volume_gradient(mesh);
  const VectorField ga = area_gradient(mesh);
  for (std::size_t i = 0; i < gv.size(); ++i) gv[i] = iso * (gv[i] / (3.0 * v) - ga[i] / (2.0 * a));
  return gv;
}

/// Discrete Willmore energy and its exact gradient, by reverse-mode
/// differentiation of the cotangent Laplacian and mixed Voronoi areas.
inline double willmore_energy_and_gradient(const TriMesh& mesh, VectorField& grad) {
  const std::size_t nv = mesh.vertices.size();
  const std::size_t nf = mesh.faces.size();
  std::vector<TriangleGeometry> geom(nf);
  VectorField lap(nv, Vec3::Zero());
  ScalarField area(nv, 0.0);
  for (std::size_t fi = 0; fi < nf; ++fi) {
    const Face& f = mesh.faces[fi];
    geom[fi] = triangle_geometry(mesh, f);
    const TriangleGeometry& g = geom[fi];
    for (int c = 0; c < 3; ++c) {
      const int a = f[(c + 1) % 3];
      const int b = f[(c + 2) % 3];
      const Vec3 d = 0.5 * g.cot[c] * (mesh.vertices[b] - mesh.vertices[a]);
      lap[a] += d;
      lap[b] -= d;
    }
    const auto share = mixed_area_shares(g);
    for (int c = 0; c < 3; ++c) area[f[c]] += share[c];
  }

  CompensatedSum energy;
  VectorField adj_lap(nv);
  ScalarField adj_area(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    const double l2 = lap[i].squaredNorm();
    energy.add(l2 / area[i]);
    adj_lap[i] = 0.5 * lap[i] / area[i];
    adj_area[i] = -0.25 * l2 / (area[i] * area[i]);
  }

  grad.assign(nv, Vec3::Zero());
  for (std::size_t fi = 0; fi < nf; ++fi) {
    const Face& f = mesh.faces[fi];
    const TriangleGeometry& g = geom[fi];
    const std::array<const Vec3*, 3> p{&mesh.vertices[f[0]], &mesh.vertices[f[1]],
                                       &mesh.vertices[f[2]]};
    std::array<Vec3, 3> gp{Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
    std::array<double, 3> adj_cot{0.0, 0.0, 0.0};

    // Laplacian terms
    for (int c = 0; c < 3; ++c) {
      const int a = (c + 1) % 3;
      const int b = (c + 2) % 3;
      const Vec3 q = adj_lap[f[a]] - adj_lap[f[b]];
      const Vec3 e = *p[b] - *p[a];
      gp[b] += 0.5 * g.cot[c] * q;
      gp[a] -= 0.5 * g.cot[c] * q;
      adj_cot[c] += 0.5 * q.dot(e);
    }

    // Mixed-area terms
    int obtuse = -1;
    for (int c = 0; c < 3; ++c) {
      if (g.cot[c] < 0.0) obtuse = c;
    }
    const double twice_area = g.cross.norm();
    const Vec3 n = g.cross / twice_area;
    if (obtuse < 0) {
      for (int k = 0; k < 3; ++k) {
        const int a = (k + 1) % 3;
        const int b = (k + 2) % 3;
        const double w = 0.125 * (adj_area[f[a]] + adj_area[f[b]]);
        adj_cot[k] += w * g.sq_edge[k];
        const Vec3 de = 2.0 * w * g.cot[k] * (*p[a] - *p[b]);
        gp[a] += de;
        gp[b] -= de;
      }
    } else {
      double adj_tri = 0.0;
      for (int c = 0; c < 3; ++c) adj_tri += (c == obtuse ? 0.5 : 0.25) * adj_area[f[c]];
      for (int c = 0; c < 3; ++c) {
        gp[c] += adj_tri * 0.5 * n.cross(*p[(c + 2) % 3] - *p[(c + 1) % 3]);
      }
    }

    // Cotangent derivatives: cot = (u.w) / |u x w|
    for (int k = 0; k < 3; ++k) {
      if (adj_cot[k] == 0.0) continue;
      const int a = (k + 1) % 3;
      const int b = (k + 2) % 3;
      const Vec3 u = *p[a] - *p[k];
      const Vec3 w = *p[b] - *p[k];
      const double d = u.dot(w);
      const double cc = twice_area;
      const Vec3 dc_du = w.cross(n);
      const Vec3 dc_dw = n.cross(u);
      const Vec3 dcot_du = w / cc - (d / (cc * cc)) * dc_du;
      const Vec3 dcot_dw = u / cc - (d / (cc * cc)) * dc_dw;
      gp[a] += adj_cot[k] * dcot_du;
      gp[b] += adj_cot[k] * dcot_dw;
      gp[k] -= adj_cot[k] * (dcot_du + dcot_dw);
    }

    for (int c = 0; c < 3; ++c) grad[f[c]] += gp[c];
  }
  return 0.25 * energy.value();
}

inline VariationField willmore_gradient(const TriMesh& mesh) {
  VectorField g;
  willmore_energy_and_gradient(mesh, g);
  return VariationField(std::move(g));
}

// ---------------------------------------------------------------------------
// First variation of the isoperimetric ratio

/// Discrete flux weights: outward unit normal times |(1/3) sum of incident
/// face area vectors|, so that sum <X_i, nu_i> a_i is the exact derivative
/// of the enclosed volume.
inline VectorField flux_area_vectors(const TriMesh& mesh) {
  VectorField n(mesh.vertices.size(), Vec3::Zero());
  for (const Face& f : mesh.faces) {
    const Vec3& p0 = mesh.vertices[f[0]];
    const Vec3 cr = (mesh.vertices[f[1]] - p0).cross(mesh.vertices[f[2]] - p0) / 6.0;
    for (int c = 0; c < 3; ++c) n[f[c]] += cr;
  }
  return n;
}

/// dI/dt = I/(3A) * ( (3/2) int <X, H> dmu + (A/V) int chi_Omega div X ),
/// with the volume term written as the boundary flux int <X, nu> dmu.
inline double iso_first_variation(const TriMesh& mesh, const VariationField& x) {
  if (x.size() != mesh.vertices.size()) {
    throw Error(ErrorKind::InvalidArgument, "variation field length mismatch");
  }
  const double a = total_area(mesh);
  const double v = enclosed_volume(mesh);
  const double iso = iso_ratio_from(a, v);
  const VectorField h = mean_curvature_vector(mesh);
  const ScalarField mu = vertex_areas(mesh);
  const VectorField nu = outward_normals(mesh);
  const VectorField flux = flux_area_vectors(mesh);

  CompensatedSum curvature_term;
  CompensatedSum flux_term;
  for (std::size_t i = 0; i < x.size(); ++i) {
    curvature_term.add(x[i].dot(h[i]) * mu[i]);
    flux_term.add(x[i].dot(nu[i]) * flux[i].norm());
  }
  return iso / (3.0 * a) * (1.5 * curvature_term.value() + (a / v) * flux_term.value());
}

/// int <X, H> dmu with the mixed Voronoi measure.
inline double curvature_pairing(const TriMesh& mesh, const VectorField& x) {
  const VectorField h = mean_curvature_vector(mesh);
  const ScalarField mu = vertex_areas(mesh);
  CompensatedSum s;
  for (std::size_t i = 0; i < x.size(); ++i) s.add(x[i].dot(h[i]) * mu[i]);
  return s.value();
}

// ---------------------------------------------------------------------------
// Finite-difference consistency harness

struct FdResult {
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

/// Central differences at steps h and h/2 combined by Richardson
/// extrapolation; the relative error uses |FD| + 1e-12 as denominator.
inline FdResult fd_directional_check(const std::function<double(const TriMesh&)>& functional,
                                     const VectorField& gradient, const TriMesh& mesh,
                                     const VectorField& direction, double step) {
  auto central = [&](double h) {
    return (functional(displaced(mesh, direction, h)) - functional(displaced(mesh, direction, -h))) /
           (2.0 * h);
  };
  const double d1 = central(step);
  const double d2 = central(0.5 * step);
  FdResult r;
  r.numeric = (4.0 * d2 - d1) / 3.0;
  r.analytic = dot(gradient, direction);
  r.rel_error = std::abs(r.analytic - r.numeric) / (std::abs(r.numeric) + 1e-12);
  return r;
}

/// Random unit direction field (unit norm over all vertices).
inline VectorField random_direction(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  VectorField d(n);
  for (Vec3& v : d) v = Vec3(gauss(rng), gauss(rng), gauss(rng));
  const double len = norm(d);
  for (Vec3& v : d) v /= len;
  return d;
}

struct FdTableRow {
  std::string op;
  int direction = 0;
  FdResult result;
};

/// Gradient checks for W, A, V and I along `directions` random unit fields.
inline std::vector<FdTableRow> fd_check_all(const TriMesh& mesh, int directions, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double scale = std::sqrt(total_area(mesh));
  const double step = 1e-4 * scale;
  VectorField gw;
  willmore_energy_and_gradient(mesh, gw);
  const VectorField ga = area_gradient(mesh);
  const VectorField gv = volume_gradient(mesh);
  const VectorField gi = iso_gradient(mesh);
  std::vector<FdTableRow> rows;
  for (int d = 0; d < directions; ++d) {
    const VectorField dir = random_direction(mesh.vertices.size(), rng);
    rows.push_back({"willmore", d, fd_directional_check(willmore_energy, gw, mesh, dir, step)});
    rows.push_back({"area", d, fd_directional_check(total_area, ga, mesh, dir, step)});
    rows.push_back({"volume", d, fd_directional_check(enclosed_volume, gv, mesh, dir, step)});
    rows.push_back({"iso", d,
                    fd_directional_check([](const TriMesh& m) { return iso_ratio(m); }, gi, mesh, dir,
                                         step)});
  }
  return rows;
}

}  // namespace willmiso
