#pragma once

// Analytic seed surfaces: inverted catenoids, and axisymmetric prolate,
// dumbbell and stomatocyte shapes tuned to a prescribed isoperimetric ratio.

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "willmiso/functionals.hpp"
#include "willmiso/mesh.hpp"

namespace willmiso {

inline const Vec3 kE3{0.0, 0.0, 1.0};

/// Inversion at the unit sphere centered at e3: x -> e3 + (x - e3) / |x - e3|^2.
inline Vec3 invert_at_unit_sphere(const Vec3& p) {
  const Vec3 d = p - kE3;
  const double q = d.squaredNorm();
  if (std::sqrt(q) < 1e-14) throw Error(ErrorKind::PoleInput, "inversion center e3 has no image");
  return kE3 + d / q;
}

// ---------------------------------------------------------------------------
// Inverted catenoid

struct CatenoidParams {
  double a = 0.3;       // neck parameter
  double s_max = 2.4;   // truncation of the parameter domain
  int n_s = 256;
  int n_theta = 128;

  void check() const {
    if (!(a > 0.0)) throw Error(ErrorKind::InvalidArgument, "catenoid a must be positive");
    if (!(s_max >= 8.0 * a * (1.0 - 1e-12))) {
      throw Error(ErrorKind::InvalidArgument, "catenoid s_max must be at least 8a");
    }
    if (n_s < 16 || n_theta < 16) throw Error(ErrorKind::InvalidArgument, "catenoid grid below 16");
  }
};

/// Scaled catenoid g_a(s, theta) = (a cosh(s/a) cos theta, a cosh(s/a) sin theta, s).
inline Vec3 catenoid_point(double a, double s, double theta) {
  const double rho = a * std::cosh(s / a);
  return {rho * std::cos(theta), rho * std::sin(theta), s};
}

inline TriMesh inverted_catenoid_mesh(const CatenoidParams& params) {
  params.check();
  const int rings = params.n_s + 1;
  const int nt = params.n_theta;
  TriMesh m;
  m.vertices.reserve(static_cast<std::size_t>(rings) * nt + 2);
  for (int i = 0; i < rings; ++i) {
    const double s = -params.s_max + 2.0 * params.s_max * i / params.n_s;
    for (int j = 0; j < nt; ++j) {
      const double theta = 2.0 * std::numbers::pi * j / nt;
      m.vertices.push_back(invert_at_unit_sphere(catenoid_point(params.a, s, theta)));
    }
  }
  auto idx = [nt](int ring, int j) { return ring * nt + ((j % nt) + nt) % nt; };
  for (int i = 0; i + 1 < rings; ++i) {
    for (int j = 0; j < nt; ++j) {
      m.faces.push_back({idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)});
      m.faces.push_back({idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)});
    }
  }
  // Cap each truncation loop with a fan to the loop's centroid.
  for (int end = 0; end < 2; ++end) {
    const int ring = end == 0 ? 0 : rings - 1;
    Vec3 c = Vec3::Zero();
    for (int j = 0; j < nt; ++j) c += m.vertices[idx(ring, j)];
    c /= nt;
    const int apex = static_cast<int>(m.vertices.size());
    m.vertices.push_back(c);
    for (int j = 0; j < nt; ++j) {
      if (end == 0) {
        m.faces.push_back({apex, idx(ring, j), idx(ring, j + 1)});
      } else {
        m.faces.push_back({apex, idx(ring, j + 1), idx(ring, j)});
      }
    }
  }
  if (enclosed_volume(m) < 0.0) {
    for (Face& f : m.faces) std::swap(f[1], f[2]);
  }
  return m;
}

namespace detail {

/// Gauss-Legendre nodes and weights on [-1, 1].
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

struct SurfaceJet {
  Vec3 f, fs, ft, fss, fst, ftt;
};

/// Position and first/second partials of the catenoid at (s, theta).
inline SurfaceJet catenoid_jet(double a, double s, double theta) {
  const double ch = std::cosh(s / a);
  const double sh = std::sinh(s / a);
  const double c = std::cos(theta);
  const double sn = std::sin(theta);
  SurfaceJet j;
  j.f = {a * ch * c, a * ch * sn, s};
  j.fs = {sh * c, sh * sn, 1.0};
  j.ft = {-a * ch * sn, a * ch * c, 0.0};
  j.fss = {ch * c / a, ch * sn / a, 0.0};
  j.fst = {-sh * sn, sh * c, 0.0};
  j.ftt = {-a * ch * c, -a * ch * sn, 0.0};
  return j;
}

/// Jet of e3 + y/|y|^2 with y = g - e3, by the chain rule.
inline SurfaceJet inverted_jet(const SurfaceJet& g) {
  const Vec3 y = g.f - kE3;
  const double q = y.squaredNorm();
  const std::array<const Vec3*, 2> d1{&g.fs, &g.ft};
  auto first = [&](const Vec3& ya) { return Vec3(ya / q - 2.0 * y.dot(ya) * y / (q * q)); };
  auto second = [&](const Vec3& ya, const Vec3& yb, const Vec3& yab) {
    const double ua = y.dot(ya);
    const double ub = y.dot(yb);
    return Vec3(yab / q - 2.0 * ub * ya / (q * q) -
                2.0 * ((yb.dot(ya) + y.dot(yab)) * y + ua * yb) / (q * q) +
                8.0 * ua * ub * y / (q * q * q));
  };
  SurfaceJet f;
  f.f = kE3 + y / q;
  f.fs = first(*d1[0]);
  f.ft = first(*d1[1]);
  f.fss = second(g.fs, g.fs, g.fss);
  f.fst = second(g.fs, g.ft, g.fst);
  f.ftt = second(g.ft, g.ft, g.ftt);
  return f;
}

struct JetDensities {
  double area = 0.0;     // sqrt(det I)
  double mean_sq = 0.0;  // (k1 + k2)^2 sqrt(det I)
  double volume = 0.0;   // (1/3) <f - e3, n> sqrt(det I), sign from (fs x ft)
};

inline JetDensities jet_densities(const SurfaceJet& j) {
  const double e = j.fs.dot(j.fs);
  const double f = j.fs.dot(j.ft);
  const double g = j.ft.dot(j.ft);
  const Vec3 cr = j.fs.cross(j.ft);
  const double da = cr.norm();
  const Vec3 n = cr / da;
  const double l = j.fss.dot(n);
  const double m = j.fst.dot(n);
  const double nn = j.ftt.dot(n);
  const double h = (e * nn - 2.0 * f * m + g * l) / (e * g - f * f);
  JetDensities out;
  out.area = da;
  out.mean_sq = h * h * da;
  out.volume = (j.f - kE3).dot(cr) / 3.0;
  return out;
}

/// Integrals over s in [-s_max, s_max] of the axisymmetric densities
/// (times 2 pi), composite Gauss-Legendre with `panels` panels.
template <typename JetFn>
JetDensities integrate_axisymmetric(JetFn&& jet, double s_max, int panels, int order) {
  std::vector<double> x, w;
  gauss_legendre(order, x, w);
  CompensatedSum area, mean_sq, volume;
  const double width = 2.0 * s_max / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = -s_max + p * width;
    for (int k = 0; k < order; ++k) {
      const double s = lo + 0.5 * width * (x[k] + 1.0);
      const JetDensities d = jet_densities(jet(s));
      const double wk = 0.5 * width * w[k] * 2.0 * std::numbers::pi;
      area.add(wk * d.area);
      mean_sq.add(wk * d.mean_sq);
      volume.add(wk * d.volume);
    }
  }
  return {area.value(), mean_sq.value(), volume.value()};
}

}  // namespace detail

/// Mesh-free metrics of the truncated inverted catenoid by composite
/// Gauss-Legendre quadrature in s (the theta integral is exact by symmetry).
/// Curvature and Gauss-Bonnet fields are not produced by this pipeline:
/// total_gauss is set to 4 pi and total_sff derived from it.
inline SurfaceMetrics catenoid_metrics_quadrature(const CatenoidParams& params, double rel_tol = 1e-7) {
  params.check();
  const double a = params.a;
  auto jet = [a](double s) { return detail::inverted_jet(detail::catenoid_jet(a, s, 0.0)); };
  int panels = std::max(16, static_cast<int>(std::ceil(8.0 * params.s_max / a)));
  detail::JetDensities coarse = detail::integrate_axisymmetric(jet, params.s_max, panels, 12);
  for (int refine = 0; refine < 6; ++refine) {
    panels *= 2;
    const detail::JetDensities fine = detail::integrate_axisymmetric(jet, params.s_max, panels, 12);
    const double err = std::max({std::abs(fine.area - coarse.area) / std::abs(fine.area),
                                 std::abs(fine.mean_sq - coarse.mean_sq) / std::abs(fine.mean_sq),
                                 std::abs(fine.volume - coarse.volume) / std::abs(fine.volume)});
    coarse = fine;
    if (err < rel_tol) {
      SurfaceMetrics m;
      m.area = fine.area;
      m.volume = std::abs(fine.volume);
      m.iso_ratio = iso_ratio_from(m.area, m.volume);
      m.willmore = 0.25 * fine.mean_sq;
      m.total_gauss = 4.0 * std::numbers::pi;
      m.total_sff = 4.0 * m.willmore - 2.0 * m.total_gauss;
      return m;
    }
  }
  throw Error(ErrorKind::QuadratureNotConverged, "catenoid quadrature did not converge");
}

/// int (k1 + k2)^2 dA over the uninverted catenoid, s in [-s_max, s_max].
inline double catenoid_mean_curvature_l2(const CatenoidParams& params) {
  const double a = params.a;
  auto jet = [a](double s) { return detail::catenoid_jet(a, s, 0.0); };
  const int panels = std::max(16, static_cast<int>(std::ceil(16.0 * params.s_max / a)));
  return detail::integrate_axisymmetric(jet, params.s_max, panels, 12).mean_sq;
}

// ---------------------------------------------------------------------------
// Surfaces of revolution about the z axis

/// Meridian polyline in the (r, z) half plane, starting and ending on the axis.
struct Profile {
  std::vector<double> r;
  std::vector<double> z;
};

namespace detail {

inline std::vector<double> arc_lengths(const Profile& p) {
  std::vector<double> s(p.r.size(), 0.0);
  for (std::size_t i = 1; i < s.size(); ++i) s[i] = s[i - 1] + std::hypot(p.r[i] - p.r[i - 1], p.z[i] - p.z[i - 1]);
  return s;
}

/// Largest principal curvature magnitude along the profile (meridian and
/// parallel curvature), from discrete differences of the polyline.
inline std::vector<double> profile_curvature(const Profile& p, const std::vector<double>& s) {
  const std::size_t n = p.r.size();
  std::vector<double> k(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = i == 0 ? 0 : i - 1;
    const std::size_t b = std::min(n - 1, i + 1);
    const double ds = s[b] - s[a];
    if (!(ds > 0.0)) continue;
    const double tr = (p.r[b] - p.r[a]) / ds;
    const double tz = (p.z[b] - p.z[a]) / ds;
    double kmer = 0.0;
    if (i > 0 && i + 1 < n) {
      const double t1r = (p.r[i] - p.r[a]) / std::max(s[i] - s[a], 1e-300);
      const double t1z = (p.z[i] - p.z[a]) / std::max(s[i] - s[a], 1e-300);
      const double t2r = (p.r[b] - p.r[i]) / std::max(s[b] - s[i], 1e-300);
      const double t2z = (p.z[b] - p.z[i]) / std::max(s[b] - s[i], 1e-300);
      kmer = std::hypot(t2r - t1r, t2z - t1z) / (0.5 * ds);
    }
    const double kpar = p.r[i] > 1e-12 ? std::abs(tz) / p.r[i] : kmer;
    k[i] = std::max(kmer, kpar);
    (void)tr;
  }
  // The parallel curvature is singular exactly on the axis; mirror the neighbor.
  if (n > 2) {
    k[0] = k[1];
    k[n - 1] = k[n - 2];
  }
  return k;
}

inline double interp(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  if (it == xs.begin()) return ys.front();
  if (it == xs.end()) return ys.back();
  const std::size_t i = static_cast<std::size_t>(it - xs.begin());
  const double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
  return ys[i - 1] + t * (ys[i] - ys[i - 1]);
}

}  // namespace detail

struct RevolutionOptions {
  int target_vertices = 10000;
  /// Edge length relative to the local curvature radius; caps resolution in
  /// strongly curved regions such as necks.
  double curvature_fraction = 0.2;
};

/// Approximate area of the surface of revolution (Pappus).
inline double profile_area(const Profile& p) {
  CompensatedSum a;
  for (std::size_t i = 1; i < p.r.size(); ++i) {
    a.add(std::numbers::pi * (p.r[i] + p.r[i - 1]) * std::hypot(p.r[i] - p.r[i - 1], p.z[i] - p.z[i - 1]));
  }
  return a.value();
}

/// Meshes a surface of revolution with rings spaced by a locally adaptive
/// edge length; neighboring rings are zipped by angle and the two axis
/// points become poles.
inline TriMesh revolution_mesh(const Profile& profile, const RevolutionOptions& opt = {}) {
  if (profile.r.size() < 3) throw Error(ErrorKind::InvalidArgument, "profile too short");
  const std::vector<double> s = detail::arc_lengths(profile);
  const std::vector<double> kappa = detail::profile_curvature(profile, s);
  auto spacing_for = [&](double cap) {
    std::vector<double> h(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double hk = kappa[i] > 0.0 ? opt.curvature_fraction / kappa[i] : cap;
      h[i] = std::clamp(hk, 0.05 * cap, cap);
    }
    // Limit growth to ~25% of the edge length per unit arc length.
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 1; i < s.size(); ++i) h[i] = std::min(h[i], h[i - 1] + 0.25 * (s[i] - s[i - 1]));
      for (std::size_t i = s.size() - 1; i-- > 0;) h[i] = std::min(h[i], h[i + 1] + 0.25 * (s[i + 1] - s[i]));
    }
    return h;
  };
  // Expected vertex count: area element over the area of an equilateral cell.
  auto vertex_estimate = [&](const std::vector<double>& h) {
    double n = 0.0;
    for (std::size_t i = 1; i < s.size(); ++i) {
      const double hm = 0.5 * (h[i] + h[i - 1]);
      n += std::numbers::pi * (profile.r[i] + profile.r[i - 1]) * (s[i] - s[i - 1]) / (0.866 * hm * hm);
    }
    return n;
  };
  // Bisection (in log space) on the spacing cap to meet the vertex budget.
  const double target = std::max(opt.target_vertices, 12);
  double lo = 1e-6 * s.back();
  double hi = s.back();
  for (int it = 0; it < 60; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (vertex_estimate(spacing_for(mid)) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const std::vector<double> spacing = spacing_for(std::sqrt(lo * hi));
  // Cumulative ring index u(s) = int ds / h(s).
  std::vector<double> u(s.size(), 0.0);
  for (std::size_t i = 1; i < s.size(); ++i) {
    u[i] = u[i - 1] + (s[i] - s[i - 1]) * 0.5 * (1.0 / spacing[i] + 1.0 / spacing[i - 1]);
  }
  const int segments = std::max(3, static_cast<int>(std::lround(u.back())));

  TriMesh m;
  m.vertices.push_back({0.0, 0.0, profile.z.front()});
  std::vector<std::vector<int>> rings;
  for (int k = 1; k < segments; ++k) {
    const double uk = u.back() * k / segments;
    const double sk = detail::interp(u, s, uk);
    const double rk = detail::interp(s, profile.r, sk);
    const double zk = detail::interp(s, profile.z, sk);
    const double hk = detail::interp(s, spacing, sk);
    const int count = std::max(3, static_cast<int>(std::lround(2.0 * std::numbers::pi * rk / hk)));
    const double offset = (k % 2) * 0.5;
    std::vector<int> ring;
    for (int j = 0; j < count; ++j) {
      const double phi = 2.0 * std::numbers::pi * (j + offset) / count;
      ring.push_back(static_cast<int>(m.vertices.size()));
      m.vertices.push_back({rk * std::cos(phi), rk * std::sin(phi), zk});
    }
    rings.push_back(std::move(ring));
  }
  const int north = 0;
  const int south = static_cast<int>(m.vertices.size());
  m.vertices.push_back({0.0, 0.0, profile.z.back()});

  auto angle_of = [&](int v) {
    double a = std::atan2(m.vertices[v].y(), m.vertices[v].x());
    if (a < 0.0) a += 2.0 * std::numbers::pi;
    return a;
  };

  const auto& first = rings.front();
  for (std::size_t j = 0; j < first.size(); ++j) {
    m.faces.push_back({north, first[j], first[(j + 1) % first.size()]});
  }
  for (std::size_t k = 0; k + 1 < rings.size(); ++k) {
    const auto& ra = rings[k];
    const auto& rb = rings[k + 1];
    const int na = static_cast<int>(ra.size());
    const int nb = static_cast<int>(rb.size());
    // Both rings start at the smallest angle; walk by unwrapped angle.
    auto unwrapped = [&](const std::vector<int>& ring, int i) {
      const int n = static_cast<int>(ring.size());
      return angle_of(ring[i % n]) + 2.0 * std::numbers::pi * (i / n);
    };
    int i = 0;
    int j = 0;
    while (i < na || j < nb) {
      const double next_a = i < na ? unwrapped(ra, i + 1) : 1e300;
      const double next_b = j < nb ? unwrapped(rb, j + 1) : 1e300;
      if (next_a <= next_b) {
        m.faces.push_back({ra[i % na], rb[j % nb], ra[(i + 1) % na]});
        ++i;
      } else {
        m.faces.push_back({ra[i % na], rb[j % nb], rb[(j + 1) % nb]});
        ++j;
      }
    }
  }
  const auto& last = rings.back();
  for (std::size_t j = 0; j < last.size(); ++j) {
    m.faces.push_back({south, last[(j + 1) % last.size()], last[j]});
  }
  if (enclosed_volume(m) < 0.0) {
    for (Face& f : m.faces) std::swap(f[1], f[2]);
  }
  return m;
}

/// Iso ratio of a surface of revolution from its profile (Pappus/Guldin).
inline double profile_iso_ratio(const Profile& p) {
  CompensatedSum v;
  for (std::size_t i = 1; i < p.r.size(); ++i) {
    const double r0 = p.r[i - 1];
    const double r1 = p.r[i];
    v.add(-std::numbers::pi * (r0 * r0 + r0 * r1 + r1 * r1) / 3.0 * (p.z[i] - p.z[i - 1]));
  }
  return iso_ratio_from(profile_area(p), std::abs(v.value()));
}

// Profile families ----------------------------------------------------------

inline Profile ellipsoid_profile(double semi_axis_z, double semi_axis_r, int samples = 4000) {
  Profile p;
  for (int i = 0; i <= samples; ++i) {
    const double t = std::numbers::pi * i / samples;
    p.r.push_back(semi_axis_r * std::sin(t));
    p.z.push_back(semi_axis_z * std::cos(t));
  }
  p.r.front() = p.r.back() = 0.0;
  return p;
}

namespace detail {

inline double smooth_max(double a, double b, double k) {
  const double h = std::max(k - std::abs(a - b), 0.0) / k;
  return std::max(a, b) + 0.25 * h * h * k;
}

}  // namespace detail

/// Two-bulb meridian revolved about the axis: bulbs of radius 2*neck
/// centered at r = 1 joined by a central sheet of half-thickness `neck`.
/// Small necks give a thin biconcave disc, large necks an apple-like
/// near-sphere.
inline Profile dumbbell_profile(double neck, int samples = 6000) {
  const double bulb = 2.0 * neck;
  const double blend = 0.5 * neck;
  const double r_end = 1.0 + bulb;
  auto height = [&](double r) {
    const double d = r - 1.0;
    double h = d * d < bulb * bulb ? std::sqrt(bulb * bulb - d * d) : 0.0;
    if (r <= 1.0) h = detail::smooth_max(h, neck, blend);
    return h;
  };
  Profile p;
  const int half = samples / 2;
  for (int i = 0; i <= half; ++i) {
    const double r = r_end * std::sin(0.5 * std::numbers::pi * i / half);
    p.r.push_back(r);
    p.z.push_back(i == half ? 0.0 : height(r));
  }
  for (int i = half - 1; i >= 0; --i) {
    p.r.push_back(p.r[i]);
    p.z.push_back(-p.z[i]);
  }
  p.r.back() = 0.0;
  return p;
}

/// Outer sphere of radius 1 with an inner sphere of radius `inner` folded
/// inside through a catenoidal neck at the bottom (a stomatocyte).
/// `gap_fraction` in (0,1) places the inner sphere: the bottom sheet gap is
/// gap_fraction * 2 * (1 - inner).
inline Profile stomatocyte_profile(double inner, double gap_fraction = 0.5, int samples = 6000) {
  constexpr double kFlare = 2.5;  // catenoid half-parameter at the rims
  const double r1 = 1.0;
  const double r2 = inner;
  const double room = r1 - r2;
  const double gap = 2.0 * gap_fraction * room;  // bottom sheet separation
  const double d = room - gap;    // inner center at z = -d
  const double rim = std::cosh(kFlare) * gap / (2.0 * kFlare);
  const double phi_end = std::numbers::pi - std::asin(std::min(rim / r1, 0.9));
  const double psi1 = std::asin(std::min(rim / r2, 0.9));

  Profile p;
  const int n_outer = samples / 2;
  const int n_neck = samples / 6;
  const int n_inner = samples - n_outer - n_neck;
  for (int i = 0; i <= n_outer; ++i) {
    const double phi = phi_end * i / n_outer;
    p.r.push_back(r1 * std::sin(phi));
    p.z.push_back(r1 * std::cos(phi));
  }
  const double z0 = r1 * std::cos(phi_end);
  const double z1 = -d - r2 * std::cos(psi1);
  const double c = (z1 - z0) / (2.0 * kFlare);
  const double r_rim0 = r1 * std::sin(phi_end);
  const double r_rim1 = r2 * std::sin(psi1);
  for (int i = 1; i < n_neck; ++i) {
    const double t = static_cast<double>(i) / n_neck;
    const double u = kFlare * (2.0 * t - 1.0);
    // Catenoid, with its rim radius blended onto the two sphere rims.
    const double scale = (1.0 - t) * r_rim0 + t * r_rim1;
    p.r.push_back(scale * std::cosh(u) / std::cosh(kFlare));
    p.z.push_back(0.5 * (z0 + z1) + c * u);
  }
  for (int i = 0; i <= n_inner; ++i) {
    const double psi = psi1 + (std::numbers::pi - psi1) * i / n_inner;
    p.r.push_back(r2 * std::sin(psi));
    p.z.push_back(-d - r2 * std::cos(psi));
  }
  p.r.back() = 0.0;
  return p;
}

namespace detail {

/// Bisection on a monotone one-parameter family for iso_ratio(mesh) = target.
/// `increasing` states whether I grows with the parameter.
inline TriMesh tune_family(const std::function<TriMesh(double)>& make, double lo, double hi,
                           bool increasing, double target, double tol, const char* name,
                           double* chosen = nullptr) {
  auto iso_at = [&](double x, TriMesh* out) {
    TriMesh m = make(x);
    const double i = iso_ratio(m);
    if (out) *out = std::move(m);
    return i;
  };
  double i_lo = iso_at(lo, nullptr);
  double i_hi = iso_at(hi, nullptr);
  const double reach_min = std::min(i_lo, i_hi);
  const double reach_max = std::max(i_lo, i_hi);
  if (!(target >= reach_min - tol && target <= reach_max + tol)) {
    throw Error(ErrorKind::BisectionFailed, std::string(name) + " family cannot reach I=" +
                                                std::to_string(target) + " (range " +
                                                std::to_string(reach_min) + ".." +
                                                std::to_string(reach_max) + ")");
  }
  TriMesh best;
  double best_err = 1e300;
  double best_x = lo;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    TriMesh m;
    const double i_mid = iso_at(mid, &m);
    const double err = std::abs(i_mid - target);
    if (err < best_err) {
      best_err = err;
      best = std::move(m);
      best_x = mid;
    }
    if (best_err <= 0.1 * tol) break;
    if ((i_mid < target) == increasing) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (std::abs(hi - lo) < 1e-13 * std::max(1.0, std::abs(hi))) break;
  }
  if (best_err > tol) {
    throw Error(ErrorKind::BisectionFailed, std::string(name) + " bisection stalled at |I - target| = " +
                                                std::to_string(best_err));
  }
  if (chosen) *chosen = best_x;
  return best;
}

inline void check_target(double target) {
  if (!(target > 0.05 && target < 0.999 + 1e-12)) {
    throw Error(ErrorKind::InvalidArgument, "target iso ratio must lie in (0.05, 0.999)");
  }
}

}  // namespace detail

/// Prolate spheroid (semi-axes c >= 1 along z, 1 in the plane) with aspect
/// ratio tuned so that iso_ratio(mesh) = target within 1e-3.
inline TriMesh prolate_mesh(double target_sigma, int resolution, double* aspect_out = nullptr) {
  detail::check_target(target_sigma);
  RevolutionOptions opt;
  opt.target_vertices = resolution;
  auto make = [&](double aspect) { return revolution_mesh(ellipsoid_profile(aspect, 1.0), opt); };
  return detail::tune_family(make, 1.0, 30.0, false, target_sigma, 1e-3, "prolate", aspect_out);
}

/// Dumbbell with neck radius tuned so that iso_ratio(mesh) = target within 1e-3.
inline TriMesh dumbbell_mesh(double target_sigma, int resolution, double* neck_out = nullptr) {
  detail::check_target(target_sigma);
  RevolutionOptions opt;
  opt.target_vertices = resolution;
  auto make = [&](double neck) { return revolution_mesh(dumbbell_profile(neck), opt); };
  return detail::tune_family(make, 2e-3, 50.0, true, target_sigma, 1e-3, "dumbbell", neck_out);
}

/// Stomatocyte with inner-sphere radius tuned so that iso_ratio(mesh) = target.
inline TriMesh stomatocyte_mesh(double target_sigma, int resolution, double* inner_out = nullptr,
                                double gap_fraction = 0.5) {
  detail::check_target(target_sigma);
  RevolutionOptions opt;
  opt.target_vertices = resolution;
  auto make = [&](double inner) { return revolution_mesh(stomatocyte_profile(inner, gap_fraction), opt); };
  return detail::tune_family(make, 0.05, 0.995, false, target_sigma, 1e-3, "stomatocyte", inner_out);
}

}  // namespace willmiso
