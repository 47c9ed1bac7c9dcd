#pragma once

// Density ratios via exact ball clipping, Li-Yau style density bound,
// sphere fitting for two-sheet detection, diameter lower bound, and the
// dyadic decay utility.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "willmiso/errors.hpp"
#include "willmiso/functionals.hpp"
#include "willmiso/mesh.hpp"

namespace willmiso {

namespace detail {

/// Signed area of disk(0, R) intersected with the triangle (0, a, b).
inline double wedge_disk_area(const Eigen::Vector2d& a, const Eigen::Vector2d& b, double R) {
  const Eigen::Vector2d d = b - a;
  const double A = d.squaredNorm();
  if (A == 0.0) return 0.0;
  const double B = a.dot(d);
  const double C = a.squaredNorm() - R * R;
  double cuts[4] = {0.0, 0.0, 0.0, 1.0};
  int nc = 1;
  const double disc = B * B - A * C;
  if (disc > 0.0) {
    const double sq = std::sqrt(disc);
    const double t0 = (-B - sq) / A;
    const double t1 = (-B + sq) / A;
    if (t0 > 0.0 && t0 < 1.0) cuts[nc++] = t0;
    if (t1 > 0.0 && t1 < 1.0) cuts[nc++] = t1;
  }
  cuts[nc++] = 1.0;
  double area = 0.0;
  for (int k = 0; k + 1 < nc; ++k) {
    const Eigen::Vector2d p = a + cuts[k] * d;
    const Eigen::Vector2d q = a + cuts[k + 1] * d;
    const double cross = p.x() * q.y() - p.y() * q.x();
    const Eigen::Vector2d mid = 0.5 * (p + q);
    if (mid.squaredNorm() <= R * R) {
      area += 0.5 * cross;
    } else {
      area += 0.5 * R * R * std::atan2(cross, p.dot(q));
    }
  }
  return area;
}

/// Area of the triangle (p0, p1, p2) inside the closed ball B_rho(x0).
inline double triangle_ball_area(const Vec3& p0, const Vec3& p1, const Vec3& p2, const Vec3& x0, double rho) {
  const double r2 = rho * rho;
  const bool in0 = (p0 - x0).squaredNorm() <= r2;
  const bool in1 = (p1 - x0).squaredNorm() <= r2;
  const bool in2 = (p2 - x0).squaredNorm() <= r2;
  const Vec3 e1 = p1 - p0;
  const Vec3 e2 = p2 - p0;
  const Vec3 n = e1.cross(e2);
  const double nn = n.norm();
  if (nn == 0.0) return 0.0;
  if (in0 && in1 && in2) return 0.5 * nn;  // ball is convex
  const Vec3 un = n / nn;
  const double dist = (x0 - p0).dot(un);
  if (std::abs(dist) >= rho) return 0.0;
  const double R = std::sqrt(r2 - dist * dist);
  const Vec3 center = x0 - dist * un;
  const Vec3 u = e1.normalized();
  const Vec3 v = un.cross(u);
  auto flat = [&](const Vec3& p) { return Eigen::Vector2d((p - center).dot(u), (p - center).dot(v)); };
  const Eigen::Vector2d a = flat(p0);
  const Eigen::Vector2d b = flat(p1);
  const Eigen::Vector2d c = flat(p2);
  const double s = wedge_disk_area(a, b, R) + wedge_disk_area(b, c, R) + wedge_disk_area(c, a, R);
  return std::clamp(std::abs(s), 0.0, 0.5 * nn);
}

}  // namespace detail

/// mu(B_rho(x0)) for the area measure of the mesh.
inline double ball_area(const TriMesh& mesh, const Vec3& x0, double rho) {
  CompensatedSum sum;
  for (const Face& f : mesh.faces) {
    sum.add(detail::triangle_ball_area(mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]], x0, rho));
  }
  return sum.value();
}

struct DensityProfile {
  Vec3 center = Vec3::Zero();
  std::vector<double> radii;
  std::vector<double> ratios;  // mu(B_rho) / (pi rho^2)
};

inline DensityProfile density_profile(const TriMesh& mesh, const Vec3& x0, const std::vector<double>& radii) {
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0) || (i > 0 && !(radii[i] > radii[i - 1]))) {
      throw Error(ErrorKind::InvalidArgument, "density radii must be positive and strictly increasing");
    }
  }
  DensityProfile out;
  out.center = x0;
  out.radii = radii;
  if (radii.empty()) return out;
  // Faces that can touch the largest ball.
  const double rmax = radii.back();
  std::vector<int> near;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const Face& fc = mesh.faces[f];
    double dmin = std::numeric_limits<double>::infinity();
    double emax = 0.0;
    for (int k = 0; k < 3; ++k) {
      dmin = std::min(dmin, (mesh.vertices[fc[k]] - x0).norm());
      emax = std::max(emax, (mesh.vertices[fc[k]] - mesh.vertices[fc[(k + 1) % 3]]).norm());
    }
    if (dmin - emax <= rmax) near.push_back(static_cast<int>(f));
  }
  for (double rho : radii) {
    CompensatedSum sum;
    for (int f : near) {
      const Face& fc = mesh.faces[f];
      sum.add(detail::triangle_ball_area(mesh.vertices[fc[0]], mesh.vertices[fc[1]], mesh.vertices[fc[2]], x0, rho));
    }
    out.ratios.push_back(sum.value() / (std::numbers::pi * rho * rho));
  }
  return out;
}

/// Geometric radii spanning [lo, hi]; a single radius if the range is empty.
inline std::vector<double> geometric_radii(double lo, double hi, int count) {
  std::vector<double> r;
  if (!(hi > lo) || count < 2) return {std::min(lo, hi)};
  for (int i = 0; i < count; ++i) r.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1)));
  return r;
}

/// Deterministic surface samples, faces chosen proportionally to area.
inline std::vector<Vec3> sample_surface_points(const TriMesh& mesh, int count, std::uint64_t seed) {
  std::vector<double> cumulative;
  double total = 0.0;
  for (const Face& f : mesh.faces) {
    total += triangle_geometry(mesh, f).area;
    cumulative.push_back(total);
  }
  std::mt19937_64 rng(seed);
  std::vector<Vec3> out;
  for (int i = 0; i < count; ++i) {
    // Raw 53-bit draws keep samples identical across standard libraries.
    auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    const double t = unit() * total;
    const std::size_t f = std::min<std::size_t>(
        std::lower_bound(cumulative.begin(), cumulative.end(), t) - cumulative.begin(), mesh.faces.size() - 1);
    double a = unit();
    double b = unit();
    if (a + b > 1.0) {
      a = 1.0 - a;
      b = 1.0 - b;
    }
    const Face& fc = mesh.faces[f];
    out.push_back(mesh.vertices[fc[0]] + a * (mesh.vertices[fc[1]] - mesh.vertices[fc[0]]) +
                  b * (mesh.vertices[fc[2]] - mesh.vertices[fc[0]]));
  }
  return out;
}

/// Diameter lower bound from repeated farthest-point sweeps. Exact for
/// centrally symmetric sets and never above the true diameter.
inline double diameter_lower_bound(const TriMesh& mesh, int sweeps = 4) {
  if (mesh.vertices.empty()) return 0.0;
  std::size_t cur = 0;
  double best = 0.0;
  for (int s = 0; s < sweeps; ++s) {
    std::size_t far = cur;
    double dmax = 0.0;
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
      const double d = (mesh.vertices[i] - mesh.vertices[cur]).squaredNorm();
      if (d > dmax) {
        dmax = d;
        far = i;
      }
    }
    best = std::max(best, std::sqrt(dmax));
    if (far == cur) break;
    cur = far;
  }
  return best;
}

inline double diameter_exact(const TriMesh& mesh) {
  double best = 0.0;
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
    for (std::size_t j = i + 1; j < mesh.vertices.size(); ++j)
      best = std::max(best, (mesh.vertices[i] - mesh.vertices[j]).squaredNorm());
  return std::sqrt(best);
}

struct LiYauOptions {
  int points = 50;
  std::uint64_t seed = 1;
  int radii = 6;
  double slack = 0.15;
};

struct LiYauReport {
  double max_ratio = 0.0;
  Vec3 argmax = Vec3::Zero();
  double bound = 0.0;  // W / 4pi + slack
  double willmore = 0.0;
  double rho_min = 0.0;
  double rho_max = 0.0;
  bool passed = false;
};

/// Max density ratio over sampled points and radii in [3h, 0.1 diam] against
/// W/(4 pi) + slack. A violation points at self-intersection or multiplicity.
inline LiYauReport li_yau_check(const TriMesh& mesh, const LiYauOptions& opt = {}) {
  LiYauReport rep;
  rep.willmore = willmore_energy(mesh);
  rep.bound = rep.willmore / (4.0 * std::numbers::pi) + opt.slack;
  const double h = mean_edge_length(mesh);
  rep.rho_max = 0.1 * diameter_lower_bound(mesh);
  rep.rho_min = std::min(3.0 * h, rep.rho_max);
  const std::vector<double> radii = geometric_radii(rep.rho_min, rep.rho_max, opt.radii);
  for (const Vec3& p : sample_surface_points(mesh, opt.points, opt.seed)) {
    const DensityProfile prof = density_profile(mesh, p, radii);
    for (double r : prof.ratios) {
      if (r > rep.max_ratio) {
        rep.max_ratio = r;
        rep.argmax = p;
      }
    }
  }
  rep.passed = rep.max_ratio <= rep.bound;
  return rep;
}

struct SphereFit {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
  double rms = 0.0;
  double inlier_fraction = 0.0;  // |dist - r| <= 0.1 r
  int iterations = 0;
};

struct TwoSheetReport {
  double r_target = 0.0;     // (8 pi)^(-1/2): both sheets on one sphere of total area 1
  double r_rel_error = 0.0;  // |r - r_target| / r_target
  double inside_fraction = 0.0;  // inliers with dist < r
  double outside_fraction = 0.0;
  double sheet_gap = 0.0;  // mean outer residual - mean inner residual over inliers
  double area = 0.0;
};

inline double double_sphere_radius() { return 1.0 / std::sqrt(8.0 * std::numbers::pi); }

/// Least-squares sphere through points: Gauss-Newton on sum (|p - a| - r)^2.
inline SphereFit fit_sphere(const std::vector<Vec3>& pts, int max_iters = 100) {
  if (pts.size() < 4) throw Error(ErrorKind::InvalidArgument, "sphere fit needs at least 4 points");
  Vec3 a = Vec3::Zero();
  for (const Vec3& p : pts) a += p;
  a /= static_cast<double>(pts.size());
  double r = 0.0;
  for (const Vec3& p : pts) r += (p - a).norm();
  r /= static_cast<double>(pts.size());
  SphereFit fit;
  for (int it = 0; it < max_iters; ++it) {
    Eigen::Matrix4d JtJ = Eigen::Matrix4d::Zero();
    Eigen::Vector4d Jtr = Eigen::Vector4d::Zero();
    for (const Vec3& p : pts) {
      const Vec3 d = p - a;
      const double dn = d.norm();
      if (dn == 0.0) continue;
      Eigen::Vector4d J;
      J << -d / dn, -1.0;
      const double res = dn - r;
      JtJ += J * J.transpose();
      Jtr += J * res;
    }
    const Eigen::Vector4d step = JtJ.ldlt().solve(-Jtr);
    if (!step.allFinite()) throw Error(ErrorKind::FitDiverged, "singular sphere-fit normal equations");
    a += step.head<3>();
    r += step[3];
    fit.iterations = it + 1;
    if (!(r > 0.0) || !a.allFinite()) throw Error(ErrorKind::FitDiverged, "sphere fit left the admissible set");
    if (step.norm() <= 1e-13 * std::max(1.0, r)) break;
    if (it + 1 == max_iters) throw Error(ErrorKind::FitDiverged, "sphere fit did not converge");
  }
  double ss = 0.0;
  std::size_t inl = 0;
  for (const Vec3& p : pts) {
    const double res = (p - a).norm() - r;
    ss += res * res;
    if (std::abs(res) <= 0.1 * r) ++inl;
  }
  fit.center = a;
  fit.radius = r;
  fit.rms = std::sqrt(ss / static_cast<double>(pts.size()));
  fit.inlier_fraction = static_cast<double>(inl) / static_cast<double>(pts.size());
  return fit;
}

inline std::pair<SphereFit, TwoSheetReport> double_sphere_fit(const TriMesh& mesh) {
  const SphereFit fit = fit_sphere(mesh.vertices);
  TwoSheetReport rep;
  rep.area = total_area(mesh);
  rep.r_target = double_sphere_radius();
  rep.r_rel_error = std::abs(fit.radius - rep.r_target) / rep.r_target;
  double in_sum = 0.0;
  double out_sum = 0.0;
  std::size_t n_in = 0;
  std::size_t n_out = 0;
  for (const Vec3& p : mesh.vertices) {
    const double res = (p - fit.center).norm() - fit.radius;
    if (std::abs(res) > 0.1 * fit.radius) continue;
    if (res < 0.0) {
      in_sum += res;
      ++n_in;
    } else {
      out_sum += res;
      ++n_out;
    }
  }
  const double n = static_cast<double>(mesh.vertices.size());
  rep.inside_fraction = n_in / n;
  rep.outside_fraction = n_out / n;
  if (n_in > 0 && n_out > 0) rep.sheet_gap = out_sum / n_out - in_sum / n_in;
  return {fit, rep};
}

struct DiameterReport {
  double diameter = 0.0;  // lower bound unless exact was requested
  double bound = 0.0;     // sqrt(A / W)
  bool passed = false;
};

/// diam >= sqrt(A / W) with 1% slack; A = 1 for normalized meshes.
inline DiameterReport diameter_bound_check(const TriMesh& mesh, double willmore, bool exact = false) {
  DiameterReport rep;
  rep.diameter = exact ? diameter_exact(mesh) : diameter_lower_bound(mesh);
  rep.bound = std::sqrt(total_area(mesh) / willmore);
  rep.passed = rep.diameter >= 0.99 * rep.bound;
  return rep;
}

inline DiameterReport diameter_bound_check(const TriMesh& mesh) {
  return diameter_bound_check(mesh, willmore_energy(mesh));
}

struct CurvatureBoundReport {
  double total_sff = 0.0;
  double bound = 24.0 * std::numbers::pi + 0.5;
  bool passed = false;
};

inline CurvatureBoundReport total_curvature_check(const TriMesh& mesh) {
  CurvatureBoundReport rep;
  rep.total_sff = metrics(mesh).total_sff;
  rep.passed = rep.total_sff <= rep.bound;
  return rep;
}

struct DecayReport {
  double beta = 0.0;
  double constant = 0.0;   // C in g(x) <= C x^beta
  double sup_g = 0.0;
  double max_ratio = 0.0;  // max over samples of g(x) / (C x^beta)
  int recursion_pairs = 0; // sample pairs (x, 2x) checked against the hypothesis
  bool verified = false;
};

/// Exponent and constant from g(x) <= gamma g(2x) + c x^alpha on (0, b).
/// Samples are (x, g(x)); the hypothesis is checked on every pair (x, 2x)
/// present in the samples.
inline DecayReport decay_exponent(double gamma, double alpha, double c, double b,
                                  const std::vector<std::pair<double, double>>& samples) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error(ErrorKind::InvalidArgument, "gamma must lie in (0,1)");
  if (!(alpha > 0.0) || !(c >= 0.0) || !(b > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "alpha, b must be positive and c nonnegative");
  }
  DecayReport rep;
  for (const auto& [x, g] : samples) {
    if (!(x > 0.0 && x < b) || !(g >= 0.0) || !std::isfinite(g)) {
      throw Error(ErrorKind::InvalidArgument, "decay samples need x in (0,b) and finite g >= 0");
    }
    rep.sup_g = std::max(rep.sup_g, g);
  }
  std::vector<std::pair<double, double>> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  for (const auto& [x, g] : sorted) {
    if (!(x < 0.5 * b)) continue;
    auto it = std::lower_bound(sorted.begin(), sorted.end(), std::make_pair(2.0 * x * (1.0 - 1e-12), -1.0));
    if (it == sorted.end() || std::abs(it->first - 2.0 * x) > 1e-12 * x) continue;
    ++rep.recursion_pairs;
    const double rhs = gamma * it->second + c * std::pow(x, alpha);
    if (g > rhs * (1.0 + 1e-12) + 1e-300) {
      throw Error(ErrorKind::RecursionHypothesisViolated,
                  "g(" + std::to_string(x) + ") = " + std::to_string(g) + " exceeds gamma g(2x) + c x^alpha = " +
                      std::to_string(rhs));
    }
  }
  const double G = rep.sup_g;
  const double rho = std::pow(2.0, alpha) * gamma;
  const double lg = std::log2(1.0 / gamma);
  // Unroll k times until 2^k x lands in [b/2, b); gamma^k <= (2x/b)^beta.
  if (rho < 1.0 - 1e-12) {
    rep.beta = alpha;
    rep.constant = G * std::pow(2.0 / b, alpha) + c / (1.0 - rho);
  } else if (rho > 1.0 + 1e-12) {
    rep.beta = lg * (1.0 - 1e-3);
    rep.constant = (G + c * std::pow(b, alpha) / (rho - 1.0)) * std::pow(2.0 / b, rep.beta);
  } else {
    // k terms of size one: x^alpha log2(b/x) <= x^beta b^(alpha-beta) / ((alpha-beta) e ln 2)
    rep.beta = lg * (1.0 - 1e-3);
    const double gap = alpha - rep.beta;
    rep.constant = G * std::pow(2.0 / b, rep.beta) +
                   c * std::pow(b, gap) / (gap * std::numbers::e * std::numbers::ln2);
  }
  rep.verified = true;
  for (const auto& [x, g] : samples) {
    const double bound = rep.constant * std::pow(x, rep.beta);
    rep.max_ratio = std::max(rep.max_ratio, bound > 0.0 ? g / bound : (g > 0.0 ? INFINITY : 0.0));
    if (g > bound * (1.0 + 1e-12)) rep.verified = false;
  }
  return rep;
}

/// Dyadic samples x_j = b 2^-j, j = 1..levels.
template <typename F>
std::vector<std::pair<double, double>> dyadic_samples(F&& g, double b, int levels) {
  std::vector<std::pair<double, double>> out;
  for (int j = 1; j <= levels; ++j) {
    const double x = std::ldexp(b, -j);
    out.emplace_back(x, g(x));
  }
  return out;
}

}  // namespace willmiso
