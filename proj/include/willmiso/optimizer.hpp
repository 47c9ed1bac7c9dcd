#pragma once

// Minimization of W at a fixed isoperimetric ratio: projected descent with a
// least-squares multiplier, Newton re-projection onto I = sigma after every
// trial step, and the beta(sigma) sweep built on top of it.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Sparse>

#include "willmiso/analysis.hpp"
#include "willmiso/functionals.hpp"
#include "willmiso/generators.hpp"
#include "willmiso/intersect.hpp"
#include "willmiso/mesh.hpp"
#include "willmiso/mesh_io.hpp"
#include "willmiso/variation.hpp"

namespace willmiso {

enum class SeedShape { Prolate, Dumbbell, Stomatocyte, Icosphere, File };

inline const char* to_string(SeedShape s) {
  switch (s) {
    case SeedShape::Prolate: return "prolate";
    case SeedShape::Dumbbell: return "dumbbell";
    case SeedShape::Stomatocyte: return "stomatocyte";
    case SeedShape::Icosphere: return "icosphere";
    case SeedShape::File: return "file";
  }
  return "unknown";
}

inline SeedShape parse_seed_shape(const std::string& s) {
  if (s == "prolate") return SeedShape::Prolate;
  if (s == "dumbbell") return SeedShape::Dumbbell;
  if (s == "stomatocyte") return SeedShape::Stomatocyte;
  if (s == "icosphere") return SeedShape::Icosphere;
  if (s == "file") return SeedShape::File;
  throw Error(ErrorKind::Config, "unknown seed shape '" + s + "'");
}

struct FlowConfig {
  double sigma = 0.9;
  int max_iters = 2000;
  double step0 = 1e-3;
  double constraint_tol = 1e-3;
  double grad_tol = 1e-6;
  bool renormalize_area = true;
  SeedShape seed_shape = SeedShape::Prolate;
  std::string seed_file;
  int resolution = 10000;
  std::uint64_t rng_seed = 1;
  /// Relative amplitude of random vertex noise added to the seed (0 = none).
  double seed_noise = 0.0;
  /// Newton projection stops once |I - sigma| is below this (<= constraint_tol).
  double projection_tol = 1e-11;
  int lbfgs_memory = 8;
  /// Bi-Laplacian-type preconditioner (K + eps M) M^-1 (K + eps M); eps in
  /// units of 1/area. Zero disables it.
  double precondition_eps = 1.0;
  /// Largest trial displacement of any vertex, in mean edge lengths.
  double max_displacement = 0.5;
  double armijo = 1e-4;
  /// Size of the tangential regularization relative to the descent direction.
  double tangential_weight = 0.5;
  double min_quality = 1e-6;
  /// A trial is rejected when some vertex area exceeds both this multiple
  /// of the mean and max_area_growth times its own share at the start of
  /// the run. The discrete energy underestimates W on coarse patches, so
  /// unchecked descent coarsens the mesh.
  double max_area_ratio = 8.0;
  double max_area_growth = 2.0;
  /// Restrict the descent direction to vertex normals.
  bool normal_only = false;
  /// Stop when W improves by less than this over `stall_window` iterations.
  double stall_tol = 1e-9;
  int stall_window = 50;

  void check() const {
    if (!(sigma > 0.0 && sigma < 1.0)) throw Error(ErrorKind::Config, "sigma must lie in (0,1)");
    if (max_iters < 0) throw Error(ErrorKind::Config, "max_iters must be non-negative");
    if (!(step0 > 0.0)) throw Error(ErrorKind::Config, "step0 must be positive");
    if (!(constraint_tol > 0.0) || !(grad_tol > 0.0) || !(projection_tol > 0.0)) {
      throw Error(ErrorKind::Config, "tolerances must be positive");
    }
    if (lbfgs_memory < 0) throw Error(ErrorKind::Config, "lbfgs_memory must be non-negative");
    if (!(max_area_ratio > 1.0)) throw Error(ErrorKind::Config, "max_area_ratio must exceed 1");
    if (!(max_area_growth >= 1.0)) throw Error(ErrorKind::Config, "max_area_growth must be at least 1");
    if (seed_shape == SeedShape::File && seed_file.empty()) {
      throw Error(ErrorKind::Config, "seed_shape=file needs seed_file");
    }
  }
};

/// Applies key=value overrides ('#' starts a comment) to a FlowConfig.
inline void apply_config_text(FlowConfig& c, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::Config, "line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    // Whole-token numeric parsing: "1.5x" is an error, not 1.5.
    auto num = [&](auto parse) {
      std::size_t used = 0;
      auto v = parse(val, &used);
      if (used != val.size()) throw std::invalid_argument(val);
      return v;
    };
    auto dbl = [&] { return num([](const std::string& v, std::size_t* u) { return std::stod(v, u); }); };
    auto integer = [&] { return num([](const std::string& v, std::size_t* u) { return std::stoi(v, u); }); };
    try {
      if (key == "sigma") c.sigma = dbl();
      else if (key == "max_iters") c.max_iters = integer();
      else if (key == "step0") c.step0 = dbl();
      else if (key == "constraint_tol") c.constraint_tol = dbl();
      else if (key == "grad_tol") c.grad_tol = dbl();
      else if (key == "renormalize_area") {
        if (val == "1" || val == "true" || val == "on") c.renormalize_area = true;
        else if (val == "0" || val == "false" || val == "off") c.renormalize_area = false;
        else throw std::invalid_argument(val);
      }
      else if (key == "normal_only") {
        if (val == "1" || val == "true" || val == "on") c.normal_only = true;
        else if (val == "0" || val == "false" || val == "off") c.normal_only = false;
        else throw std::invalid_argument(val);
      }
      else if (key == "seed_shape") c.seed_shape = parse_seed_shape(val);
      else if (key == "seed_file") c.seed_file = val;
      else if (key == "resolution") c.resolution = integer();
      else if (key == "rng_seed") c.rng_seed = num([](const std::string& v, std::size_t* u) { return std::stoull(v, u); });
      else if (key == "seed_noise") c.seed_noise = dbl();
      else if (key == "projection_tol") c.projection_tol = dbl();
      else if (key == "lbfgs_memory") c.lbfgs_memory = integer();
      else if (key == "precondition_eps") c.precondition_eps = dbl();
      else if (key == "max_displacement") c.max_displacement = dbl();
      else if (key == "armijo") c.armijo = dbl();
      else if (key == "tangential_weight") c.tangential_weight = dbl();
      else if (key == "min_quality") c.min_quality = dbl();
      else if (key == "max_area_ratio") c.max_area_ratio = dbl();
      else if (key == "max_area_growth") c.max_area_growth = dbl();
      else if (key == "stall_tol") c.stall_tol = dbl();
      else if (key == "stall_window") c.stall_window = integer();
      else throw Error(ErrorKind::Config, "unknown key '" + key + "'");
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::Config, "line " + std::to_string(lineno) + ": bad value for " + key);
    }
  }
}

inline void load_config_file(FlowConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  apply_config_text(c, ss.str());
}

/// Canonical key=value form; apply_config_text(to_text(c)) reproduces c.
inline std::string config_to_text(const FlowConfig& c) {
  std::string out;
  char buf[128];
  auto put = [&](const char* key, double v) {
    std::snprintf(buf, sizeof(buf), "%s=%.17g\n", key, v);
    out += buf;
  };
  put("sigma", c.sigma);
  put("max_iters", c.max_iters);
  put("step0", c.step0);
  put("constraint_tol", c.constraint_tol);
  put("grad_tol", c.grad_tol);
  out += std::string("renormalize_area=") + (c.renormalize_area ? "true" : "false") + "\n";
  out += std::string("seed_shape=") + to_string(c.seed_shape) + "\n";
  if (!c.seed_file.empty()) out += "seed_file=" + c.seed_file + "\n";
  put("resolution", c.resolution);
  out += "rng_seed=" + std::to_string(c.rng_seed) + "\n";
  put("seed_noise", c.seed_noise);
  put("projection_tol", c.projection_tol);
  put("lbfgs_memory", c.lbfgs_memory);
  put("precondition_eps", c.precondition_eps);
  put("max_displacement", c.max_displacement);
  put("armijo", c.armijo);
  put("tangential_weight", c.tangential_weight);
  put("min_quality", c.min_quality);
  put("max_area_ratio", c.max_area_ratio);
  put("max_area_growth", c.max_area_growth);
  out += std::string("normal_only=") + (c.normal_only ? "true" : "false") + "\n";
  put("stall_tol", c.stall_tol);
  put("stall_window", c.stall_window);
  return out;
}

struct TraceRecord {
  int iter = 0;
  double willmore = 0.0;
  double iso = 0.0;
  double constraint_error = 0.0;
  double area = 0.0;
  double step = 0.0;
  double grad_norm = 0.0;  // |g - lambda c| / |g|
  double lambda = 0.0;
  double min_quality = 0.0;
  double diameter = 0.0;  // farthest-point lower bound
};

struct FlowTrace {
  std::vector<TraceRecord> records;
  std::string termination;
  std::size_t self_intersections = 0;
};

inline std::string trace_csv_header() {
  return "iter,W,I,constraint_error,area,step,grad_norm,lambda,min_quality,diameter";
}

inline std::string trace_csv_row(const TraceRecord& r) {
  char buf[360];
  std::snprintf(buf, sizeof(buf), "%d,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e", r.iter, r.willmore,
                r.iso, r.constraint_error, r.area, r.step, r.grad_norm, r.lambda, r.min_quality, r.diameter);
  return buf;
}

/// Uniform rescale about the vertex centroid to unit area.
inline void normalize_area(TriMesh& mesh) {
  const double a = total_area(mesh);
  const Vec3 c = vertex_centroid(mesh);
  const double f = 1.0 / std::sqrt(a);
  for (Vec3& p : mesh.vertices) p = c + f * (p - c);
}

/// Newton iteration along grad I / |grad I|^2 until |I - sigma| <= tol.
/// Returns the number of iterations used.
inline int project_in_place(TriMesh& mesh, double sigma, double tol, double accept_tol, bool renormalize) {
  constexpr int kMaxNewton = 25;
  double iso = iso_ratio(mesh);
  if (!(std::abs(iso - sigma) < 0.2)) {
    throw Error(ErrorKind::ProjectionStalled,
                "|I - sigma| = " + std::to_string(std::abs(iso - sigma)) + " outside the projection basin");
  }
  int it = 0;
  while (std::abs(iso - sigma) > tol) {
    if (it == kMaxNewton) {
      if (std::abs(iso - sigma) <= accept_tol) break;
      throw Error(ErrorKind::ProjectionStalled, "Newton projection did not converge in 25 iterations");
    }
    const VectorField c = iso_gradient(mesh);
    const double cc = dot(c, c);
    if (!(cc > 0.0)) throw Error(ErrorKind::ProjectionStalled, "vanishing iso-ratio gradient");
    axpy((sigma - iso) / cc, c, mesh.vertices);
    iso = iso_ratio(mesh);
    ++it;
  }
  if (renormalize) normalize_area(mesh);
  return it;
}

inline TriMesh project_to_constraint(const TriMesh& mesh, double sigma, double constraint_tol = 1e-3,
                                     bool renormalize_area = true, double projection_tol = 1e-11) {
  TriMesh out = mesh;
  project_in_place(out, sigma, std::min(projection_tol, constraint_tol), constraint_tol, renormalize_area);
  return out;
}

namespace detail {

/// Tangential part of the umbrella Laplacian: a mesh-quality field that
/// leaves the shape (to first order) unchanged.
inline VectorField tangential_smoothing(const TriMesh& mesh) {
  const std::size_t n = mesh.vertices.size();
  VectorField sum(n, Vec3::Zero());
  std::vector<int> deg(n, 0);
  VectorField normal(n, Vec3::Zero());
  for (const Face& f : mesh.faces) {
    const Vec3 cr = (mesh.vertices[f[1]] - mesh.vertices[f[0]]).cross(mesh.vertices[f[2]] - mesh.vertices[f[0]]);
    for (int c = 0; c < 3; ++c) {
      const int a = f[c];
      const int b = f[(c + 1) % 3];
      // each undirected edge is seen once per orientation over a closed mesh
      sum[a] += mesh.vertices[b];
      ++deg[a];
      sum[b] += mesh.vertices[a];
      ++deg[b];
      normal[a] += cr;
    }
  }
  VectorField t(n, Vec3::Zero());
  for (std::size_t i = 0; i < n; ++i) {
    if (deg[i] == 0) continue;
    const Vec3 d = sum[i] / deg[i] - mesh.vertices[i];
    const double nn = normal[i].norm();
    if (nn > 0.0) {
      const Vec3 u = normal[i] / nn;
      t[i] = d - d.dot(u) * u;
    }
  }
  return t;
}

/// Unit area-weighted vertex normals.
inline VectorField unit_vertex_normals(const TriMesh& mesh) {
  VectorField n(mesh.vertices.size(), Vec3::Zero());
  for (const Face& f : mesh.faces) {
    const Vec3 cr = (mesh.vertices[f[1]] - mesh.vertices[f[0]]).cross(mesh.vertices[f[2]] - mesh.vertices[f[0]]);
    for (int v : f) n[v] += cr;
  }
  for (Vec3& v : n) {
    const double l = v.norm();
    v = l > 0.0 ? Vec3(v / l) : Vec3::Zero();
  }
  return n;
}

/// Tangential part of -grad sum_i A_i^2 (barycentric vertex areas): moves
/// vertices from crowded toward sparse regions, equalizing vertex areas.
inline VectorField area_equalizing_field(const TriMesh& mesh, const VectorField& normals) {
  const std::size_t n = mesh.vertices.size();
  ScalarField va(n, 0.0);
  std::vector<Vec3> fn(mesh.faces.size());
  std::vector<double> fa(mesh.faces.size());
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const Face& fc = mesh.faces[f];
    const Vec3 cr = (mesh.vertices[fc[1]] - mesh.vertices[fc[0]]).cross(mesh.vertices[fc[2]] - mesh.vertices[fc[0]]);
    fa[f] = 0.5 * cr.norm();
    fn[f] = fa[f] > 0.0 ? Vec3(cr / (2.0 * fa[f])) : Vec3::Zero();
    for (int v : fc) va[v] += fa[f] / 3.0;
  }
  VectorField t(n, Vec3::Zero());
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const Face& fc = mesh.faces[f];
    const double w = (2.0 / 3.0) * (va[fc[0]] + va[fc[1]] + va[fc[2]]);
    for (int k = 0; k < 3; ++k) {
      const Vec3& xb = mesh.vertices[fc[(k + 1) % 3]];
      const Vec3& xc = mesh.vertices[fc[(k + 2) % 3]];
      t[fc[k]] -= w * 0.5 * fn[f].cross(xc - xb);
    }
  }
  for (std::size_t i = 0; i < n; ++i) t[i] -= t[i].dot(normals[i]) * normals[i];
  return t;
}

/// Largest vertex (mixed) area over the mean vertex area.
inline double vertex_area_ratio(const TriMesh& mesh) {
  const ScalarField a = vertex_areas(mesh);
  double mx = 0.0;
  double sum = 0.0;
  for (double v : a) {
    mx = std::max(mx, v);
    sum += v;
  }
  return sum > 0.0 ? mx * static_cast<double>(a.size()) / sum : 0.0;
}

/// True when every vertex area fraction A_i / A stays within cap[i].
inline bool areas_within(const TriMesh& mesh, const ScalarField& cap) {
  const ScalarField a = vertex_areas(mesh);
  double sum = 0.0;
  for (double v : a) sum += v;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > cap[i] * sum) return false;
  }
  return true;
}

/// Keeps only the normal component at every vertex.
inline void project_normal(VectorField& v, const VectorField& normals) {
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = v[i].dot(normals[i]) * normals[i];
}

/// Applies (K + eps M)^-1 M (K + eps M)^-1 to a vector field, where K is
/// the cotangent stiffness matrix and M the lumped (mixed) mass.
class SobolevPreconditioner {
 public:
  void update(const TriMesh& mesh, double eps) {
    const int n = static_cast<int>(mesh.vertices.size());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(mesh.faces.size() * 9 + n);
    mass_ = vertex_areas(mesh);
    const double area = total_area(mesh);
    for (const Face& f : mesh.faces) {
      const TriangleGeometry g = triangle_geometry(mesh, f);
      for (int c = 0; c < 3; ++c) {
        const int a = f[(c + 1) % 3];
        const int b = f[(c + 2) % 3];
        const double w = 0.5 * g.cot[c];
        trip.emplace_back(a, b, -w);
        trip.emplace_back(b, a, -w);
        trip.emplace_back(a, a, w);
        trip.emplace_back(b, b, w);
      }
    }
    for (int i = 0; i < n; ++i) trip.emplace_back(i, i, eps / area * mass_[i]);
    Eigen::SparseMatrix<double> k(n, n);
    k.setFromTriplets(trip.begin(), trip.end());
    if (!analyzed_ || n != size_) {
      solver_.analyzePattern(k);
      analyzed_ = true;
      size_ = n;
    }
    solver_.factorize(k);
    ok_ = solver_.info() == Eigen::Success;
  }

  bool ok() const { return ok_; }

  VectorField apply(const VectorField& v) const {
    const int n = size_;
    Eigen::MatrixXd rhs(n, 3);
    for (int i = 0; i < n; ++i) rhs.row(i) = v[i].transpose();
    Eigen::MatrixXd x = solver_.solve(rhs);
    for (int i = 0; i < n; ++i) x.row(i) *= mass_[i];
    x = solver_.solve(x);
    VectorField out(n);
    for (int i = 0; i < n; ++i) out[i] = x.row(i).transpose();
    return out;
  }

 private:
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
  ScalarField mass_;
  int size_ = 0;
  bool analyzed_ = false;
  bool ok_ = false;
};

inline void remove_component(VectorField& v, const VectorField& c, double cc) {
  if (cc > 0.0) axpy(-dot(v, c) / cc, c, v);
}

/// Stretches the mesh along its principal axis (largest vertex spread) by
/// the factor that brings I to sigma, found by bisection. Warm starts use
/// this instead of a long Newton jump along grad I, which buys the missing
/// area with wrinkles on irregular vertices. Returns false, leaving the
/// mesh alone, if no factor in [1/4, 4] brackets sigma.
inline bool stretch_to_sigma(TriMesh& mesh, double sigma, double tol) {
  const Vec3 c = vertex_centroid(mesh);
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const Vec3& p : mesh.vertices) cov += (p - c) * (p - c).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  const Vec3 axis = es.eigenvectors().col(2);
  auto stretched = [&](double s) {
    TriMesh m = mesh;
    for (Vec3& p : m.vertices) p += (s - 1.0) * (p - c).dot(axis) * axis;
    return m;
  };
  const double iso0 = iso_ratio(mesh);
  // Elongating lowers I for the shapes met here; shortening raises it.
  double lo = 1.0;
  double hi = iso0 > sigma ? 4.0 : 0.25;
  if ((iso_ratio(stretched(hi)) - sigma) * (iso0 - sigma) > 0.0) return false;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f = iso_ratio(stretched(mid)) - sigma;
    if (std::abs(f) <= tol) {
      lo = mid;
      break;
    }
    if ((f > 0.0) == (iso0 > sigma)) lo = mid;
    else hi = mid;
  }
  mesh = stretched(lo);
  return true;
}


}  // namespace detail

struct StepDiagnostics {
  double willmore_before = 0.0;
  double willmore_after = 0.0;
  double step = 0.0;
  double lambda = 0.0;
  double grad_norm = 0.0;  // |g - lambda c| / |g|
  double direction_norm = 0.0;
  int backtracks = 0;
  bool accepted = false;
};

/// Stateful constrained descent: L-BFGS two-loop preconditioning of the
/// projected gradient, projected again onto the tangent of the constraint.
class ConstrainedDescent {
 public:
  explicit ConstrainedDescent(const FlowConfig& config) : config_(config) {}

  /// One iteration on `mesh` (assumed feasible). On acceptance `mesh` is
  /// replaced; on failure it is left untouched and LineSearchFailed thrown.
  StepDiagnostics step(TriMesh& mesh) {
    StepDiagnostics d;
    if (area_ref_.size() != mesh.vertices.size()) {
      const ScalarField a0 = vertex_areas(mesh);
      double sum = 0.0;
      for (double v : a0) sum += v;
      area_ref_.resize(a0.size());
      for (std::size_t i = 0; i < a0.size(); ++i) {
        area_ref_[i] = std::max(config_.max_area_ratio / static_cast<double>(a0.size()), config_.max_area_growth * a0[i] / sum);
      }
    }
    VectorField g;
    const double w0 = willmore_energy_and_gradient(mesh, g);
    const VectorField c = iso_gradient(mesh);
    const double cc = dot(c, c);
    d.willmore_before = w0;
    d.lambda = cc > 0.0 ? dot(g, c) / cc : 0.0;
    // Descent acts on normal velocities only: tangential gradient components
    // reward vertex drift that games the discrete energy.
    const VectorField normals = detail::unit_vertex_normals(mesh);
    VectorField pg = g;
    axpy(-d.lambda, c, pg);
    VectorField gn = g;
    if (config_.normal_only) {
      detail::project_normal(pg, normals);
      detail::project_normal(gn, normals);
    }
    const double pg_norm = norm(pg);
    const double gn_norm = norm(gn);
    d.grad_norm = gn_norm > 0.0 ? pg_norm / gn_norm : 0.0;

    if (have_prev_) {
      VectorField s = mesh.vertices;
      axpy(-1.0, prev_x_, s);
      VectorField y = pg;
      axpy(-1.0, prev_pg_, y);
      const double sy = dot(s, y);
      if (sy > 1e-12 * norm(s) * norm(y)) {
        mem_.push_back({std::move(s), std::move(y), 1.0 / sy});
        if (static_cast<int>(mem_.size()) > config_.lbfgs_memory) mem_.pop_front();
      }
    }

    use_precond_ = false;
    if (config_.precondition_eps > 0.0) {
      precond_.update(mesh, config_.precondition_eps);
      use_precond_ = precond_.ok();
    }
    auto shaped = [&] {
      VectorField v = lbfgs_direction(pg);
      if (config_.normal_only) detail::project_normal(v, normals);
      detail::remove_component(v, c, cc);
      return v;
    };
    VectorField dir = shaped();
    double slope = dot(dir, g);
    if (!(slope < 0.0)) {
      mem_.clear();
      dir = shaped();
      slope = dot(dir, g);
      if (!(slope < 0.0)) {
        dir = scaled_field(pg, -1.0);
        detail::remove_component(dir, c, cc);
        slope = dot(dir, g);
      }
    }
    // Tangential regularization at a fixed fraction of the direction size,
    // halved until the combined direction still descends.
    if (config_.tangential_weight > 0.0) {
      VectorField t = detail::area_equalizing_field(mesh, normals);
      VectorField u = detail::tangential_smoothing(mesh);
      const double tn = norm(t);
      const double un = norm(u);
      const double dn = norm(dir);
      if (tn > 0.0 && un > 0.0 && dn > 0.0) {
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = t[i] / tn + u[i] / un;
        detail::remove_component(t, c, cc);
        const double mixed = norm(t);
        double mix = config_.tangential_weight * dn / mixed;
        const double tg = dot(t, g);
        for (int k = 0; k < 10; ++k, mix *= 0.5) {
          if (slope + mix * tg < 0.5 * slope) {
            axpy(mix, t, dir);
            slope += mix * tg;
            break;
          }
        }
      }
    }
    d.direction_norm = norm(dir);

    double t = (mem_.empty() && !use_precond_) ? config_.step0 / std::max(d.direction_norm, 1e-300) : 1.0;
    double max_disp = 0.0;
    for (const Vec3& v : dir) max_disp = std::max(max_disp, v.norm());
    const double cap = config_.max_displacement * mean_edge_length(mesh);
    if (max_disp * t > cap) t = cap / max_disp;
    constexpr int kMaxBacktracks = 60;
    for (int bt = 0; bt <= kMaxBacktracks; ++bt) {
      TriMesh trial = mesh;
      axpy(t, dir, trial.vertices);
      bool ok = true;
      double w1 = 0.0;
      try {
        project_in_place(trial, config_.sigma, std::min(config_.projection_tol, config_.constraint_tol),
                         config_.constraint_tol, config_.renormalize_area);
        if (min_face_quality(trial) < config_.min_quality || !detail::areas_within(trial, area_ref_)) {
          ok = false;
        } else {
          w1 = willmore_energy(trial);
        }
      } catch (const Error&) {
        ok = false;
      }
      if (ok && std::isfinite(w1) && w1 < w0 && w1 <= w0 + config_.armijo * t * slope) {
        prev_x_ = mesh.vertices;
        prev_pg_ = std::move(pg);
        have_prev_ = true;
        mesh = std::move(trial);
        d.willmore_after = w1;
        d.step = t;
        d.backtracks = bt;
        d.accepted = true;
        last_step_ = t;
        return d;
      }
      t *= 0.5;
    }
    mem_.clear();
    have_prev_ = false;
    throw Error(ErrorKind::LineSearchFailed, "no acceptable step down to t = " + std::to_string(t));
  }

  void reset() {
    mem_.clear();
    have_prev_ = false;
    last_step_ = 0.0;
    area_ref_.clear();
  }

 private:
  struct Pair {
    VectorField s, y;
    double rho;
  };

  VectorField lbfgs_direction(const VectorField& pg) {
    VectorField q = pg;
    std::vector<double> alpha(mem_.size());
    for (std::size_t k = mem_.size(); k-- > 0;) {
      alpha[k] = mem_[k].rho * dot(mem_[k].s, q);
      axpy(-alpha[k], mem_[k].y, q);
    }
    double gamma = 1.0;
    if (use_precond_) {
      q = precond_.apply(q);
      if (!mem_.empty()) {
        const Pair& last = mem_.back();
        gamma = dot(last.s, last.y) / dot(last.y, precond_.apply(last.y));
      }
    } else if (!mem_.empty()) {
      const Pair& last = mem_.back();
      gamma = dot(last.s, last.y) / dot(last.y, last.y);
    }
    for (Vec3& v : q) v *= gamma;
    for (std::size_t k = 0; k < mem_.size(); ++k) {
      const double beta = mem_[k].rho * dot(mem_[k].y, q);
      axpy(alpha[k] - beta, mem_[k].s, q);
    }
    for (Vec3& v : q) v = -v;
    return q;
  }

  FlowConfig config_;
  std::deque<Pair> mem_;
  VectorField prev_x_, prev_pg_;
  bool have_prev_ = false;
  double last_step_ = 0.0;
  ScalarField area_ref_;  // per-vertex cap on area fraction
  detail::SobolevPreconditioner precond_;
  bool use_precond_ = false;
};

/// Single constrained step from a fresh state (plain projected gradient).
inline std::pair<TriMesh, StepDiagnostics> constrained_step(const TriMesh& mesh, const FlowConfig& config) {
  FlowConfig c = config;
  c.lbfgs_memory = 0;
  ConstrainedDescent desc(c);
  TriMesh out = mesh;
  StepDiagnostics d = desc.step(out);
  return {std::move(out), d};
}

inline TriMesh make_seed(const FlowConfig& config) {
  TriMesh seed;
  switch (config.seed_shape) {
    case SeedShape::Prolate: seed = prolate_mesh(std::min(config.sigma, 0.999), config.resolution); break;
    case SeedShape::Dumbbell: seed = dumbbell_mesh(std::min(config.sigma, 0.999), config.resolution); break;
    case SeedShape::Stomatocyte: seed = stomatocyte_mesh(std::min(config.sigma, 0.999), config.resolution); break;
    case SeedShape::Icosphere: {
      int level = 0;
      while (10 * (1 << (2 * (level + 1))) + 2 <= config.resolution) ++level;
      seed = icosphere(1.0, level);
      break;
    }
    case SeedShape::File: seed = read_obj(config.seed_file); break;
  }
  if (config.seed_noise > 0.0) {
    std::mt19937_64 rng(config.rng_seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    const double h = config.seed_noise * mean_edge_length(seed);
    for (Vec3& p : seed.vertices) p += h * Vec3(nd(rng), nd(rng), nd(rng));
  }
  return seed;
}

struct MinimizeResult {
  TriMesh mesh;
  FlowTrace trace;
};

inline TraceRecord make_record(int iter, const TriMesh& mesh, double sigma, double w, double step,
                               double grad_norm, double lambda) {
  TraceRecord r;
  r.iter = iter;
  r.willmore = w;
  r.area = total_area(mesh);
  r.iso = iso_ratio_from(r.area, enclosed_volume(mesh));
  r.constraint_error = std::abs(r.iso - sigma);
  r.step = step;
  r.grad_norm = grad_norm;
  r.lambda = lambda;
  r.min_quality = min_face_quality(mesh);
  r.diameter = diameter_lower_bound(mesh);
  return r;
}

/// Runs the constrained descent from `start` (projected first).
inline MinimizeResult minimize_from(const TriMesh& start, const FlowConfig& config) {
  config.check();
  require_valid(start, "minimize seed");
  MinimizeResult res;
  TriMesh approached = start;
  if (std::abs(iso_ratio(start) - config.sigma) > 1e-3) {
    detail::stretch_to_sigma(approached, config.sigma, 1e-6);
  }
  res.mesh = project_to_constraint(approached, config.sigma, config.constraint_tol, config.renormalize_area,
                                   config.projection_tol);
  if (min_face_quality(res.mesh) < config.min_quality) {
    throw Error(ErrorKind::MeshDegenerated, "seed mesh quality below threshold");
  }
  ConstrainedDescent desc(config);
  double w = willmore_energy(res.mesh);
  res.trace.records.push_back(make_record(0, res.mesh, config.sigma, w, 0.0, 1.0, 0.0));
  res.trace.termination = "max_iters";
  for (int it = 1; it <= config.max_iters; ++it) {
    StepDiagnostics d;
    try {
      d = desc.step(res.mesh);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::LineSearchFailed) throw;
      res.trace.termination = "line_search";
      break;
    }
    w = d.willmore_after;
    res.trace.records.push_back(make_record(it, res.mesh, config.sigma, w, d.step, d.grad_norm, d.lambda));
    if (res.trace.records.back().min_quality < config.min_quality) {
      throw Error(ErrorKind::MeshDegenerated, "min face quality fell below " + std::to_string(config.min_quality));
    }
    if (d.grad_norm < config.grad_tol) {
      res.trace.termination = "grad_tol";
      break;
    }
    const auto& recs = res.trace.records;
    if (config.stall_window > 0 && static_cast<int>(recs.size()) > config.stall_window) {
      const double old = recs[recs.size() - 1 - config.stall_window].willmore;
      if (old - w < config.stall_tol * std::abs(w)) {
        res.trace.termination = "stalled";
        break;
      }
    }
  }
  res.trace.self_intersections = count_self_intersections(res.mesh);
  return res;
}

inline MinimizeResult minimize(const FlowConfig& config) {
  config.check();
  return minimize_from(make_seed(config), config);
}

// ---------------------------------------------------------------------------
// Sweep

struct BetaPoint {
  double sigma = 0.0;
  double beta_hat = 0.0;
  int iters = 0;
  std::size_t vertices = 0;
  double min_quality = 0.0;
  std::string termination;
  std::string source;  // which start produced the kept minimizer
  /// W from every start, keyed by start name; failed starts are absent.
  std::map<std::string, double> candidates;
  bool local_minimum_flag = false;
  std::vector<std::string> failures;
  TriMesh mesh;
  std::vector<std::pair<std::string, FlowTrace>> traces;
};

struct SweepOptions {
  std::vector<SeedShape> cold_seeds{SeedShape::Prolate, SeedShape::Dumbbell, SeedShape::Stomatocyte};
  bool warm_start = true;
  bool keep_traces = true;
  /// Starts of one sigma run concurrently on up to this many threads. Results
  /// are merged in a fixed order, so output does not depend on it.
  int jobs = 1;
  /// Called after every finished point, e.g. for progress logging.
  std::function<void(const BetaPoint&)> on_point;
};

/// Minimizes at every sigma (descending) from a warm start (the previous
/// minimizer) and from each cold seed, keeping the lowest W.
inline std::vector<BetaPoint> beta_sweep(const std::vector<double>& sigmas, const FlowConfig& base,
                                         const SweepOptions& options = {}) {
  for (std::size_t i = 1; i < sigmas.size(); ++i) {
    if (!(sigmas[i] < sigmas[i - 1])) throw Error(ErrorKind::Config, "sweep sigmas must be strictly descending");
  }
  std::vector<BetaPoint> out;
  std::optional<TriMesh> warm;
  for (double sigma : sigmas) {
    BetaPoint bp;
    bp.sigma = sigma;
    FlowConfig cfg = base;
    cfg.sigma = sigma;
    cfg.check();
    auto consider = [&](const std::string& name, MinimizeResult&& r) {
      const double w = r.trace.records.back().willmore;
      bp.candidates[name] = w;
      if (bp.mesh.vertices.empty() || w < bp.beta_hat) {
        bp.beta_hat = w;
        bp.iters = r.trace.records.back().iter;
        bp.vertices = r.mesh.vertices.size();
        bp.min_quality = r.trace.records.back().min_quality;
        bp.termination = r.trace.termination;
        bp.source = name;
        bp.mesh = r.mesh;
      }
      if (options.keep_traces) bp.traces.emplace_back(name, std::move(r.trace));
    };
    struct Task {
      std::string name;
      std::function<MinimizeResult()> run;
      std::optional<MinimizeResult> result;
      std::string error;
    };
    std::vector<Task> tasks;
    if (options.warm_start && warm) {
      const TriMesh start = *warm;
      tasks.push_back({"warm", [start, cfg] { return minimize_from(start, cfg); }, {}, {}});
    }
    for (SeedShape s : options.cold_seeds) {
      FlowConfig c2 = cfg;
      c2.seed_shape = s;
      tasks.push_back({to_string(s), [c2] { return minimize(c2); }, {}, {}});
    }
    auto execute = [](Task& t) {
      try {
        t.result = t.run();
      } catch (const Error& e) {
        t.error = t.name + ": " + e.what();
      }
    };
    const std::size_t width = static_cast<std::size_t>(std::max(1, options.jobs));
    for (std::size_t first = 0; first < tasks.size(); first += width) {
      const std::size_t last = std::min(tasks.size(), first + width);
      if (width == 1) {
        execute(tasks[first]);
        continue;
      }
      std::vector<std::thread> pool;
      for (std::size_t t = first; t < last; ++t) pool.emplace_back(execute, std::ref(tasks[t]));
      for (std::thread& th : pool) th.join();
    }
    for (Task& t : tasks) {
      if (t.result) {
        consider(t.name, std::move(*t.result));
      } else {
        bp.failures.push_back(t.error);
      }
    }
    if (!bp.mesh.vertices.empty()) {
      if (bp.candidates.count("warm")) {
        for (const auto& [name, w] : bp.candidates) {
          if (name != "warm" && std::abs(w - bp.candidates["warm"]) > 0.02 * bp.beta_hat) {
            bp.local_minimum_flag = true;
          }
        }
      }
      warm = bp.mesh;
    }
    if (options.on_point) options.on_point(bp);
    out.push_back(std::move(bp));
  }
  return out;
}

inline std::string beta_csv_header() { return "sigma,beta_hat,iters,vertices,termination"; }

inline std::string beta_csv_row(const BetaPoint& p) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%.12e,%.12e,%d,%zu,%s", p.sigma, p.beta_hat, p.iters, p.vertices,
                p.mesh.vertices.empty() ? "failed" : p.termination.c_str());
  return buf;
}

}  // namespace willmiso
