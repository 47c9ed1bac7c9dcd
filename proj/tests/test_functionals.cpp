#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Geometry>
#include <gtest/gtest.h>

#include "willmiso/corpus.hpp"
#include "willmiso/functionals.hpp"
#include "willmiso/mesh.hpp"

using namespace willmiso;
constexpr double kPi = std::numbers::pi;

// Cotangent Laplacian assembled edge by edge (opposite angles from acos),
// independent of the face-loop implementation.
static VectorField laplacian_oracle(const TriMesh& m) {
  VectorField out(m.vertices.size(), Vec3::Zero());
  for (const Face& f : m.faces) {
    for (int k = 0; k < 3; ++k) {
      const int o = f[k], i = f[(k + 1) % 3], j = f[(k + 2) % 3];
      const Vec3 u = m.vertices[i] - m.vertices[o];
      const Vec3 v = m.vertices[j] - m.vertices[o];
      const double ang = std::acos(u.dot(v) / (u.norm() * v.norm()));
      const double w = 0.5 / std::tan(ang);
      out[i] += w * (m.vertices[j] - m.vertices[i]);
      out[j] += w * (m.vertices[i] - m.vertices[j]);
    }
  }
  return out;
}

TEST(MeanCurvature, MatchesEdgeOracle) {
  for (const NamedMesh& nm : genus0_corpus()) {
    const VectorField lap = integrated_laplacian(nm.mesh);
    const VectorField ref = laplacian_oracle(nm.mesh);
    double scale = 0.0;
    for (const Vec3& v : ref) scale = std::max(scale, v.norm());
    for (std::size_t i = 0; i < lap.size(); ++i) EXPECT_LT((lap[i] - ref[i]).norm(), 1e-10 * scale) << nm.name;
  }
}

TEST(MeanCurvature, SphereMagnitudeAndDirection) {
  for (double r : {1.0, 2.0}) {
    const TriMesh m = icosphere(r, 4);
    const VectorField h = mean_curvature_vector(m);
    for (std::size_t i = 0; i < h.size(); ++i) {
      EXPECT_NEAR(h[i].norm() * r / 2.0, 1.0, 0.01);
      EXPECT_LT(h[i].dot(m.vertices[i]), 0.0);  // inward
    }
  }
}

TEST(MeanCurvature, IntegratesToZero) {
  for (const NamedMesh& nm : genus0_corpus()) {
    const VectorField h = mean_curvature_vector(nm.mesh);
    const ScalarField a = vertex_areas(nm.mesh);
    Vec3 s = Vec3::Zero();
    double hmax = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
      s += a[i] * h[i];
      hmax = std::max(hmax, h[i].norm());
    }
    EXPECT_LT(s.norm(), 1e-3 * std::sqrt(total_area(nm.mesh)) * hmax) << nm.name;
  }
}

TEST(GaussCurvature, GaussBonnetOnCorpus) {
  for (const NamedMesh& nm : genus0_corpus()) {
    EXPECT_NEAR(total_gauss_curvature(nm.mesh), 4.0 * kPi, 1e-9) << nm.name;
  }
}

TEST(GaussCurvature, SphereAndCube) {
  const ScalarField k = gauss_curvature(icosphere(1.0, 4));
  for (double v : k) EXPECT_NEAR(v, 1.0, 0.02);
  const TriMesh cube = unit_cube();
  const ScalarField d = angle_defects(cube);
  for (double v : d) EXPECT_NEAR(v, kPi / 2.0, 1e-12);
}

TEST(Willmore, SphereCalibration) {
  EXPECT_NEAR(willmore_energy(icosphere(1.0, 4)) / (4.0 * kPi), 1.0, 0.01);
  EXPECT_NEAR(willmore_energy(icosphere(7.3, 4)) / willmore_energy(icosphere(1.0, 4)), 1.0, 1e-9);
}

TEST(Willmore, ConvergesMonotonicallyOnIcospheres) {
  double prev = 1e300;
  for (int level = 2; level <= 5; ++level) {
    const double err = std::abs(willmore_energy(icosphere(1.0, level)) - 4.0 * kPi);
    EXPECT_LT(err, prev) << level;
    prev = err;
  }
}

// W of the spheroid (a, a, c) by Gauss-Legendre in the polar angle, using
// the closed-form principal curvatures of a surface of revolution.
static double spheroid_willmore(double a, double c) {
  const int n = 400;
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    // midpoint panels with 2-point Gauss inside each
    for (double g : {-1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0)}) {
      const double t = (k + 0.5 + 0.5 * g) * kPi / n;
      const double q = std::sqrt(a * a * std::cos(t) * std::cos(t) + c * c * std::sin(t) * std::sin(t));
      const double k1 = a * c / (q * q * q);
      const double k2 = c / (a * q);
      const double da = 2.0 * kPi * a * std::sin(t) * q;
      sum += 0.5 * (kPi / n) * 0.25 * (k1 + k2) * (k1 + k2) * da;
    }
  }
  return sum;
}

TEST(Willmore, ProlateSpheroidAgainstQuadrature) {
  EXPECT_NEAR(spheroid_willmore(1.0, 1.0), 4.0 * kPi, 1e-6);
  TriMesh m = icosphere(1.0, 4);
  for (Vec3& p : m.vertices) p.z() *= 2.0;
  const double w = willmore_energy(m);
  const double ref = spheroid_willmore(1.0, 2.0);
  EXPECT_GT(w, 4.0 * kPi);
  EXPECT_NEAR(w / ref, 1.0, 0.02);
}

TEST(IsoRatio, ExactSphereAndCube) {
  EXPECT_NEAR(iso_ratio_from(4.0 * kPi, 4.0 * kPi / 3.0), 1.0, 1e-15);
  EXPECT_NEAR(iso_ratio(unit_cube()), 0.8978, 1e-4);
  EXPECT_NEAR(iso_ratio(unit_cube()), std::cbrt(6.0 * std::sqrt(kPi)) / std::sqrt(6.0), 1e-15);
}

TEST(IsoRatio, RejectsNonPositiveVolume) {
  TriMesh m = icosphere(1.0, 1);
  for (Face& f : m.faces) std::swap(f[1], f[2]);
  EXPECT_THROW(iso_ratio(m), Error);
}

TEST(Invariance, RandomScalesAndRigidMotions) {
  const TriMesh base = genus0_corpus()[5].mesh;
  const double w0 = willmore_energy(base);
  const double i0 = iso_ratio(base);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ls(-2.0, 2.0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const TriMesh s = scaled(base, std::pow(10.0, ls(rng)));
    EXPECT_NEAR(willmore_energy(s) / w0, 1.0, 1e-9);
    EXPECT_NEAR(iso_ratio(s) / i0, 1.0, 1e-9);
  }
  for (int k = 0; k < 20; ++k) {
    const Eigen::Quaterniond q = Eigen::Quaterniond(u(rng), u(rng), u(rng), u(rng)).normalized();
    const TriMesh t = transformed(base, q.toRotationMatrix(), Vec3(5 * u(rng), 5 * u(rng), 5 * u(rng)));
    EXPECT_NEAR(willmore_energy(t) / w0, 1.0, 1e-9);
    EXPECT_NEAR(iso_ratio(t) / i0, 1.0, 1e-9);
  }
}

TEST(Metrics, SphereValuesAndIdentity) {
  const SurfaceMetrics s = metrics(icosphere(1.0, 4));
  EXPECT_NEAR(s.area / (4 * kPi), 1.0, 2e-3);
  EXPECT_NEAR(s.volume / (4 * kPi / 3), 1.0, 3e-3);
  EXPECT_NEAR(s.iso_ratio, 1.0, 5e-3);
  EXPECT_NEAR(s.total_gauss, 4 * kPi, 1e-9);
  EXPECT_NEAR(s.total_sff / (8 * kPi), 1.0, 0.02);
  for (const NamedMesh& nm : genus0_corpus()) {
    const SurfaceMetrics m = metrics(nm.mesh);
    EXPECT_NEAR(m.total_sff, 4.0 * m.willmore - 2.0 * m.total_gauss, 1e-9 * std::abs(4.0 * m.willmore));
    EXPECT_GE(m.willmore, 0.0);
    EXPECT_GE(m.total_sff, 0.0) << nm.name;
  }
  EXPECT_NEAR(metrics(unit_cube()).total_gauss, 4 * kPi, 1e-12);
}

TEST(Metrics, CsvRow) {
  EXPECT_EQ(metrics_csv_header(), "A,V,I,W,total_sff,total_gauss");
  const std::string row = metrics_csv_row(metrics(unit_cube()));
  EXPECT_EQ(row.rfind("6.000000000000e+00,1.000000000000e+00,", 0), 0u) << row;
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), 5);
}
