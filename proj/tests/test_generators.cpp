#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "willmiso/functionals.hpp"
#include "willmiso/generators.hpp"

using namespace willmiso;
constexpr double kPi = std::numbers::pi;

TEST(Inversion, FixedPointsAndInvolution) {
  EXPECT_LT((invert_at_unit_sphere(Vec3(0, 0, 2)) - Vec3(0, 0, 2)).norm(), 1e-15);
  EXPECT_LT((invert_at_unit_sphere(Vec3(0, 0, 3)) - Vec3(0, 0, 1.5)).norm(), 1e-15);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  int tested = 0;
  while (tested < 1000) {
    const Vec3 p(u(rng), u(rng), u(rng));
    if ((p - Vec3(0, 0, 1)).norm() < 0.1) continue;
    EXPECT_LT((invert_at_unit_sphere(invert_at_unit_sphere(p)) - p).norm(), 1e-12 * std::max(1.0, p.norm()));
    ++tested;
  }
  EXPECT_THROW(invert_at_unit_sphere(Vec3(0, 0, 1)), Error);
}

TEST(Catenoid, ParamsChecked) {
  CatenoidParams p;
  p.a = 0.3;
  p.s_max = 2.0;  // below 8a
  EXPECT_THROW(p.check(), Error);
  p.s_max = 2.4;
  p.n_s = 8;
  EXPECT_THROW(p.check(), Error);
  p.n_s = 64;
  p.a = -1;
  EXPECT_THROW(p.check(), Error);
}

TEST(Catenoid, UninvertedIsMinimal) {
  CatenoidParams p;
  p.a = 0.3;
  p.s_max = 2.4;
  EXPECT_LT(catenoid_mean_curvature_l2(p), 1e-8);
}

TEST(Catenoid, QuadratureGivesEightPi) {
  CatenoidParams p;
  p.a = 0.3;
  p.s_max = 2.4;
  const SurfaceMetrics m = catenoid_metrics_quadrature(p);
  EXPECT_NEAR(m.willmore / (8 * kPi), 1.0, 1e-3);
  // Truncation independence once s_max >= 8a.
  p.s_max = 4.0;
  EXPECT_NEAR(catenoid_metrics_quadrature(p).willmore / m.willmore, 1.0, 1e-3);
}

TEST(Catenoid, IsoRatioDecreasesWithNeck) {
  double prev = 1.0;
  for (double a : {0.5, 0.3, 0.2, 0.1}) {
    CatenoidParams p;
    p.a = a;
    p.s_max = 8 * a;
    const double iso = catenoid_metrics_quadrature(p).iso_ratio;
    EXPECT_LT(iso, prev) << a;
    EXPECT_GT(iso, 0.0);
    prev = iso;
  }
}

TEST(Catenoid, MeshValidAndIsoDecreasing) {
  double prev = 1.0;
  for (double a : {0.5, 0.3, 0.2, 0.1}) {
    CatenoidParams p;
    p.a = a;
    p.s_max = 8 * a;
    p.n_s = 128;
    p.n_theta = 64;
    const TriMesh m = inverted_catenoid_mesh(p);
    const ValidationReport r = validate(m);
    EXPECT_TRUE(r.ok()) << a;
    EXPECT_EQ(r.euler_characteristic, 2);
    const double iso = iso_ratio(m);
    EXPECT_LT(iso, prev) << a;
    prev = iso;
  }
}

TEST(Catenoid, MeshAgreesWithQuadrature) {
  CatenoidParams p;
  p.a = 0.3;
  p.s_max = 2.4;
  p.n_s = 512;
  p.n_theta = 256;
  const SurfaceMetrics mesh = metrics(inverted_catenoid_mesh(p));
  const SurfaceMetrics quad = catenoid_metrics_quadrature(p);
  EXPECT_NEAR(mesh.willmore / (8 * kPi), 1.0, 0.03);
  EXPECT_NEAR(mesh.area / quad.area, 1.0, 0.03);
  EXPECT_NEAR(mesh.volume / quad.volume, 1.0, 0.03);
  EXPECT_NEAR(mesh.iso_ratio / quad.iso_ratio, 1.0, 0.03);
}

TEST(Catenoid, MeshA05S4) {
  CatenoidParams p;
  p.a = 0.5;
  p.s_max = 4.0;
  p.n_s = 256;
  p.n_theta = 128;
  const ValidationReport r = validate(inverted_catenoid_mesh(p));
  EXPECT_TRUE(r.ok());
  EXPECT_EQ(r.euler_characteristic, 2);
}

TEST(Seeds, ProlateHitsTarget) {
  for (double s : {0.99, 0.9, 0.7}) {
    double aspect = 0.0;
    const TriMesh m = prolate_mesh(s, 4000, &aspect);
    EXPECT_TRUE(validate(m).ok());
    EXPECT_NEAR(iso_ratio(m), s, 1e-3);
    EXPECT_GT(aspect, 1.0);
    if (s == 0.9) {
      // spheroid with I = 0.9 by quadrature: c/a = 3.52957, W = 22.3391
      EXPECT_NEAR(aspect / 3.52957, 1.0, 0.02);
      EXPECT_NEAR(willmore_energy(m) / 22.3391, 1.0, 0.02);
    }
    if (s == 0.7) EXPECT_GT(willmore_energy(m), 8 * kPi);
  }
  double a1 = 0.0, a2 = 0.0;
  prolate_mesh(0.999, 2000, &a1);
  prolate_mesh(0.99, 2000, &a2);
  EXPECT_LT(a1, a2);
  EXPECT_LT(a1, 1.2);
}

TEST(Seeds, ProlateFamilyHasFloor) { EXPECT_THROW(prolate_mesh(0.4, 2000), Error); }

TEST(Seeds, DumbbellHitsTargetAndNeckMonotone) {
  double prev = 0.0;
  for (double s : {0.3, 0.5, 0.7, 0.9}) {
    double neck = 0.0;
    const TriMesh m = dumbbell_mesh(s, 4000, &neck);
    EXPECT_TRUE(validate(m).ok()) << s;
    EXPECT_NEAR(iso_ratio(m), s, 1e-3);
    EXPECT_GT(neck, prev);
    prev = neck;
  }
  EXPECT_NEAR(iso_ratio(dumbbell_mesh(0.95, 4000)), 0.95, 1e-3);
  EXPECT_NEAR(iso_ratio(dumbbell_mesh(0.4, 4000)), 0.4, 1e-3);
}

TEST(Seeds, StomatocyteHitsTarget) {
  for (double s : {0.8, 0.5, 0.35}) {
    const TriMesh m = stomatocyte_mesh(s, 4000);
    EXPECT_TRUE(validate(m).ok()) << s;
    EXPECT_GT(enclosed_volume(m), 0.0);
    EXPECT_NEAR(iso_ratio(m), s, 1e-3);
  }
}

TEST(Seeds, ResolutionControlsVertexCount) {
  for (int res : {2000, 10000}) {
    const double n = static_cast<double>(prolate_mesh(0.8, res).vertices.size());
    EXPECT_GT(n, 0.6 * res);
    EXPECT_LT(n, 1.4 * res);
  }
}

TEST(Seeds, RejectsBadTargets) {
  EXPECT_THROW(dumbbell_mesh(1.2, 2000), Error);
  EXPECT_THROW(prolate_mesh(0.0, 2000), Error);
}
