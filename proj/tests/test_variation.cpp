#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "willmiso/corpus.hpp"
#include "willmiso/functionals.hpp"
#include "willmiso/variation.hpp"

using namespace willmiso;

static VectorField bump_field(const TriMesh& m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Vec3 center = m.vertices[rng() % m.vertices.size()];
  const Vec3 amp(u(rng), u(rng), u(rng));
  VectorField x(m.vertices.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d2 = (m.vertices[i] - center).squaredNorm();
    x[i] = amp * std::exp(-d2 / 0.1);
  }
  return x;
}

// Richardson-extrapolated central difference, written out independently of
// the library harness.
template <typename F>
static double fd_oracle(F f, const TriMesh& m, const VectorField& x, double h) {
  auto c = [&](double t) { return (f(displaced(m, x, t)) - f(displaced(m, x, -t))) / (2.0 * t); };
  return (4.0 * c(0.5 * h) - c(h)) / 3.0;
}

TEST(FirstVariation, DilationAndTranslationVanish) {
  for (const NamedMesh& nm : genus0_corpus()) {
    const TriMesh m = translated(nm.mesh, -vertex_centroid(nm.mesh));
    const double iso = iso_ratio(m);
    EXPECT_LT(std::abs(iso_first_variation(m, VariationField(m.vertices))), 1e-6 * iso) << nm.name;
    for (int k = 0; k < 3; ++k) {
      const VectorField c(m.vertices.size(), Vec3::Unit(k) * 0.7);
      EXPECT_LT(std::abs(iso_first_variation(m, VariationField(c))), 1e-6) << nm.name;
    }
  }
}

TEST(FirstVariation, MatchesFiniteDifference) {
  const TriMesh m = icosphere(1.0, 3);
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const VectorField x = bump_field(m, s);
    const double fd = fd_oracle(iso_ratio, m, x, 1e-4);
    const double an = iso_first_variation(m, VariationField(x));
    EXPECT_LT(std::abs(an - fd) / (std::abs(fd) + 1e-12), 1e-5) << s;
  }
}

TEST(FirstVariation, AgreesWithGradientPairing) {
  for (const NamedMesh& nm : genus0_corpus()) {
    const VectorField x = bump_field(nm.mesh, 9);
    const double a = iso_first_variation(nm.mesh, VariationField(x));
    const double b = dot(iso_gradient(nm.mesh), x);
    EXPECT_NEAR(a, b, 1e-9 * std::max(std::abs(b), 1e-3)) << nm.name;
  }
}

TEST(FirstVariation, MaskZeroesOutside) {
  const TriMesh m = icosphere(1.0, 2);
  VectorField x(m.vertices.size(), Vec3(1, 2, 3));
  std::vector<bool> mask(x.size(), false);
  const VariationField v(x, mask);
  EXPECT_EQ(iso_first_variation(m, v), 0.0);
  EXPECT_THROW(VariationField(x, std::vector<bool>(3, true)), Error);
  EXPECT_THROW(iso_first_variation(m, VariationField(VectorField(5))), Error);
}

TEST(CurvaturePairing, DilationGivesMinusTwoArea) {
  for (double r : {1.0, 0.5}) {
    const TriMesh m = icosphere(r, 4);
    const double a = total_area(m);
    EXPECT_NEAR(curvature_pairing(m, m.vertices) / (-2.0 * a), 1.0, 0.02);
  }
}

TEST(Gradients, FiniteDifferenceOnSmallIcosphere) {
  const TriMesh m = icosphere(1.0, 2);
  ASSERT_EQ(m.vertices.size(), 162u);
  VectorField gw;
  willmore_energy_and_gradient(m, gw);
  std::mt19937_64 rng(2);
  for (int d = 0; d < 20; ++d) {
    const VectorField x = random_direction(m.vertices.size(), rng);
    const double fd = fd_oracle(willmore_energy, m, x, 1e-4);
    EXPECT_LT(std::abs(dot(gw, x) - fd) / (std::abs(fd) + 1e-12), 1e-6);
  }
}

TEST(Gradients, AreaVolumeTight) {
  TriMesh m = icosphere(1.0, 2);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd(0.0, 0.02);
  for (Vec3& v : m.vertices) v += Vec3(nd(rng), nd(rng), nd(rng));
  const VectorField ga = area_gradient(m);
  const VectorField gv = volume_gradient(m);
  for (int d = 0; d < 20; ++d) {
    const VectorField x = random_direction(m.vertices.size(), rng);
    const double fa = fd_oracle(total_area, m, x, 1e-3);
    const double fv = fd_oracle(enclosed_volume, m, x, 1e-3);
    EXPECT_LT(std::abs(dot(ga, x) - fa) / (std::abs(fa) + 1e-12), 1e-8);
    EXPECT_LT(std::abs(dot(gv, x) - fv) / (std::abs(fv) + 1e-12), 1e-8);
  }
}

TEST(Gradients, EulerRelations) {
  for (const NamedMesh& nm : genus0_corpus()) {
    const TriMesh& m = nm.mesh;
    EXPECT_NEAR(dot(volume_gradient(m), m.vertices) / (3.0 * enclosed_volume(m)), 1.0, 1e-12) << nm.name;
    EXPECT_NEAR(dot(area_gradient(m), m.vertices) / (2.0 * total_area(m)), 1.0, 1e-12) << nm.name;
  }
}

TEST(Gradients, WillmoreInvariances) {
  for (const NamedMesh& nm : genus0_corpus()) {
    const TriMesh m = nm.mesh;
    VectorField g;
    willmore_energy_and_gradient(m, g);
    EXPECT_LE(std::abs(dot(g, m.vertices)), 1e-8 * norm(g) * norm(m.vertices)) << nm.name;
    for (int k = 0; k < 3; ++k) {
      const VectorField c(m.vertices.size(), Vec3::Unit(k));
      EXPECT_LE(std::abs(dot(g, c)), 1e-10 * std::max(1.0, norm(g))) << nm.name;
    }
    const VectorField gi = iso_gradient(m);
    EXPECT_LE(std::abs(dot(gi, m.vertices)), 1e-10 * norm(gi) * norm(m.vertices)) << nm.name;
  }
}

TEST(Gradients, AreaGradientIsCurvature) {
  const TriMesh m = icosphere(1.0, 4);
  const VectorField ga = area_gradient(m);
  const VectorField x = bump_field(m, 3);
  const double lhs = dot(ga, x);
  const double rhs = -curvature_pairing(m, x);
  EXPECT_NEAR(lhs / rhs, 1.0, 0.02);
}

TEST(FdHarness, TableCoversAllOps) {
  const std::vector<FdTableRow> rows = fd_check_all(dumbbell_mesh(0.7, 2000), 20, 1);
  EXPECT_EQ(rows.size(), 80u);
  for (const FdTableRow& r : rows) EXPECT_LT(r.result.rel_error, 1e-5) << r.op << " " << r.direction;
}

TEST(FdHarness, DetectsWrongGradient) {
  const TriMesh m = icosphere(1.0, 1);
  VectorField wrong = area_gradient(m);
  for (Vec3& v : wrong) v *= 1.01;
  std::mt19937_64 rng(1);
  const FdResult r = fd_directional_check(total_area, wrong, m, random_direction(m.vertices.size(), rng), 1e-4);
  EXPECT_GT(r.rel_error, 5e-3);
}
