#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <gtest/gtest.h>

#include "willmiso/extension.hpp"

using namespace willmiso;
constexpr double kPi = std::numbers::pi;

static BoundaryData mode_data(std::size_t n, int ku, int kg) {
  return sample_boundary(
      n, [ku](double t) { return std::cos(ku * t); }, [kg](double t) { return std::sin(kg * t); });
}

TEST(Extension, ZeroDataGivesZero) {
  const BoundaryData d = sample_boundary(
      128, [](double) { return 0.0; }, [](double) { return 0.0; });
  const Extension e(d);
  for (double r : {0.0, 0.3, 0.9, 1.0}) {
    EXPECT_EQ(e.w2(r, 0.4).f, 0.0);
    EXPECT_EQ(e.w(r, 1.1).f, 0.0);
  }
}

TEST(Extension, HarmonicPolynomialsReproduced) {
  // cos t on the circle extends to x; sin 3t extends to r^3 sin 3t.
  const BoundaryData d = sample_boundary(
      256, [](double) { return 0.0; }, [](double t) { return std::cos(t) + std::sin(3 * t); });
  const Extension e(d);
  for (double r : {0.1, 0.5, 0.9}) {
    for (double t : {0.0, 0.7, 2.5, 5.9}) {
      EXPECT_NEAR(e.w2(r, t).f, r * std::cos(t) + r * r * r * std::sin(3 * t), 1e-10);
    }
  }
}

TEST(Extension, TrapezoidPoissonAgreesWithSeries) {
  const BoundaryData d = random_trig_data(256, 5, 3);
  const Extension e(d);
  for (double r : {0.0, 0.4, 0.8}) {
    for (double t : {0.3, 1.9, 4.4}) {
      EXPECT_NEAR(poisson_integral(d, r * std::cos(t), r * std::sin(t)), e.w2(r, t).f, 1e-10);
    }
  }
}

TEST(Extension, JetDerivativesMatchFiniteDifferences) {
  const BoundaryData d = random_trig_data(256, 6, 11);
  const Extension e(d);
  const double h = 1e-4;
  for (double r : {0.3, 0.6, 0.85}) {
    for (double t : {0.2, 3.0}) {
      const Jet2 j = e.w(r, t);
      auto f = [&](double rr, double tt) { return e.w(rr, tt).f; };
      EXPECT_NEAR(j.fr, (f(r + h, t) - f(r - h, t)) / (2 * h), 1e-6);
      EXPECT_NEAR(j.ft, (f(r, t + h) - f(r, t - h)) / (2 * h), 1e-6);
      EXPECT_NEAR(j.frr, (f(r + h, t) - 2 * j.f + f(r - h, t)) / (h * h), 1e-4);
      EXPECT_NEAR(j.ftt, (f(r, t + h) - 2 * j.f + f(r, t - h)) / (h * h), 1e-4);
      EXPECT_NEAR(j.frt, (f(r + h, t + h) - f(r + h, t - h) - f(r - h, t + h) + f(r - h, t - h)) / (4 * h * h), 1e-4);
    }
  }
}

TEST(Extension, PolarLaplacianOfW2Vanishes) {
  const Extension e(random_trig_data(256, 8, 5));
  for (double r : {0.2, 0.5, 0.95}) {
    for (double t : {0.1, 2.2, 4.0}) {
      const Jet2 j = e.w2(r, t);
      EXPECT_NEAR(j.frr + j.fr / r + j.ftt / (r * r), 0.0, 1e-10);
    }
  }
}

TEST(Extension, BoundaryValuesAndNormalDerivative) {
  for (std::uint64_t s : {1, 2, 3}) {
    const BoundaryData d = random_trig_data(256, 5, s);
    const Extension e(d);
    for (std::size_t j = 0; j < d.size(); j += 7) {
      const Jet2 b = e.w(1.0, d.theta(j));
      EXPECT_NEAR(b.f, d.u[j], 1e-12);
      EXPECT_NEAR(b.fr, d.du_dnu[j], 1e-12);
    }
    const ExtensionFields f = build_extension(d, PolarGrid{64, 256});
    const BoundaryResiduals br = boundary_residuals(d, f.w);
    EXPECT_EQ(br.matched_nodes, 256);
    EXPECT_LE(br.value, 1e-13);
  }
}

TEST(Extension, ConstantDataExtendsToConstant) {
  const BoundaryData d = sample_boundary(
      128, [](double) { return 2.5; }, [](double) { return 0.0; });
  const ExtensionFields f = build_extension(d, PolarGrid{32, 64});
  for (double v : f.w.values) EXPECT_NEAR(v, 2.5, 1e-13);
}

TEST(Extension, HarmonicResidualSmallAndConverging) {
  const BoundaryData d = random_trig_data(256, 5, 9);
  double prev = 1e300;
  for (int n : {64, 128, 256}) {
    const double res = harmonic_residual(poisson_extend(d, PolarGrid{n, n}));
    EXPECT_LT(res, 1e-4);
    EXPECT_LT(res, prev);
    prev = res;
  }
  EXPECT_LT(prev, 1e-6);
  // A non-harmonic field is flagged.
  DiscField q(64, 64);
  for (int i = 0; i <= 64; ++i)
    for (int j = 0; j < 64; ++j) q.at(i, j) = q.radius(i) * q.radius(i);
  EXPECT_GT(harmonic_residual(q), 1e-4);
}

TEST(Extension, NormalResidualShrinksWithRefinement) {
  const BoundaryData d = mode_data(256, 3, 2);
  const double c = boundary_residuals(d, build_extension(d, PolarGrid{64, 256}).w).normal_first;
  const double f = boundary_residuals(d, build_extension(d, PolarGrid{256, 256}).w).normal_first;
  EXPECT_LT(f, 0.5 * c);
  const double s = boundary_residuals(d, build_extension(d, PolarGrid{256, 256}).w).normal_second;
  EXPECT_LT(s, f);
}

TEST(Estimates, Homogeneous) {
  const BoundaryData d = random_trig_data(256, 5, 4);
  const EstimateReport a = verify_estimates(d, PolarGrid{96, 128});
  for (double k : {1e-3, 7.0}) {
    const EstimateReport b = verify_estimates(scaled_data(d, k), PolarGrid{96, 128});
    EXPECT_NEAR(b.c_ii / a.c_ii, 1.0, 1e-9);
    EXPECT_NEAR(b.c_iii / a.c_iii, 1.0, 1e-9);
    EXPECT_NEAR(b.c_iv / a.c_iv, 1.0, 1e-9);
    EXPECT_NEAR(b.w2_gradient_weight / a.w2_gradient_weight, 1.0, 1e-9);
  }
  EXPECT_LE(a.boundary_value, 1e-12);
  EXPECT_LE(a.boundary_normal, 1e-12);
  EXPECT_LE(a.w2_gradient_weight, 6.0);
}

TEST(Estimates, LinearDataHasNoHessian) {
  const BoundaryData d = sample_boundary(
      128, [](double t) { return 1.0 + 2.0 * std::cos(t) - std::sin(t); },
      [](double t) { return 2.0 * std::cos(t) - std::sin(t); });
  const EstimateReport r = verify_estimates(d, PolarGrid{64, 64});
  EXPECT_LT(r.hess_w, 1e-20);
  EXPECT_EQ(r.c_iv, 0.0);
}

TEST(Estimates, StableAcrossGrids) {
  const StabilityReport r = estimate_stability(4, 256, PolarGrid{64, 64}, PolarGrid{128, 128});
  EXPECT_TRUE(r.passed) << r.max_level_ratio;
  EXPECT_LT(r.max_boundary_value, 1e-12);
}

TEST(BoundaryIo, ReadsAndRejects) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "willmiso_ext_test";
  fs::create_directories(dir);
  const BoundaryData d = random_trig_data(64, 3, 1);
  {
    std::ofstream o(dir / "ok.csv");
    o << "# comment\ntheta,u,du_dnu\n";
    char buf[128];
    for (std::size_t j = 0; j < d.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", d.theta(j), d.u[j], d.du_dnu[j]);
      o << buf;
    }
  }
  const BoundaryData back = read_boundary_csv((dir / "ok.csv").string());
  ASSERT_EQ(back.size(), d.size());
  for (std::size_t j = 0; j < d.size(); ++j) EXPECT_EQ(back.u[j], d.u[j]);

  {
    std::ofstream o(dir / "bad.csv");
    o << "theta,u,du_dnu\n0,1,2\n0.1,oops,3\n";
  }
  EXPECT_THROW(read_boundary_csv((dir / "bad.csv").string()), Error);
  {
    std::ofstream o(dir / "short.csv");
    for (int j = 0; j < 10; ++j) o << 2 * kPi * j / 10 << ",1,0\n";
  }
  EXPECT_THROW(read_boundary_csv((dir / "short.csv").string()), Error);
  {
    std::ofstream o(dir / "angles.csv");
    for (int j = 0; j < 64; ++j) o << 0.01 * j << ",1,0\n";
  }
  EXPECT_THROW(read_boundary_csv((dir / "angles.csv").string()), Error);
  EXPECT_THROW(read_boundary_csv((dir / "missing.csv").string()), Error);
  fs::remove_all(dir);
}
