#include <cmath>
#include <cstring>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "willmiso/functionals.hpp"
#include "willmiso/optimizer.hpp"

using namespace willmiso;
constexpr double kPi = std::numbers::pi;

static TriMesh noisy(TriMesh m, double amp, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, amp * mean_edge_length(m));
  for (Vec3& v : m.vertices) v += Vec3(nd(rng), nd(rng), nd(rng));
  return m;
}

TEST(Config, ParsesAndRejects) {
  FlowConfig c;
  apply_config_text(c, "# comment\nsigma = 0.7\nmax_iters=12  # trailing\nrenormalize_area=off\nseed_shape=dumbbell\n");
  EXPECT_EQ(c.sigma, 0.7);
  EXPECT_EQ(c.max_iters, 12);
  EXPECT_FALSE(c.renormalize_area);
  EXPECT_EQ(c.seed_shape, SeedShape::Dumbbell);
  EXPECT_THROW(apply_config_text(c, "no_such_key=1"), Error);
  EXPECT_THROW(apply_config_text(c, "sigma=0.5x"), Error);
  EXPECT_THROW(apply_config_text(c, "sigma"), Error);
  EXPECT_THROW(apply_config_text(c, "renormalize_area=maybe"), Error);
  EXPECT_THROW(apply_config_text(c, "seed_shape=torus"), Error);
  try {
    apply_config_text(c, "no_such_key=1");
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Config);
  }
}

TEST(Config, TextRoundTrip) {
  FlowConfig c;
  c.sigma = 0.123456789012345;
  c.max_iters = 77;
  c.renormalize_area = false;
  c.normal_only = true;
  c.seed_shape = SeedShape::Stomatocyte;
  c.rng_seed = 987654321987ULL;
  const std::string t = config_to_text(c);
  FlowConfig d;
  apply_config_text(d, t);
  EXPECT_EQ(config_to_text(d), t);
  EXPECT_EQ(d.sigma, c.sigma);
  EXPECT_EQ(d.rng_seed, c.rng_seed);
}

TEST(Config, CheckRejectsBadValues) {
  FlowConfig c;
  c.sigma = 1.0;
  EXPECT_THROW(c.check(), Error);
  c.sigma = 0.5;
  c.constraint_tol = 0.0;
  EXPECT_THROW(c.check(), Error);
  c.constraint_tol = 1e-3;
  c.seed_shape = SeedShape::File;
  EXPECT_THROW(c.check(), Error);
}

TEST(Projection, FixedPointUpToScale) {
  const TriMesh m = prolate_mesh(0.9, 1500);
  const double s = iso_ratio(m);
  const TriMesh p = project_to_constraint(m, s, 1e-3, true, 1e-11);
  const double k = std::sqrt(1.0 / total_area(m));
  double dev = 0.0;
  for (std::size_t i = 0; i < m.vertices.size(); ++i) dev = std::max(dev, (p.vertices[i] - k * m.vertices[i]).norm());
  EXPECT_LT(dev, 1e-12);
  EXPECT_NEAR(total_area(p), 1.0, 1e-12);
}

TEST(Projection, NoisySphereConvergesFast) {
  TriMesh m = noisy(icosphere(1.0, 3), 0.01 / 0.1, 3);
  const int it = project_in_place(m, 0.98, 1e-3, 1e-3, true);
  EXPECT_LE(it, 5);
  EXPECT_LE(std::abs(iso_ratio(m) - 0.98), 1e-3);
  EXPECT_NEAR(total_area(m), 1.0, 1e-12);
}

TEST(Projection, DumbbellSmallShiftKeepsEnergyClose) {
  const TriMesh m = dumbbell_mesh(0.42, 2000);
  const double w0 = willmore_energy(m);
  const TriMesh p = project_to_constraint(m, 0.40);
  EXPECT_NEAR(iso_ratio(p), 0.40, 1e-9);
  // W moves at a rate comparable to |dW/dI| ~ W / I, not wildly.
  EXPECT_LT(std::abs(willmore_energy(p) - w0), 0.02 / 0.4 * w0 * 3);
}

TEST(Projection, OutsideBasinThrows) {
  TriMesh m = icosphere(1.0, 2);
  try {
    project_in_place(m, 0.5, 1e-9, 1e-3, true);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ProjectionStalled);
  }
}

TEST(Stretch, ReachesTargetEitherWay) {
  TriMesh m = prolate_mesh(0.9, 1500);
  ASSERT_TRUE(detail::stretch_to_sigma(m, 0.8, 1e-7));
  EXPECT_NEAR(iso_ratio(m), 0.8, 1e-6);
  ASSERT_TRUE(detail::stretch_to_sigma(m, 0.95, 1e-7));
  EXPECT_NEAR(iso_ratio(m), 0.95, 1e-6);
}

TEST(Step, PerturbedProlateDecreasesW) {
  FlowConfig c;
  c.sigma = 0.9;
  TriMesh m = project_to_constraint(noisy(prolate_mesh(0.9, 1500), 0.05, 8), 0.9);
  const double w0 = willmore_energy(m);
  const auto [out, d] = constrained_step(m, c);
  EXPECT_TRUE(d.accepted);
  EXPECT_LT(d.willmore_after, w0);
  EXPECT_NEAR(willmore_energy(out), d.willmore_after, 1e-12);
  EXPECT_LE(std::abs(iso_ratio(out) - 0.9), 1e-3);
}

TEST(Step, SphereGradientIsDiscretizationError) {
  // The round sphere is critical, so the discrete gradient must vanish under
  // refinement while a genuine bump keeps a gradient of fixed size.
  auto grad_norm = [](const TriMesh& m0) {
    const TriMesh m = scaled(m0, 1.0 / std::sqrt(total_area(m0)));
    VectorField g;
    willmore_energy_and_gradient(m, g);
    return norm(g);
  };
  double prev = 1e300;
  for (int level = 3; level <= 5; ++level) {
    const double g = grad_norm(icosphere(1.0, level));
    EXPECT_LT(g, 0.6 * prev) << level;
    prev = g;
  }
  EXPECT_LT(prev, 0.02);
  const TriMesh bump = noisy(icosphere(1.0, 3), 0.05, 2);
  EXPECT_GT(grad_norm(bump), 5.0 * grad_norm(icosphere(1.0, 3)));
}

TEST(Minimize, TraceFeasibleMonotoneAndDeterministic) {
  FlowConfig c;
  c.sigma = 0.85;
  c.resolution = 1200;
  c.max_iters = 60;
  const MinimizeResult a = minimize(c);
  ASSERT_GT(a.trace.records.size(), 10u);
  for (std::size_t k = 0; k < a.trace.records.size(); ++k) {
    const TraceRecord& r = a.trace.records[k];
    EXPECT_LE(std::abs(r.iso - c.sigma), 1e-3);
    EXPECT_NEAR(r.area, 1.0, 1e-9);
    if (k > 0) EXPECT_LE(r.willmore, a.trace.records[k - 1].willmore + 1e-12);
  }
  const MinimizeResult b = minimize(c);
  ASSERT_EQ(a.trace.records.size(), b.trace.records.size());
  for (std::size_t k = 0; k < a.trace.records.size(); ++k) {
    EXPECT_EQ(std::memcmp(&a.trace.records[k].willmore, &b.trace.records[k].willmore, sizeof(double)), 0);
  }
  ASSERT_EQ(a.mesh.vertices.size(), b.mesh.vertices.size());
  for (std::size_t i = 0; i < a.mesh.vertices.size(); ++i) EXPECT_EQ(a.mesh.vertices[i], b.mesh.vertices[i]);
}

TEST(Minimize, SeedNoiseUsesRngSeed) {
  FlowConfig c;
  c.sigma = 0.9;
  c.resolution = 800;
  c.seed_noise = 0.05;
  c.rng_seed = 1;
  const TriMesh a = make_seed(c);
  c.rng_seed = 2;
  const TriMesh b = make_seed(c);
  EXPECT_NE(a.vertices[10], b.vertices[10]);
}

TEST(Minimize, IcosphereSeedAndWillmoreBound) {
  FlowConfig c;
  c.sigma = 0.97;
  c.seed_shape = SeedShape::Icosphere;
  c.resolution = 700;
  c.max_iters = 40;
  const MinimizeResult r = minimize(c);
  EXPECT_EQ(r.mesh.vertices.size(), 642u);
  EXPECT_GT(r.trace.records.back().willmore, 4 * kPi * 0.995 - 0.9);
}

TEST(Minimize, OrderingAcrossSigma) {
  // Stomatocyte branch below 0.8, prolate near the sphere.
  auto run = [](double s, SeedShape shape) {
    FlowConfig c;
    c.sigma = s;
    c.seed_shape = shape;
    c.resolution = 2500;
    c.max_iters = 250;
    return minimize(c).trace.records.back().willmore;
  };
  const double w99 = run(0.99, SeedShape::Prolate);
  const double w70 = run(0.7, SeedShape::Stomatocyte);
  const double w40 = run(0.4, SeedShape::Stomatocyte);
  EXPECT_GT(w99, 4 * kPi - 0.06);
  EXPECT_LT(w99, w70);
  EXPECT_LT(w70, w40 + 0.05);
  EXPECT_LT(w40, 8 * kPi + 0.2);
}

TEST(Sweep, SmallSweepRecordsEveryStart) {
  FlowConfig c;
  c.resolution = 700;
  c.max_iters = 20;
  SweepOptions o;
  o.cold_seeds = {SeedShape::Prolate, SeedShape::Dumbbell};
  const std::vector<BetaPoint> pts = beta_sweep({0.9, 0.85}, c, o);
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_EQ(pts[0].candidates.size(), 2u);
  EXPECT_EQ(pts[1].candidates.size(), 3u);  // warm start joins
  EXPECT_EQ(pts[1].traces.size(), 3u);
  for (const BetaPoint& p : pts) {
    double best = 1e300;
    for (const auto& [k, v] : p.candidates) best = std::min(best, v);
    EXPECT_EQ(p.beta_hat, best);
    EXPECT_GT(p.vertices, 0u);
  }
  const std::string row = beta_csv_row(pts[0]);
  EXPECT_EQ(row.rfind("9.000000000000e-01,", 0), 0u);
  EXPECT_EQ(beta_csv_header(), "sigma,beta_hat,iters,vertices,termination");
  EXPECT_THROW(beta_sweep({0.8, 0.9}, c, o), Error);
}

TEST(Sweep, ThreadedMatchesSerial) {
  FlowConfig c;
  c.resolution = 600;
  c.max_iters = 15;
  SweepOptions o;
  o.cold_seeds = {SeedShape::Prolate, SeedShape::Dumbbell};
  o.keep_traces = false;
  const auto a = beta_sweep({0.9, 0.85}, c, o);
  o.jobs = 3;
  const auto b = beta_sweep({0.9, 0.85}, c, o);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].beta_hat, b[i].beta_hat);
    EXPECT_EQ(a[i].source, b[i].source);
  }
}

TEST(Sweep, FailedStartIsRecordedNotFatal) {
  FlowConfig c;
  c.resolution = 600;
  c.max_iters = 5;
  SweepOptions o;
  o.cold_seeds = {SeedShape::Prolate, SeedShape::Stomatocyte};
  o.warm_start = false;
  const auto pts = beta_sweep({0.45}, c, o);  // below the prolate family
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_EQ(pts[0].failures.size(), 1u);
  EXPECT_EQ(pts[0].source, "stomatocyte");
}

TEST(TraceCsv, Format) {
  TraceRecord r;
  r.iter = 3;
  r.willmore = 12.5;
  const std::string row = trace_csv_row(r);
  EXPECT_EQ(row.rfind("3,1.250000000000e+01,", 0), 0u) << row;
  const std::string header = trace_csv_header();
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), std::count(header.begin(), header.end(), ','));
}
