#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <gtest/gtest.h>

namespace fs = std::filesystem;

namespace {

struct Proc {
  int code = -1;
  std::string out;
};

Proc run(const std::string& args) {
  const std::string cmd = std::string(WILLMISO_BIN) + " " + args + " 2>/dev/null";
  Proc r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("willmiso_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

}  // namespace

TEST_F(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("no-such-command").code, 1);
  EXPECT_EQ(run("minimize").code, 1);  // --sigma required
  EXPECT_EQ(run("metrics " + path("missing.obj")).code, 1);
  EXPECT_EQ(run("gen torus").code, 1);
  EXPECT_EQ(run("--help").code, 0);
}

TEST_F(Cli, GenAndMetrics) {
  ASSERT_EQ(run("gen cube -o " + path("c.obj")).code, 0);
  const Proc m = run("metrics " + path("c.obj"));
  ASSERT_EQ(m.code, 0);
  EXPECT_EQ(m.out.rfind("# willmiso ", 0), 0u) << m.out;
  EXPECT_NE(m.out.find("\n# config "), std::string::npos);
  EXPECT_NE(m.out.find("A,V,I,W,total_sff,total_gauss\n6.000000000000e+00,1.000000000000e+00,"), std::string::npos)
      << m.out;
}

TEST_F(Cli, NumericalFailureExitsTwo) {
  // The round icosphere is critical for W, so fdcheck runs on a prolate seed.
  ASSERT_EQ(run("gen prolate --sigma 0.9 --resolution 300 -o " + path("p.obj")).code, 0);
  EXPECT_EQ(run("fdcheck " + path("p.obj") + " --dirs 2").code, 0);
  EXPECT_EQ(run("fdcheck " + path("p.obj") + " --dirs 2 --tol 1e-30").code, 2);
  ASSERT_EQ(run("gen icosphere --level 1 -o " + path("s.obj")).code, 0);
  // Reversed orientation: non-positive volume.
  std::ifstream in(path("s.obj"));
  std::ofstream out(path("flip.obj"));
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("f ", 0) == 0) {
      std::istringstream ls(line.substr(2));
      std::string a, b, c;
      ls >> a >> b >> c;
      out << "f " << a << " " << c << " " << b << "\n";
    } else {
      out << line << "\n";
    }
  }
  out.close();
  EXPECT_EQ(run("metrics " + path("flip.obj")).code, 2);
}

TEST_F(Cli, MinimizeIsDeterministic) {
  const std::string base = "minimize --sigma 0.9 --seed prolate --resolution 600 --max-iters 15 ";
  ASSERT_EQ(run(base + "-o " + path("a.obj") + " --trace " + path("a.csv")).code, 0);
  ASSERT_EQ(run(base + "-o " + path("b.obj") + " --trace " + path("b.csv")).code, 0);
  EXPECT_EQ(slurp(path("a.obj")), slurp(path("b.obj")));
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
  const std::string trace = slurp(path("a.csv"));
  EXPECT_EQ(trace.rfind("# willmiso ", 0), 0u);
  EXPECT_NE(trace.find("iter,W,I,constraint_error,area,step,grad_norm,lambda,min_quality,diameter\n"),
            std::string::npos);
  EXPECT_EQ(run("metrics " + path("a.obj")).code, 0);
}

TEST_F(Cli, ConfigOverridesAndRejects) {
  const std::string base = "minimize --sigma 0.9 --resolution 400 --max-iters 3 -o " + path("m.obj");
  EXPECT_EQ(run(base + " --set step0=0.5").code, 0);
  EXPECT_EQ(run(base + " --set nonsense=1").code, 1);
  EXPECT_EQ(run(base + " --set max_area_ratio=0.5").code, 1);
}

TEST_F(Cli, SmallSweep) {
  const Proc r = run("sweep --sigmas 0.95:0.9:0.05 --resolution 400 --max-iters 10 -o " + path("beta.csv") +
                    " --mesh-dir " + path("meshes"));
  ASSERT_EQ(r.code, 0);
  const std::string csv = slurp(path("beta.csv"));
  EXPECT_EQ(csv.rfind("# willmiso ", 0), 0u);
  EXPECT_NE(csv.find("sigma,beta_hat,iters,vertices,termination\n"), std::string::npos);
  int rows = 0;
  std::istringstream ls(csv);
  std::string line;
  while (std::getline(ls, line)) rows += (!line.empty() && line[0] != '#' && line[0] != 's') ? 1 : 0;
  EXPECT_EQ(rows, 2);
  EXPECT_EQ(std::distance(fs::directory_iterator(path("meshes")), fs::directory_iterator()), 2);
  EXPECT_EQ(run("sweep --sigmas 0.9:0.95:0.05 --resolution 400 --max-iters 2").code, 1);
}

TEST_F(Cli, AnalyzeAndCatenoid) {
  ASSERT_EQ(run("gen icosphere --level 3 -o " + path("s.obj")).code, 0);
  const Proc ly = run("analyze liyau " + path("s.obj") + " --points 50");
  EXPECT_EQ(ly.code, 0);
  EXPECT_EQ(ly.out.rfind("# willmiso ", 0), 0u);
  EXPECT_EQ(run("analyze density " + path("s.obj") + " --vertex 0 --rmin 0.1 --rmax 1 --count 5").code, 0);
  EXPECT_EQ(run("analyze diam " + path("s.obj")).code, 0);
  EXPECT_EQ(run("analyze curvature " + path("s.obj")).code, 1);
  const Proc q = run("catq --a 0.3");
  EXPECT_EQ(q.code, 0);
  EXPECT_NE(q.out.find("A,V,I,W"), std::string::npos);
}

TEST_F(Cli, ExtendReport) {
  {
    std::ofstream o(path("d.csv"));
    o << "theta,u,du_dnu\n";
    for (int j = 0; j < 64; ++j) {
      const double t = 2.0 * 3.14159265358979323846 * j / 64;
      char buf[128];
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", t, std::cos(2 * t), std::sin(t));
      o << buf;
    }
  }
  const Proc r = run("extend --data " + path("d.csv") + " --n 32 --report " + path("rep.csv"));
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(slurp(path("rep.csv")).rfind("# willmiso ", 0), 0u);
  EXPECT_EQ(run("extend --data " + path("none.csv")).code, 1);
}
