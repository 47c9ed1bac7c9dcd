// willmiso command-line front end.
//
// Exit codes: 0 success, 1 bad input or configuration, 2 numerical failure.
// Failures also print one line "error kind=<Kind> message=\"...\"" on stderr.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "willmiso/acceptance.hpp"
#include "willmiso/willmiso.hpp"

namespace {

using namespace willmiso;

bool g_verbose = false;

void note(const std::string& msg) {
  if (g_verbose) std::cerr << msg << std::endl;
}

/// Resolved options as ordered key=value lines, echoed into CSV headers.
struct Resolved {
  std::string text;
  template <typename T>
  void add(const std::string& key, const T& value) {
    std::ostringstream os;
    os.precision(17);
    os << key << "=" << value << "\n";
    text += os.str();
  }
};

/// Writes to a file, or stdout for "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path != "-") {
      file_.open(path);
      if (!file_) throw Error(ErrorKind::Io, "cannot write " + path);
    }
  }
  std::ostream& os() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

std::string e12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12e", v);
  return buf;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void save_mesh(const std::string& path, const TriMesh& m, const std::string& comment) {
  if (path == "-") {
    write_obj_stream(std::cout, m, comment);
  } else if (ends_with(path, ".ply")) {
    write_ply(path, m);
  } else {
    write_obj(path, m, comment);
  }
}

int threads_cap(int requested) {
  int jobs = std::max(1, requested);
  if (const char* env = std::getenv("WILLMISO_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) jobs = std::min(jobs, cap);
  }
  return jobs;
}

std::vector<double> parse_sigma_range(const std::string& range) {
  std::vector<double> parts;
  std::stringstream ss(range);
  std::string item;
  while (std::getline(ss, item, ':')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw Error(ErrorKind::Config, "bad --sigmas component '" + item + "'");
    parts.push_back(v);
  }
  if (parts.size() == 1) return parts;
  if (parts.size() != 3 || !(parts[2] > 0.0) || !(parts[0] >= parts[1])) {
    throw Error(ErrorKind::Config, "--sigmas expects A:B:STEP with A >= B and STEP > 0");
  }
  std::vector<double> out;
  const int n = static_cast<int>(std::floor((parts[0] - parts[1]) / parts[2] + 1e-9));
  for (int k = 0; k <= n; ++k) out.push_back(std::round((parts[0] - k * parts[2]) * 1e10) / 1e10);
  return out;
}

struct FlowFlags {
  std::string config_file;
  std::vector<std::string> sets;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "key=value file overriding optimizer defaults");
    app->add_option("--set", sets, "single key=value override (repeatable)");
  }

  void apply(FlowConfig& c) const {
    if (!config_file.empty()) load_config_file(c, config_file);
    for (const std::string& s : sets) apply_config_text(c, s);
  }
};

// ---------------------------------------------------------------------------

struct GenArgs {
  std::string family;
  std::string out = "-";
  double sigma = 0.9;
  int resolution = 10000;
  int level = 3;
  double radius = 1.0;
  double a = 0.3;
  double s_max = 0.0;
  int n_s = 256;
  int n_theta = 128;
};

int run_gen(const GenArgs& g) {
  TriMesh m;
  Resolved r;
  r.add("family", g.family);
  if (g.family == "icosphere") {
    m = icosphere(g.radius, g.level);
    r.add("radius", g.radius);
    r.add("level", g.level);
  } else if (g.family == "cube") {
    m = unit_cube();
    for (int k = 0; k < g.level; ++k) m = subdivide(m);
    r.add("level", g.level);
  } else if (g.family == "prolate" || g.family == "dumbbell" || g.family == "stomatocyte") {
    if (g.family == "prolate") m = prolate_mesh(g.sigma, g.resolution);
    if (g.family == "dumbbell") m = dumbbell_mesh(g.sigma, g.resolution);
    if (g.family == "stomatocyte") m = stomatocyte_mesh(g.sigma, g.resolution);
    r.add("sigma", g.sigma);
    r.add("resolution", g.resolution);
  } else if (g.family == "catenoid") {
    CatenoidParams p;
    p.a = g.a;
    p.s_max = g.s_max > 0.0 ? g.s_max : 8.0 * g.a;
    p.n_s = g.n_s;
    p.n_theta = g.n_theta;
    m = inverted_catenoid_mesh(p);
    r.add("a", p.a);
    r.add("s_max", p.s_max);
    r.add("n_s", p.n_s);
    r.add("n_theta", p.n_theta);
  } else {
    throw Error(ErrorKind::Config, "unknown family '" + g.family + "'");
  }
  std::string comment = csv_provenance(r.text);
  comment = comment.substr(2, comment.find('\n') - 2);
  save_mesh(g.out, m, comment);
  note("vertices=" + std::to_string(m.vertices.size()) + " faces=" + std::to_string(m.faces.size()));
  return 0;
}

int run_catq(double a, double s_max, double tol, const std::string& out) {
  CatenoidParams p;
  p.a = a;
  p.s_max = s_max > 0.0 ? s_max : 8.0 * a;
  Resolved r;
  r.add("a", p.a);
  r.add("s_max", p.s_max);
  r.add("rel_tol", tol);
  const SurfaceMetrics m = catenoid_metrics_quadrature(p, tol);
  Output o(out);
  o.os() << csv_provenance(r.text) << metrics_csv_header() << "\n" << metrics_csv_row(m) << "\n";
  return 0;
}

int run_metrics(const std::string& mesh_path, const std::string& out) {
  const TriMesh m = read_obj(mesh_path);
  require_valid(m, mesh_path);
  Resolved r;
  r.add("mesh", mesh_path);
  Output o(out);
  o.os() << csv_provenance(r.text) << metrics_csv_header() << "\n" << metrics_csv_row(metrics(m)) << "\n";
  return 0;
}

int run_fdcheck(const std::string& mesh_path, int dirs, std::uint64_t seed, double tol, const std::string& out) {
  const TriMesh m = read_obj(mesh_path);
  require_valid(m, mesh_path);
  Resolved r;
  r.add("mesh", mesh_path);
  r.add("directions", dirs);
  r.add("seed", seed);
  r.add("tol", tol);
  const std::vector<FdTableRow> rows = fd_check_all(m, dirs, seed);
  Output o(out);
  o.os() << csv_provenance(r.text) << "op,direction,analytic,numeric,rel_error,pass\n";
  int failed = 0;
  for (const FdTableRow& row : rows) {
    const bool ok = row.result.rel_error < tol;
    failed += ok ? 0 : 1;
    o.os() << row.op << "," << row.direction << "," << e12(row.result.analytic) << "," << e12(row.result.numeric)
           << "," << e12(row.result.rel_error) << "," << (ok ? "pass" : "fail") << "\n";
  }
  if (failed > 0) {
    std::cerr << "error kind=GradientMismatch message=\"" << failed << " of " << rows.size()
              << " directional checks above tolerance\"" << std::endl;
    return 2;
  }
  return 0;
}

struct MinimizeArgs {
  double sigma = 0.9;
  std::string seed = "prolate";
  std::string seed_file;
  std::string out = "final.obj";
  std::string trace;
  int resolution = -1;
  int max_iters = -1;
  long long rng_seed = -1;
  FlowFlags flow;
};

int run_minimize(const MinimizeArgs& a) {
  FlowConfig c;
  a.flow.apply(c);
  c.sigma = a.sigma;
  c.seed_shape = parse_seed_shape(a.seed);
  if (!a.seed_file.empty()) c.seed_file = a.seed_file;
  if (a.resolution > 0) c.resolution = a.resolution;
  if (a.max_iters >= 0) c.max_iters = a.max_iters;
  if (a.rng_seed >= 0) c.rng_seed = static_cast<std::uint64_t>(a.rng_seed);
  c.check();
  const std::string resolved = config_to_text(c);
  note(resolved);
  const MinimizeResult res = minimize(c);
  if (!a.trace.empty()) {
    Output o(a.trace);
    o.os() << csv_provenance(resolved) << trace_csv_header() << "\n";
    for (const TraceRecord& rec : res.trace.records) o.os() << trace_csv_row(rec) << "\n";
  }
  std::string comment = csv_provenance(resolved);
  comment = comment.substr(2, comment.find('\n') - 2);
  save_mesh(a.out, res.mesh, comment);
  const TraceRecord& last = res.trace.records.back();
  std::printf("sigma=%.12e W=%.12e I=%.12e iters=%d termination=%s self_intersections=%zu\n", c.sigma, last.willmore,
              last.iso, last.iter, res.trace.termination.c_str(), res.trace.self_intersections);
  return 0;
}

struct SweepArgs {
  std::string sigmas = "0.95:0.35:0.05";
  std::string out = "beta.csv";
  int jobs = 1;
  int resolution = -1;
  int max_iters = -1;
  std::string mesh_dir;
  std::string trace_dir;
  bool no_warm = false;
  FlowFlags flow;
};

int run_sweep(const SweepArgs& a) {
  FlowConfig c;
  a.flow.apply(c);
  if (a.resolution > 0) c.resolution = a.resolution;
  if (a.max_iters >= 0) c.max_iters = a.max_iters;
  const std::vector<double> sigmas = parse_sigma_range(a.sigmas);
  SweepOptions so;
  so.jobs = threads_cap(a.jobs);
  so.warm_start = !a.no_warm;
  so.keep_traces = !a.trace_dir.empty();
  std::string resolved = config_to_text(c);
  resolved += "sigmas=" + a.sigmas + "\nwarm_start=" + (so.warm_start ? "true" : "false") + "\n";
  Output o(a.out);
  o.os() << csv_provenance(resolved) << beta_csv_header() << "\n";
  o.os().flush();
  int failed = 0;
  so.on_point = [&](const BetaPoint& p) {
    o.os() << beta_csv_row(p) << "\n";
    o.os().flush();
    note("sigma=" + e12(p.sigma) + " beta=" + e12(p.beta_hat) + " source=" + p.source);
    for (const std::string& f : p.failures) note("  start failed: " + f);
    if (p.mesh.vertices.empty()) ++failed;
    char tag[32];
    std::snprintf(tag, sizeof(tag), "%.4f", p.sigma);
    if (!a.mesh_dir.empty() && !p.mesh.vertices.empty()) {
      std::filesystem::create_directories(a.mesh_dir);
      write_obj(a.mesh_dir + "/min_" + tag + ".obj", p.mesh);
    }
    if (!a.trace_dir.empty()) {
      std::filesystem::create_directories(a.trace_dir);
      for (const auto& [name, trace] : p.traces) {
        std::ofstream t(a.trace_dir + "/trace_" + tag + "_" + name + ".csv");
        t << csv_provenance(resolved) << trace_csv_header() << "\n";
        for (const TraceRecord& rec : trace.records) t << trace_csv_row(rec) << "\n";
      }
    }
  };
  beta_sweep(sigmas, c, so);
  if (failed > 0) {
    std::cerr << "error kind=SweepPointFailed message=\"" << failed << " sigma values without a minimizer\""
              << std::endl;
    return 2;
  }
  return 0;
}

struct AnalyzeArgs {
  std::vector<std::string> meshes;
  std::string out = "-";
  std::vector<double> point;
  int vertex = 0;
  double rmin = 0.0;
  double rmax = 0.0;
  int count = 12;
  int points = 50;
  long long seed = 1;
  double slack = 0.15;
  bool exact = false;
};

int run_analyze(const std::string& what, const AnalyzeArgs& a) {
  if (a.meshes.empty()) throw Error(ErrorKind::InvalidArgument, "no mesh given");
  Resolved r;
  r.add("analysis", what);
  for (const std::string& m : a.meshes) r.add("mesh", m);
  Output o(a.out);
  if (what == "density") {
    const TriMesh m = read_obj(a.meshes.front());
    Vec3 x0;
    if (a.point.size() == 3) {
      x0 = Vec3(a.point[0], a.point[1], a.point[2]);
    } else {
      if (a.vertex < 0 || a.vertex >= static_cast<int>(m.vertices.size())) {
        throw Error(ErrorKind::InvalidArgument, "vertex index out of range");
      }
      x0 = m.vertices[a.vertex];
    }
    const double rmin = a.rmin > 0.0 ? a.rmin : 3.0 * mean_edge_length(m);
    const double rmax = a.rmax > 0.0 ? a.rmax : 0.1 * diameter_lower_bound(m);
    r.add("center", e12(x0.x()) + " " + e12(x0.y()) + " " + e12(x0.z()));
    r.add("rmin", rmin);
    r.add("rmax", rmax);
    r.add("count", a.count);
    const DensityProfile p = density_profile(m, x0, geometric_radii(rmin, rmax, a.count));
    o.os() << csv_provenance(r.text) << "radius,ratio\n";
    for (std::size_t k = 0; k < p.radii.size(); ++k) o.os() << e12(p.radii[k]) << "," << e12(p.ratios[k]) << "\n";
  } else if (what == "liyau") {
    LiYauOptions opt;
    opt.points = a.points;
    opt.seed = static_cast<std::uint64_t>(a.seed);
    opt.slack = a.slack;
    r.add("points", opt.points);
    r.add("seed", opt.seed);
    r.add("slack", opt.slack);
    o.os() << csv_provenance(r.text) << "mesh,max_ratio,bound,willmore,rho_min,rho_max,passed\n";
    bool all = true;
    for (const std::string& path : a.meshes) {
      const LiYauReport rep = li_yau_check(read_obj(path), opt);
      all = all && rep.passed;
      o.os() << path << "," << e12(rep.max_ratio) << "," << e12(rep.bound) << "," << e12(rep.willmore) << ","
             << e12(rep.rho_min) << "," << e12(rep.rho_max) << "," << (rep.passed ? 1 : 0) << "\n";
    }
    if (!all) {
      std::cerr << "error kind=BoundViolated message=\"density ratio above W/4pi + slack\"" << std::endl;
      return 2;
    }
  } else if (what == "spherefit") {
    o.os() << csv_provenance(r.text) << "sigma,r_fit,inlier_frac,r_target,r_rel_error,rms\n";
    for (const std::string& path : a.meshes) {
      TriMesh m = read_obj(path);
      const auto [fit, sheets] = double_sphere_fit(m);
      o.os() << e12(iso_ratio(m)) << "," << e12(fit.radius) << "," << e12(fit.inlier_fraction) << ","
             << e12(sheets.r_target) << "," << e12(sheets.r_rel_error) << "," << e12(fit.rms) << "\n";
    }
  } else if (what == "diam") {
    r.add("exact", a.exact ? "true" : "false");
    o.os() << csv_provenance(r.text) << "mesh,diameter,bound,passed\n";
    bool all = true;
    for (const std::string& path : a.meshes) {
      const TriMesh m = read_obj(path);
      const DiameterReport rep = diameter_bound_check(m, willmore_energy(m), a.exact);
      all = all && rep.passed;
      o.os() << path << "," << e12(rep.diameter) << "," << e12(rep.bound) << "," << (rep.passed ? 1 : 0) << "\n";
    }
    if (!all) {
      std::cerr << "error kind=BoundViolated message=\"diameter below sqrt(A/W)\"" << std::endl;
      return 2;
    }
  }
  return 0;
}

int run_extend(const std::string& data_path, int n, const std::string& report, const std::string& field) {
  const BoundaryData data = read_boundary_csv(data_path);
  if (n < 8) throw Error(ErrorKind::InvalidArgument, "--n must be at least 8");
  const PolarGrid grid{n, n};
  Resolved r;
  r.add("data", data_path);
  r.add("n", n);
  const ExtensionFields f = build_extension(data, grid);
  const BoundaryResiduals br = boundary_residuals(data, f.w);
  const EstimateReport e = verify_estimates(data, grid);
  Output o(report);
  o.os() << csv_provenance(r.text)
         << "harmonic_residual,boundary_value,normal_first,normal_second,matched_nodes,sup_w,sup_u,sup_du,c_ii,"
            "sup_dw,c_iii,hess_w,hess_u,graph_sff,c_iv,c_iv_graph,w2_gradient_weight\n";
  o.os() << e12(harmonic_residual(f.w2)) << "," << e12(br.value) << "," << e12(br.normal_first) << ","
         << e12(br.normal_second) << "," << br.matched_nodes << "," << e12(e.sup_w) << "," << e12(e.sup_u) << ","
         << e12(e.sup_du) << "," << e12(e.c_ii) << "," << e12(e.sup_dw) << "," << e12(e.c_iii) << ","
         << e12(e.hess_w) << "," << e12(e.hess_u) << "," << e12(e.graph_sff) << "," << e12(e.c_iv) << ","
         << e12(e.c_iv_graph) << "," << e12(e.w2_gradient_weight) << "\n";
  if (!field.empty()) {
    Output fo(field);
    fo.os() << csv_provenance(r.text) << "r,theta,w\n";
    for (int i = 0; i <= f.w.n_r; ++i) {
      for (int j = 0; j < f.w.n_theta; ++j) {
        fo.os() << e12(f.w.radius(i)) << "," << e12(f.w.theta(j)) << "," << e12(f.w.at(i, j)) << "\n";
      }
    }
  }
  return 0;
}

struct ReproArgs {
  int resolution = 10000;
  int max_iters = 600;
  int jobs = 1;
  std::vector<int> only;
  std::string sweep_csv;
};

int run_repro(const ReproArgs& a) {
  AcceptanceOptions opt;
  opt.resolution = a.resolution;
  opt.max_iters = a.max_iters;
  opt.jobs = threads_cap(a.jobs);
  opt.only = a.only;
  opt.sweep_csv = a.sweep_csv;
  opt.log = [](const std::string& s) { note(s); };
  bool all = true;
  run_acceptance(opt, [&](const CriterionResult& r) {
    all = all && r.passed;
    std::cout << format_result(r) << std::endl;
  });
  std::cout << (all ? "all criteria passed" : "some criteria failed") << std::endl;
  return all ? 0 : 2;
}

std::string message_of(const Error& e) {
  const std::string w = e.what();
  const auto colon = w.find(": ");
  return colon == std::string::npos ? w : w.substr(colon + 2);
}

std::string escaped(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c == '\n' ? ' ' : c;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete Willmore energy at prescribed isoperimetric ratio"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(willmiso::kVersion));
  app.add_flag("-v,--verbose", g_verbose, "progress on stderr");

  GenArgs gen;
  CLI::App* c_gen = app.add_subcommand("gen", "write a generated mesh (OBJ, or PLY by extension)");
  c_gen->add_option("family", gen.family, "icosphere|cube|prolate|dumbbell|stomatocyte|catenoid")->required();
  c_gen->add_option("-o,--out", gen.out, "output path, - for stdout");
  c_gen->add_option("--sigma", gen.sigma, "target isoperimetric ratio");
  c_gen->add_option("--resolution", gen.resolution, "approximate vertex count");
  c_gen->add_option("--level", gen.level, "subdivision level");
  c_gen->add_option("--radius", gen.radius);
  c_gen->add_option("--a", gen.a, "catenoid neck");
  c_gen->add_option("--s-max", gen.s_max, "catenoid truncation (default 8a)");
  c_gen->add_option("--n-s", gen.n_s);
  c_gen->add_option("--n-theta", gen.n_theta);

  double cat_a = 0.3, cat_smax = 0.0, cat_tol = 1e-7;
  std::string cat_out = "-";
  CLI::App* c_catq = app.add_subcommand("catq", "quadrature metrics of the inverted catenoid");
  c_catq->add_option("--a", cat_a);
  c_catq->add_option("--s-max", cat_smax, "default 8a");
  c_catq->add_option("--tol", cat_tol, "relative convergence tolerance");
  c_catq->add_option("-o,--out", cat_out);

  std::string met_mesh, met_out = "-";
  CLI::App* c_met = app.add_subcommand("metrics", "A,V,I,W,total_sff,total_gauss of an OBJ mesh");
  c_met->add_option("mesh", met_mesh)->required();
  c_met->add_option("-o,--out", met_out);

  std::string fd_mesh, fd_out = "-";
  int fd_dirs = 20;
  std::uint64_t fd_seed = 1;
  double fd_tol = 1e-5;
  CLI::App* c_fd = app.add_subcommand("fdcheck", "gradients of W, A, V, I against finite differences");
  c_fd->add_option("mesh", fd_mesh)->required();
  c_fd->add_option("--dirs", fd_dirs);
  c_fd->add_option("--seed", fd_seed);
  c_fd->add_option("--tol", fd_tol);
  c_fd->add_option("-o,--out", fd_out);

  MinimizeArgs mn;
  CLI::App* c_min = app.add_subcommand("minimize", "minimize W at fixed I");
  c_min->add_option("--sigma", mn.sigma)->required();
  c_min->add_option("--seed", mn.seed, "prolate|dumbbell|stomatocyte|icosphere|file");
  c_min->add_option("--seed-file", mn.seed_file, "OBJ start mesh for --seed file");
  c_min->add_option("-o,--out", mn.out, "final mesh (OBJ or PLY)");
  c_min->add_option("--trace", mn.trace, "per-iteration CSV");
  c_min->add_option("--resolution", mn.resolution);
  c_min->add_option("--max-iters", mn.max_iters);
  c_min->add_option("--rng-seed", mn.rng_seed);
  mn.flow.attach(c_min);

  SweepArgs sw;
  CLI::App* c_sw = app.add_subcommand("sweep", "beta(sigma) over a descending range");
  c_sw->add_option("--sigmas", sw.sigmas, "A:B:STEP, descending from A to B");
  c_sw->add_option("-o,--out", sw.out);
  c_sw->add_option("--jobs", sw.jobs, "concurrent starts per sigma (capped by WILLMISO_THREADS)");
  c_sw->add_option("--resolution", sw.resolution);
  c_sw->add_option("--max-iters", sw.max_iters);
  c_sw->add_option("--mesh-dir", sw.mesh_dir, "write each minimizer here");
  c_sw->add_option("--trace-dir", sw.trace_dir, "write every start's trace here");
  c_sw->add_flag("--no-warm", sw.no_warm, "cold starts only");
  sw.flow.attach(c_sw);

  AnalyzeArgs an;
  std::string an_what;
  CLI::App* c_an = app.add_subcommand("analyze", "density|liyau|spherefit|diam");
  c_an->add_option("what", an_what)->required()->check(CLI::IsMember({"density", "liyau", "spherefit", "diam"}));
  c_an->add_option("meshes", an.meshes)->required();
  c_an->add_option("-o,--out", an.out);
  c_an->add_option("--point", an.point, "density center x y z")->expected(3);
  c_an->add_option("--vertex", an.vertex, "density center vertex index");
  c_an->add_option("--rmin", an.rmin);
  c_an->add_option("--rmax", an.rmax);
  c_an->add_option("--count", an.count, "number of radii");
  c_an->add_option("--points", an.points, "liyau sample points");
  c_an->add_option("--seed", an.seed);
  c_an->add_option("--slack", an.slack);
  c_an->add_flag("--exact", an.exact, "exact diameter (quadratic)");

  std::string ex_data, ex_report = "-", ex_field;
  int ex_n = 256;
  CLI::App* c_ex = app.add_subcommand("extend", "harmonic extension of circle data and its estimates");
  c_ex->add_option("--data", ex_data, "CSV theta,u,du_dnu")->required();
  c_ex->add_option("--n", ex_n, "polar grid size");
  c_ex->add_option("--report", ex_report);
  c_ex->add_option("--field", ex_field, "CSV dump of w on the grid");

  ReproArgs rp;
  CLI::App* c_rp = app.add_subcommand("repro", "run the acceptance suite");
  c_rp->add_option("--resolution", rp.resolution);
  c_rp->add_option("--max-iters", rp.max_iters);
  c_rp->add_option("--jobs", rp.jobs);
  c_rp->add_option("--only", rp.only, "criterion ids")->delimiter(',');
  c_rp->add_option("--sweep-csv", rp.sweep_csv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*c_gen) return run_gen(gen);
    if (*c_catq) return run_catq(cat_a, cat_smax, cat_tol, cat_out);
    if (*c_met) return run_metrics(met_mesh, met_out);
    if (*c_fd) return run_fdcheck(fd_mesh, fd_dirs, fd_seed, fd_tol, fd_out);
    if (*c_min) return run_minimize(mn);
    if (*c_sw) return run_sweep(sw);
    if (*c_an) return run_analyze(an_what, an);
    if (*c_ex) return run_extend(ex_data, ex_n, ex_report, ex_field);
    if (*c_rp) return run_repro(rp);
  } catch (const willmiso::Error& e) {
    std::cerr << "error kind=" << willmiso::to_string(e.kind()) << " message=\"" << escaped(message_of(e)) << "\""
              << std::endl;
    return willmiso::is_numerical(e.kind()) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error kind=Internal message=\"" << escaped(e.what()) << "\"" << std::endl;
    return 2;
  }
  return 1;
}
