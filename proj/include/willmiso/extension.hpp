#pragma once

// Extension of circle data (u, du/dnu) into the unit disc:
// w = w1 + w3, w1 a cutoff blend of u(x/|x|) with its mean, w3 = (|x|^2-1)/2 w2,
// w2 the harmonic extension of du/dnu. Everything is evaluated from the
// trigonometric interpolants of the samples, so derivatives are exact for
// band-limited data.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "willmiso/errors.hpp"

namespace willmiso {

struct BoundaryData {
  std::vector<double> u;     // u(theta_j), theta_j = 2 pi j / n
  std::vector<double> du_dnu;
  // Optional second normal derivative; absent means u is extended off the
  // circle by its first-order Taylor polynomial in r.
  std::vector<double> d2u_dnu2;

  std::size_t size() const { return u.size(); }
  double theta(std::size_t j) const { return 2.0 * std::numbers::pi * j / static_cast<double>(u.size()); }

  void check() const {
    if (u.size() < 64) throw Error(ErrorKind::InvalidArgument, "boundary data needs at least 64 samples");
    if (du_dnu.size() != u.size()) throw Error(ErrorKind::InvalidArgument, "u and du/dnu sample counts differ");
    if (!d2u_dnu2.empty() && d2u_dnu2.size() != u.size()) {
      throw Error(ErrorKind::InvalidArgument, "second normal derivative sample count differs");
    }
    for (std::size_t j = 0; j < u.size(); ++j) {
      if (!std::isfinite(u[j]) || !std::isfinite(du_dnu[j]) || (!d2u_dnu2.empty() && !std::isfinite(d2u_dnu2[j]))) {
        throw Error(ErrorKind::InvalidArgument, "non-finite boundary data");
      }
    }
  }
};

/// Samples f(theta) at n equally spaced angles.
template <typename U, typename N>
BoundaryData sample_boundary(std::size_t n, U&& u, N&& du_dnu) {
  BoundaryData d;
  for (std::size_t j = 0; j < n; ++j) {
    const double t = 2.0 * std::numbers::pi * j / static_cast<double>(n);
    d.u.push_back(u(t));
    d.du_dnu.push_back(du_dnu(t));
  }
  return d;
}

/// CSV rows theta,u,du_dnu (header and '#' lines skipped). Angles must be
/// the equally spaced 2 pi j / n.
inline BoundaryData read_boundary_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  BoundaryData d;
  std::vector<double> thetas;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double t = 0.0;
    double a = 0.0;
    double b = 0.0;
    if (!(ls >> t >> a >> b)) {
      if (thetas.empty() && d.u.empty()) continue;  // header
      throw Error(ErrorKind::Io, path + ": malformed row '" + line + "'");
    }
    thetas.push_back(t);
    d.u.push_back(a);
    d.du_dnu.push_back(b);
  }
  d.check();
  for (std::size_t j = 0; j < thetas.size(); ++j) {
    if (std::abs(thetas[j] - d.theta(j)) > 1e-9) {
      throw Error(ErrorKind::InvalidArgument, path + ": angles must be 2 pi j / n");
    }
  }
  return d;
}

/// Real trigonometric interpolant sum_k a_k cos k t + b_k sin k t, k <= n/2.
struct TrigSeries {
  std::vector<double> a;
  std::vector<double> b;

  static TrigSeries fit(const std::vector<double>& f) {
    const std::size_t n = f.size();
    const std::size_t K = n / 2;
    TrigSeries s;
    s.a.assign(K + 1, 0.0);
    s.b.assign(K + 1, 0.0);
    for (std::size_t k = 0; k <= K; ++k) {
      double ca = 0.0;
      double cb = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        // exact index arithmetic keeps the phase accurate for large k
        const double t = 2.0 * std::numbers::pi * static_cast<double>((k * j) % n) / static_cast<double>(n);
        ca += f[j] * std::cos(t);
        cb += f[j] * std::sin(t);
      }
      const double w = (k == 0 || (n % 2 == 0 && k == K)) ? 1.0 / n : 2.0 / n;
      s.a[k] = w * ca;
      s.b[k] = (n % 2 == 0 && k == K) ? 0.0 : w * cb;
    }
    // Drop the rounding-level tail so band-limited data evaluate cheaply.
    double big = 0.0;
    for (std::size_t k = 0; k <= K; ++k) big = std::max({big, std::abs(s.a[k]), std::abs(s.b[k])});
    std::size_t keep = K + 1;
    while (keep > 1 && std::abs(s.a[keep - 1]) <= 1e-15 * big && std::abs(s.b[keep - 1]) <= 1e-15 * big) --keep;
    s.a.resize(keep);
    s.b.resize(keep);
    return s;
  }

  std::size_t degree() const { return a.empty() ? 0 : a.size() - 1; }
};

/// Values on the polar grid r_i = i / n_r (i = 0..n_r), theta_j = 2 pi j / n_theta.
struct DiscField {
  int n_r = 0;
  int n_theta = 0;
  std::vector<double> values;  // row-major (i, j); row 0 is the center repeated

  DiscField() = default;
  DiscField(int nr, int nt) : n_r(nr), n_theta(nt), values(static_cast<std::size_t>(nr + 1) * nt, 0.0) {}

  double dr() const { return 1.0 / n_r; }
  double dtheta() const { return 2.0 * std::numbers::pi / n_theta; }
  double radius(int i) const { return static_cast<double>(i) / n_r; }
  double theta(int j) const { return 2.0 * std::numbers::pi * j / n_theta; }
  double& at(int i, int j) { return values[static_cast<std::size_t>(i) * n_theta + j]; }
  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * n_theta + j]; }
};

struct PolarGrid {
  int n_r = 256;
  int n_theta = 256;

  void check() const {
    if (n_r < 8 || n_theta < 8) throw Error(ErrorKind::InvalidArgument, "polar grid needs n_r, n_theta >= 8");
  }
};

/// Value and polar derivatives of a scalar at one point.
struct Jet2 {
  double f = 0.0, fr = 0.0, ft = 0.0, frr = 0.0, frt = 0.0, ftt = 0.0;

  /// |D f| in the plane.
  double grad_norm(double r) const { return std::hypot(fr, ft / r); }

  /// |D^2 f|^2 (Frobenius) from polar derivatives.
  double hess_norm2(double r) const {
    const double hrr = frr;
    const double hrt = frt / r - ft / (r * r);
    const double htt = ftt / (r * r) + fr / r;
    return hrr * hrr + 2.0 * hrt * hrt + htt * htt;
  }
};

namespace detail {

/// Quintic smoothstep cutoff: 1 on r <= 1/2, 0 on r >= 3/4, C^2.
inline void cutoff(double r, double& phi, double& dphi, double& d2phi) {
  const double t = std::clamp((r - 0.5) / 0.25, 0.0, 1.0);
  const double s = t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
  const double ds = 30.0 * t * t * (1.0 - t) * (1.0 - t);
  const double d2s = 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
  phi = 1.0 - s;
  dphi = -ds / 0.25;
  d2phi = -d2s / 0.0625;
}

}  // namespace detail

/// Closed-form ingredients of the construction; all queries are exact for
/// the trigonometric interpolants of the data.
class Extension {
 public:
  explicit Extension(const BoundaryData& data) : data_(data) {
    data_.check();
    u_ = TrigSeries::fit(data_.u);
    g_ = TrigSeries::fit(data_.du_dnu);
    mean_u_ = u_.a[0];
  }

  const BoundaryData& data() const { return data_; }
  double mean_u() const { return mean_u_; }

  /// Interpolant of u on the circle with angular derivatives.
  Jet2 boundary_u(double t) const { return series(u_, 1.0, t); }
  Jet2 boundary_g(double t) const { return series(g_, 1.0, t); }

  /// Harmonic extension of du/dnu: sum r^k (a_k cos k t + b_k sin k t).
  Jet2 w2(double r, double t) const { return series(g_, r, t); }

  Jet2 w1(double r, double t) const {
    double phi, dphi, d2phi;
    detail::cutoff(r, phi, dphi, d2phi);
    const Jet2 U = boundary_u(t);
    const double psi = 1.0 - phi;
    Jet2 j;
    j.f = psi * U.f + phi * mean_u_;
    j.fr = -dphi * (U.f - mean_u_);
    j.frr = -d2phi * (U.f - mean_u_);
    j.ft = psi * U.ft;
    j.ftt = psi * U.ftt;
    j.frt = -dphi * U.ft;
    return j;
  }

  Jet2 w3(double r, double t) const {
    const Jet2 h = w2(r, t);
    const double q = 0.5 * (r * r - 1.0);
    Jet2 j;
    j.f = q * h.f;
    j.fr = r * h.f + q * h.fr;
    j.frr = h.f + 2.0 * r * h.fr + q * h.frr;
    j.ft = q * h.ft;
    j.ftt = q * h.ftt;
    j.frt = r * h.ft + q * h.frt;
    return j;
  }

  Jet2 w(double r, double t) const {
    const Jet2 a = w1(r, t);
    const Jet2 b = w3(r, t);
    return {a.f + b.f, a.fr + b.fr, a.ft + b.ft, a.frr + b.frr, a.frt + b.frt, a.ftt + b.ftt};
  }

  /// |Dw| at the center, where polar formulas are singular. w1 is constant
  /// near 0, so only w3 = -(1/2) w2 + O(r^2) contributes.
  double center_grad_norm() const { return 0.5 * std::hypot(coef(g_.a, 1), coef(g_.b, 1)); }

  /// |D^2 w|^2 at the center: D^2 w3(0) = w2(0) I - D^2 w2(0) / 2.
  double center_hess_norm2() const {
    const double c0 = g_.a[0];
    const double a2 = coef(g_.a, 2);
    const double b2 = coef(g_.b, 2);
    const double hxx = c0 - a2;
    const double hyy = c0 + a2;
    const double hxy = -b2;
    return hxx * hxx + hyy * hyy + 2.0 * hxy * hxy;
  }

 private:
  static double coef(const std::vector<double>& v, std::size_t k) { return k < v.size() ? v[k] : 0.0; }

  static Jet2 series(const TrigSeries& s, double r, double t) {
    Jet2 j;
    double pk = 1.0;   // r^k
    double pk1 = 0.0;  // r^(k-1)
    double pk2 = 0.0;  // r^(k-2)
    for (std::size_t k = 0; k < s.a.size(); ++k) {
      if (k > 0) {
        pk2 = pk1;
        pk1 = pk;
        pk *= r;
      }
      const double kd = static_cast<double>(k);
      const double rk = pk;
      const double rk1 = kd * pk1;
      const double rk2 = kd * (kd - 1.0) * pk2;
      const double c = std::cos(kd * t);
      const double sn = std::sin(kd * t);
      const double v = s.a[k] * c + s.b[k] * sn;
      const double vt = kd * (-s.a[k] * sn + s.b[k] * c);
      const double vtt = -kd * kd * v;
      j.f += rk * v;
      j.fr += rk1 * v;
      j.frr += rk2 * v;
      j.ft += rk * vt;
      j.ftt += rk * vtt;
      j.frt += rk1 * vt;
    }
    return j;
  }

  BoundaryData data_;
  TrigSeries u_;
  TrigSeries g_;
  double mean_u_ = 0.0;
};

/// Poisson integral (1/2pi) int (1-|x|^2)/|x-y|^2 g(y) dy by the trapezoidal
/// rule on the data nodes. Used as an independent pointwise evaluator.
inline double poisson_integral(const BoundaryData& data, double x, double y) {
  const std::size_t n = data.size();
  const double rr = x * x + y * y;
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double t = data.theta(j);
    const double dx = x - std::cos(t);
    const double dy = y - std::sin(t);
    sum += (1.0 - rr) / (dx * dx + dy * dy) * data.du_dnu[j];
  }
  return sum / static_cast<double>(n);
}

namespace detail {

template <typename F>
DiscField fill_field(const PolarGrid& grid, F&& f) {
  grid.check();
  DiscField out(grid.n_r, grid.n_theta);
  for (int i = 0; i <= grid.n_r; ++i) {
    const double r = out.radius(i);
    for (int j = 0; j < grid.n_theta; ++j) out.at(i, j) = f(r, i == 0 ? 0.0 : out.theta(j));
  }
  return out;
}

/// Grid angle j coincides with data node k when j n = k n_theta.
inline bool data_node(const BoundaryData& data, const PolarGrid& grid, int j, std::size_t& k) {
  const std::size_t num = static_cast<std::size_t>(j) * data.size();
  if (num % grid.n_theta != 0) return false;
  k = num / grid.n_theta;
  return true;
}

}  // namespace detail

/// Harmonic extension of du/dnu on the grid; boundary row is the data.
inline DiscField poisson_extend(const BoundaryData& data, const PolarGrid& grid) {
  const Extension ext(data);
  DiscField out = detail::fill_field(grid, [&](double r, double t) { return ext.w2(r, t).f; });
  for (int j = 0; j < grid.n_theta; ++j) {
    std::size_t k = 0;
    if (detail::data_node(data, grid, j, k)) out.at(grid.n_r, j) = data.du_dnu[k];
  }
  return out;
}

struct ExtensionFields {
  DiscField w;
  DiscField w1;
  DiscField w2;
  DiscField w3;
};

inline ExtensionFields build_extension(const BoundaryData& data, const PolarGrid& grid) {
  const Extension ext(data);
  ExtensionFields out;
  out.w1 = detail::fill_field(grid, [&](double r, double t) { return ext.w1(r, t).f; });
  out.w2 = poisson_extend(data, grid);
  out.w3 = detail::fill_field(grid, [&](double r, double t) { return ext.w3(r, t).f; });
  // On r = 1 the cutoff vanishes and |x|^2 - 1 = 0: w is the data itself.
  for (int j = 0; j < grid.n_theta; ++j) {
    std::size_t k = 0;
    if (detail::data_node(data, grid, j, k)) {
      out.w1.at(grid.n_r, j) = data.u[k];
      out.w3.at(grid.n_r, j) = 0.0;
    }
  }
  out.w = DiscField(grid.n_r, grid.n_theta);
  for (std::size_t q = 0; q < out.w.values.size(); ++q) out.w.values[q] = out.w1.values[q] + out.w3.values[q];
  return out;
}

/// Mean-value defect of the 5-point polar Laplacian, f_ij minus the weighted
/// neighbour average, divided by max |f|. Center and boundary rows skipped.
inline double harmonic_residual(const DiscField& f) {
  const double hr = f.dr();
  const double ht = f.dtheta();
  double fmax = 0.0;
  for (double v : f.values) fmax = std::max(fmax, std::abs(v));
  if (fmax == 0.0) return 0.0;
  double worst = 0.0;
  for (int i = 1; i < f.n_r; ++i) {
    const double r = f.radius(i);
    const double wr_out = 1.0 / (hr * hr) + 1.0 / (2.0 * r * hr);
    const double wr_in = 1.0 / (hr * hr) - 1.0 / (2.0 * r * hr);
    const double wt = 1.0 / (r * r * ht * ht);
    const double wsum = wr_out + wr_in + 2.0 * wt;
    for (int j = 0; j < f.n_theta; ++j) {
      const int jp = (j + 1) % f.n_theta;
      const int jm = (j + f.n_theta - 1) % f.n_theta;
      const double in = i == 1 ? f.at(0, 0) : f.at(i - 1, j);
      const double avg = (wr_out * f.at(i + 1, j) + wr_in * in + wt * (f.at(i, jp) + f.at(i, jm))) / wsum;
      worst = std::max(worst, std::abs(f.at(i, j) - avg));
    }
  }
  return worst / fmax;
}

struct BoundaryResiduals {
  double value = 0.0;             // max |w - u| at data nodes on r = 1
  double normal_first = 0.0;      // max |(w(1) - w(1-h))/h - du/dnu|
  double normal_second = 0.0;     // second-order one-sided difference
  int matched_nodes = 0;
};

inline BoundaryResiduals boundary_residuals(const BoundaryData& data, const DiscField& w) {
  BoundaryResiduals out;
  const double h = w.dr();
  const int n = w.n_r;
  const PolarGrid grid{w.n_r, w.n_theta};
  for (int j = 0; j < w.n_theta; ++j) {
    std::size_t k = 0;
    if (!detail::data_node(data, grid, j, k)) continue;
    ++out.matched_nodes;
    out.value = std::max(out.value, std::abs(w.at(n, j) - data.u[k]));
    const double d1 = (w.at(n, j) - w.at(n - 1, j)) / h;
    const double d2 = (3.0 * w.at(n, j) - 4.0 * w.at(n - 1, j) + w.at(n - 2, j)) / (2.0 * h);
    out.normal_first = std::max(out.normal_first, std::abs(d1 - data.du_dnu[k]));
    out.normal_second = std::max(out.normal_second, std::abs(d2 - data.du_dnu[k]));
  }
  return out;
}

struct EstimateReport {
  // (i)
  double boundary_value = 0.0;
  double boundary_normal = 0.0;  // analytic radial derivative of w vs data at r = 1
  // (ii) sup|w| <= c (sup|u| + sup|Du|)
  double sup_w = 0.0, sup_u = 0.0, sup_du = 0.0, c_ii = 0.0;
  // (iii) sup|Dw| <= c sup|Du|
  double sup_dw = 0.0, c_iii = 0.0;
  // (iv) int |D^2 w~|^2 <= c int_{boundary} |D^2 u|^2, w~ built from u minus its
  // least-squares linear part
  double hess_w = 0.0, hess_u = 0.0, graph_sff = 0.0, c_iv = 0.0, c_iv_graph = 0.0;
  // |Dw2(x)| (1 - |x|^2) / sup|Du| on r <= 0.95, bounded by 6
  double w2_gradient_weight = 0.0;
};

namespace detail {

/// num / den, with both sides below eps * scale treated as an exact 0 / 0.
inline double safe_ratio(double num, double den, double scale = 0.0) {
  const double eps = std::max(1e-20 * scale, 1e-300);
  if (den > eps) return num / den;
  return num <= eps ? 0.0 : std::numeric_limits<double>::infinity();
}

/// Second derivatives of u at r = 1 in the polar frame: u_rr from data or 0,
/// u_rt = d/dt du/dnu, u_tt from the interpolant.
inline Jet2 boundary_u_jet(const Extension& ext, double t, double urr) {
  const Jet2 U = ext.boundary_u(t);
  const Jet2 G = ext.boundary_g(t);
  Jet2 j;
  j.f = U.f;
  j.ft = U.ft;
  j.ftt = U.ftt;
  j.fr = G.f;
  j.frt = G.ft;
  j.frr = urr;
  return j;
}

}  // namespace detail

/// Left and right sides of the four estimates on the unit disc. Sups are taken
/// over grid nodes, disc integrals by the trapezoidal rule in r and theta,
/// circle integrals over the data nodes.
inline EstimateReport verify_estimates(const BoundaryData& data, const PolarGrid& grid) {
  grid.check();
  const Extension ext(data);
  EstimateReport rep;
  const std::size_t n = data.size();
  const double two_pi = 2.0 * std::numbers::pi;

  // Linear part l = c0 + c1 x + c2 y: modes 0 and 1 of u; its normal derivative
  // on the circle is c1 cos t + c2 sin t.
  const TrigSeries us = TrigSeries::fit(data.u);
  BoundaryData reduced = data;
  for (std::size_t j = 0; j < n; ++j) {
    const double t = data.theta(j);
    const double lin = us.a[1] * std::cos(t) + us.b[1] * std::sin(t);
    reduced.u[j] -= us.a[0] + lin;
    reduced.du_dnu[j] -= lin;
  }
  const Extension red(reduced);

  for (std::size_t j = 0; j < n; ++j) {
    const double t = data.theta(j);
    const double urr = data.d2u_dnu2.empty() ? 0.0 : data.d2u_dnu2[j];
    const Jet2 bu = detail::boundary_u_jet(ext, t, urr);
    rep.sup_u = std::max(rep.sup_u, std::abs(data.u[j]));
    rep.sup_du = std::max(rep.sup_du, std::hypot(data.du_dnu[j], bu.ft));
    const Jet2 wb = ext.w(1.0, t);
    rep.boundary_value = std::max(rep.boundary_value, std::abs(wb.f - data.u[j]));
    rep.boundary_normal = std::max(rep.boundary_normal, std::abs(wb.fr - data.du_dnu[j]));
    // |D^2 u|^2 at r = 1, and the graph second fundamental form
    // |A|^2 = g^ik g^jl u_ij u_kl / (1 + |Du|^2), g = I + Du Du^T.
    const double h2 = bu.hess_norm2(1.0);
    const double hrr = bu.frr;
    const double hrt = bu.frt - bu.ft;
    const double htt = bu.ftt + bu.fr;
    const double p = bu.fr;
    const double q = bu.ft;
    const double s = 1.0 + p * p + q * q;
    // g^-1 = I - Du Du^T / s in the (r, t) orthonormal frame
    const double gi_rr = 1.0 - p * p / s;
    const double gi_rt = -p * q / s;
    const double gi_tt = 1.0 - q * q / s;
    const double m_rr = gi_rr * hrr + gi_rt * hrt;
    const double m_rt = gi_rr * hrt + gi_rt * htt;
    const double m_tr = gi_rt * hrr + gi_tt * hrt;
    const double m_tt = gi_rt * hrt + gi_tt * htt;
    const double a2 = (m_rr * m_rr + m_rt * m_tr + m_tr * m_rt + m_tt * m_tt) / s;
    const double arc = std::sqrt(1.0 + q * q);  // dH^1 along the graph curve per dt
    rep.hess_u += h2 * two_pi / n;
    rep.graph_sff += a2 * arc * two_pi / n;
  }

  const DiscField tmp(grid.n_r, grid.n_theta);
  const double dr = tmp.dr();
  const double dt = tmp.dtheta();
  rep.sup_w = std::abs(ext.w(0.0, 0.0).f);
  rep.sup_dw = ext.center_grad_norm();
  double hess = 0.0;
  for (int i = 1; i <= grid.n_r; ++i) {
    const double r = tmp.radius(i);
    const double wr = (i == grid.n_r ? 0.5 : 1.0) * r * dr * dt;
    for (int j = 0; j < grid.n_theta; ++j) {
      const double t = tmp.theta(j);
      const Jet2 jw = ext.w(r, t);
      rep.sup_w = std::max(rep.sup_w, std::abs(jw.f));
      rep.sup_dw = std::max(rep.sup_dw, jw.grad_norm(r));
      hess += wr * red.w(r, t).hess_norm2(r);
      if (r <= 0.95 && rep.sup_du > 0.0) {
        rep.w2_gradient_weight =
            std::max(rep.w2_gradient_weight, ext.w2(r, t).grad_norm(r) * (1.0 - r * r) / rep.sup_du);
      }
    }
  }
  rep.hess_w = hess;
  rep.c_ii = detail::safe_ratio(rep.sup_w, rep.sup_u + rep.sup_du);
  rep.c_iii = detail::safe_ratio(rep.sup_dw, rep.sup_du);
  // Hessian integrals are quadratic in the data amplitude.
  const double scale2 = (rep.sup_u + rep.sup_du) * (rep.sup_u + rep.sup_du);
  rep.c_iv = detail::safe_ratio(rep.hess_w, rep.hess_u, scale2);
  rep.c_iv_graph = detail::safe_ratio(rep.hess_w, rep.graph_sff, scale2);
  return rep;
}

/// Random smooth data: u and du/dnu independent trigonometric polynomials of
/// degree <= max_degree with coefficients N(0, 1) / (1 + k)^2.
inline BoundaryData random_trig_data(std::size_t n, int max_degree, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  // Box-Muller on raw draws, reproducible across standard libraries.
  auto normal = [&rng] {
    const double u1 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  };
  std::vector<double> ca(max_degree + 1), cb(max_degree + 1), ga(max_degree + 1), gb(max_degree + 1);
  for (int k = 0; k <= max_degree; ++k) {
    const double s = 1.0 / ((1.0 + k) * (1.0 + k));
    ca[k] = s * normal();
    cb[k] = k == 0 ? 0.0 : s * normal();
    ga[k] = s * normal();
    gb[k] = k == 0 ? 0.0 : s * normal();
  }
  auto eval = [max_degree](const std::vector<double>& a, const std::vector<double>& b, double t) {
    double v = 0.0;
    for (int k = 0; k <= max_degree; ++k) v += a[k] * std::cos(k * t) + b[k] * std::sin(k * t);
    return v;
  };
  return sample_boundary(
      n, [&](double t) { return eval(ca, cb, t); }, [&](double t) { return eval(ga, gb, t); });
}

inline BoundaryData scaled_data(BoundaryData d, double factor) {
  for (double& v : d.u) v *= factor;
  for (double& v : d.du_dnu) v *= factor;
  for (double& v : d.d2u_dnu2) v *= factor;
  return d;
}

struct StabilityReport {
  std::vector<EstimateReport> coarse;
  std::vector<EstimateReport> fine;
  // max over data sets of each constant, per grid level
  double c_ii[2] = {0.0, 0.0};
  double c_iii[2] = {0.0, 0.0};
  double c_iv[2] = {0.0, 0.0};
  double max_level_ratio = 0.0;  // largest max/min over the three constants
  double max_boundary_value = 0.0;
  double max_boundary_normal = 0.0;
  bool passed = false;
};

/// Empirical constants over random data sets at two grid levels; passes when
/// every constant is finite and its level-to-level variation is below 2x.
inline StabilityReport estimate_stability(int datasets, std::size_t samples, const PolarGrid& coarse,
                                          const PolarGrid& fine, std::uint64_t seed = 1, int max_degree = 5) {
  StabilityReport rep;
  for (int d = 0; d < datasets; ++d) {
    const BoundaryData data = random_trig_data(samples, max_degree, seed + static_cast<std::uint64_t>(d));
    rep.coarse.push_back(verify_estimates(data, coarse));
    rep.fine.push_back(verify_estimates(data, fine));
  }
  auto fold = [&](const std::vector<EstimateReport>& v, int level) {
    for (const EstimateReport& e : v) {
      rep.c_ii[level] = std::max(rep.c_ii[level], e.c_ii);
      rep.c_iii[level] = std::max(rep.c_iii[level], e.c_iii);
      rep.c_iv[level] = std::max(rep.c_iv[level], e.c_iv);
      rep.max_boundary_value = std::max(rep.max_boundary_value, e.boundary_value);
      rep.max_boundary_normal = std::max(rep.max_boundary_normal, e.boundary_normal);
    }
  };
  fold(rep.coarse, 0);
  fold(rep.fine, 1);
  bool finite = true;
  for (const double* c : {rep.c_ii, rep.c_iii, rep.c_iv}) {
    if (!std::isfinite(c[0]) || !std::isfinite(c[1]) || c[0] <= 0.0 || c[1] <= 0.0) {
      finite = false;
      continue;
    }
    rep.max_level_ratio = std::max(rep.max_level_ratio, std::max(c[0], c[1]) / std::min(c[0], c[1]));
  }
  rep.passed = finite && rep.max_level_ratio < 2.0;
  return rep;
}

}  // namespace willmiso
