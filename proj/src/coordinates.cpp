#include "vortexlab/coordinates.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

// the 1.74 pchip header calls isnan unqualified
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

namespace vortexlab {

namespace {

using Pchip = boost::math::interpolators::pchip<std::vector<double>>;

constexpr double two_pi = 2.0 * std::numbers::pi;

Pchip make_pchip(const std::vector<double>& x, const std::vector<double>& y) {
  return Pchip(std::vector<double>(x), std::vector<double>(y));
}

// Central differences of half-width up to kStencil (order 2 kStencil), narrowing
// towards the ends; the solver's 4th-order stencils on the outermost nodes.
constexpr int kStencil = 8;

// weights c_m, m = 1..p:  f' ~ sum c_m (f_{j+m} - f_{j-m}) / h,  f'' ~ (c_0 f_j + sum d_m (f_{j+m} + f_{j-m})) / h^2
std::vector<double> central_weights(int p, int deriv) {
  std::vector<double> c(p + 1, 0.0);
  for (int m = 1; m <= p; ++m) {
    // (p!)^2 / ((p-m)! (p+m)!) as a running product
    double q = 1.0;
    for (int i = 1; i <= m; ++i) q *= static_cast<double>(p - m + i) / (p + i);
    const double sgn = m % 2 ? 1.0 : -1.0;
    c[m] = deriv == 1 ? sgn * q / m : 2.0 * sgn * q / (m * m);
    if (deriv == 2) c[0] -= 2.0 * c[m];
  }
  return c;
}

void diff_wide(const std::vector<double>& f, double h, std::vector<double>& d, int deriv) {
  if (deriv == 1)
    diff1(std::span<const double>(f), h, d);
  else
    diff2(std::span<const double>(f), h, d);
  const int n = static_cast<int>(f.size());
  std::vector<std::vector<double>> w(kStencil + 1);
  for (int p = 2; p <= kStencil; ++p) w[p] = central_weights(p, deriv);
  for (int j = 2; j + 2 < n; ++j) {
    const int p = std::min({kStencil, j, n - 1 - j});
    const auto& c = w[p];
    double s = deriv == 1 ? 0.0 : c[0] * f[j];
    for (int m = 1; m <= p; ++m) s += deriv == 1 ? c[m] * (f[j + m] - f[j - m]) : c[m] * (f[j + m] + f[j - m]);
    d[j] = deriv == 1 ? s / h : s / (h * h);
  }
}

}  // namespace

struct CoordinateMap::Interp {
  Pchip p;
};

MeanHistory mean_history(const SimState& s) {
  MeanHistory h;
  h.t = s.t;
  h.kappa = s.vortex.kappa;
  h.c0 = s.vortex.c0;
  h.flow_integral = s.mean_flow_integral;
  h.flow_now = s.mean_flow_now;
  h.omega_integral = s.mean_omega_integral;
  h.omega_now.resize(s.grid().n_r);
  for (int j = 0; j < s.grid().n_r; ++j) h.omega_now[j] = s.g.at(0, j).real();
  return h;
}

double upsilon_hi(double kappa, double vartheta0) { return 4.0 * kappa / (std::numbers::pi * vartheta0 * vartheta0); }
double upsilon_lo(double kappa, double c0, double vartheta0) {
  return (kappa + c0) * vartheta0 * vartheta0 / (16.0 * std::numbers::pi);
}

VGrid default_vgrid(double kappa, double c0, double vartheta0, int n) {
  return {0.5 * upsilon_lo(kappa, c0, vartheta0), 2.0 * upsilon_hi(kappa, vartheta0), n};
}

CoordinateMap::CoordinateMap(const Grid& grid, const MeanHistory& h)
    : grid_(grid), t_(h.t), kappa_(h.kappa), c0_(h.c0) {
  const int n = grid.n_r;
  const double t = h.t;
  r_ = grid.nodes();
  avg_flow_.resize(n);
  Vavg_.resize(n);
  Phi_ = h.flow_integral;
  // (1/t) int_0^t -> instantaneous value at t = 0
  for (int j = 0; j < n; ++j) {
    avg_flow_[j] = t > 0 ? h.flow_integral[j] / t : h.flow_now[j] / r_[j];
    Vavg_[j] = t > 0 ? h.omega_integral[j] / t : h.omega_now[j] / r_[j];
  }
  dflow_.resize(n);
  d2flow_.resize(n);
  diff_wide(avg_flow_, grid.h(), dflow_, 1);
  diff_wide(avg_flow_, grid.h(), d2flow_, 2);

  v_.resize(n);
  Vp_.resize(n);
  Vpp_.resize(n);
  Vdot_.resize(n);
  Vstar_.resize(n);
  Wstar_.resize(n);
  for (int j = 0; j < n; ++j) {
    const double r = r_[j];
    v_[j] = kappa_ / (two_pi * r * r) + avg_flow_[j];
    Vp_[j] = -kappa_ / (std::numbers::pi * r * r * r) + dflow_[j];
    Vpp_[j] = 3.0 * kappa_ / (std::numbers::pi * r * r * r * r) + d2flow_[j];
    Vdot_[j] = t > 0 ? (-avg_flow_[j] + h.flow_now[j] / r) / t : 0.0;
    Vstar_[j] = dflow_[j] + 2.0 * avg_flow_[j] / r;  // V' + 2v/r with the background cancelled exactly
    Wstar_[j] = -Vstar_[j] + h.omega_now[j] / r;
    if (!(Vp_[j] < 0.0))
      throw NonMonotoneMap("v(t, r) is not decreasing at r = " + std::to_string(r) + ": perturbation too large");
  }
  flow_ = std::make_shared<Interp>(Interp{make_pchip(r_, avg_flow_)});
}

double CoordinateMap::v_of_r(double r) const {
  if (r < r_.front()) return kappa_ / (two_pi * r * r);
  if (r > r_.back()) return (kappa_ + c0_) / (two_pi * r * r);
  return kappa_ / (two_pi * r * r) + flow_->p(r);
}

double CoordinateMap::r_of_v(double v) const {
  if (!(v > 0.0)) throw std::domain_error("r_of_v: v must be positive");
  if (v >= v_.front()) return std::sqrt(kappa_ / (two_pi * v));
  if (v <= v_.back()) return std::sqrt((kappa_ + c0_) / (two_pi * v));
  // v_ is decreasing: first node with v_j < v
  auto it = std::upper_bound(v_.begin(), v_.end(), v, std::greater<double>());
  const auto j = static_cast<std::size_t>(it - v_.begin());
  if (v_[j - 1] == v) return r_[j - 1];
  auto f = [&](double r) { return v_of_r(r) - v; };
  std::uintmax_t iters = 100;
  auto [a, b] = boost::math::tools::toms748_solve(f, r_[j - 1], r_[j], v_[j - 1] - v, v_[j] - v,
                                                  boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (a + b);
}

CoordinateMap::Profiles CoordinateMap::resample(const VGrid& vg) const {
  Profiles p;
  const int n = vg.n;
  for (auto* f : {&p.v, &p.r, &p.Vp, &p.Vpp, &p.Vdot, &p.rho, &p.Vstar, &p.rhostar, &p.Wstar}) f->assign(n, 0.0);
  const Pchip d1 = make_pchip(r_, dflow_), d2 = make_pchip(r_, d2flow_), vd = make_pchip(r_, Vdot_),
              vs = make_pchip(r_, Vstar_), ws = make_pchip(r_, Wstar_);
  for (int i = 0; i < n; ++i) {
    const double v = vg.v(i);
    const double r = r_of_v(v);
    p.v[i] = v;
    p.r[i] = r;
    p.rho[i] = 1.0 / r;
    // 1/r - sqrt(2 pi v / kappa) written as -(1/r) x / (1 + sqrt(1 + x)), x = 2 pi r^2 (v - v_background) / kappa
    const double pert = r < r_.front() ? 0.0 : r > r_.back() ? c0_ / (two_pi * r * r) : flow_->p(r);
    const double x = two_pi * r * r * pert / kappa_;
    p.rhostar[i] = -(x / (1.0 + std::sqrt(1.0 + x))) / r;
    if (r < r_.front() || r > r_.back()) {
      p.Vp[i] = -2.0 * v / r;
      p.Vpp[i] = 6.0 * v / (r * r);
      continue;  // Vdot, V*, W* vanish off the grid
    }
    p.Vp[i] = -kappa_ / (std::numbers::pi * r * r * r) + d1(r);
    p.Vpp[i] = 3.0 * kappa_ / (std::numbers::pi * r * r * r * r) + d2(r);
    p.Vdot[i] = vd(r);
    p.Vstar[i] = vs(r);
    p.Wstar[i] = ws(r);
  }
  return p;
}

CoordinateMap build_map(const SimState& s) { return CoordinateMap(s.grid(), mean_history(s)); }

double vstar_crosscheck(const CoordinateMap& m) {
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < m.v_nodes().size(); ++j) {
    num = std::max(num, std::abs(m.Vstar_nodes()[j] - m.Vstar_avg_nodes()[j]));
    den = std::max(den, std::abs(m.Vstar_avg_nodes()[j]));
  }
  return den > 0 ? num / den : num;
}

double pv2_residual(const CoordinateMap& m, const VGrid& vg, double vartheta0) {
  const auto p = m.resample(vg);
  std::vector<double> dVp(vg.n);
  diff1(std::span<const double>(p.Vp), vg.h(), dVp);
  const double lo = upsilon_lo(m.kappa(), m.c0(), vartheta0), hi = upsilon_hi(m.kappa(), vartheta0);
  double num = 0.0, den = 0.0;
  for (int i = 0; i < vg.n; ++i) {
    if (p.v[i] < lo || p.v[i] > hi) continue;
    num = std::max(num, std::abs(p.Vpp[i] - p.Vp[i] * dVp[i]));
    den = std::max(den, std::abs(p.Vpp[i]));
  }
  return den > 0 ? num / den : num;
}

double support_leak(const CoordinateMap& m, const VGrid& vg, double vartheta0) {
  const auto p = m.resample(vg);
  const double lo = upsilon_lo(m.kappa(), m.c0(), vartheta0), hi = upsilon_hi(m.kappa(), vartheta0);
  double leak = 0.0;
  for (int i = 0; i < vg.n; ++i)
    if (p.v[i] < lo || p.v[i] > hi) leak = std::max({leak, std::abs(p.Vstar[i]), std::abs(p.Wstar[i])});
  return leak;
}

Grid vgrid_as_grid(const Grid& g, const VGrid& vg) {
  Grid out = g;
  out.n_r = vg.n;
  out.r_min = vg.lo;
  out.r_max = vg.hi;
  return out;
}

PolarField pullback_F(const PolarField& omega, const CoordinateMap& m, const VGrid& vg) {
  if (!(omega.grid() == m.grid())) throw std::invalid_argument("pullback_F: grid mismatch");
  const Grid& g = omega.grid();
  const int n = g.n_r;
  PolarField F(vgrid_as_grid(g, vg));
  std::vector<double> rv(vg.n);
  for (int i = 0; i < vg.n; ++i) rv[i] = m.r_of_v(vg.v(i));
  const auto nodes = g.nodes();
  const double t = m.t();
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k <= omega.kmax(); ++k) {
    std::vector<double> re(n), im(n);
    bool any = false;
    for (int j = 0; j < n; ++j) {
      const cplx c = omega.at(k, j) * std::polar(1.0, k * t * m.v_nodes()[j]);
      re[j] = c.real();
      im[j] = c.imag();
      any = any || c != cplx(0.0);
    }
    if (!any) continue;
    const Pchip pr = make_pchip(nodes, re), pi = make_pchip(nodes, im);
    for (int i = 0; i < vg.n; ++i) {
      const double r = rv[i];
      if (r < nodes.front() || r > nodes.back()) continue;
      F.at(k, i) = {pr(r), pi(r)};
    }
  }
  return F;
}

double f_distance(const PolarField& a, const PolarField& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("f_distance: grid mismatch");
  const double h = a.grid().h();
  double s = 0.0;
  for (int k = 0; k <= a.kmax(); ++k) {
    double row = 0.0;
    for (int j = 0; j < a.n_r(); ++j) row += std::norm(a.at(k, j) - b.at(k, j));
    s += (k == 0 ? 1.0 : 2.0) * row;
  }
  return std::sqrt(two_pi * h * s);
}

ProfileConvergence profile_convergence(const std::vector<std::pair<double, PolarField>>& snaps) {
  if (snaps.size() < 3) throw std::invalid_argument("profile_convergence: need at least 3 snapshots");
  for (std::size_t i = 1; i < snaps.size(); ++i)
    if (!(snaps[i].first > snaps[i - 1].first)) throw std::invalid_argument("profile_convergence: times must increase");
  ProfileConvergence out;
  const auto& last = snaps.back();
  for (std::size_t i = 0; i + 1 < snaps.size(); ++i) {
    out.distances.push_back(f_distance(snaps[i + 1].second, snaps[i].second));
    out.to_last.push_back(f_distance(snaps[i].second, last.second));
  }
  std::vector<double> ts, ys;
  for (std::size_t i = 0; i + 1 < snaps.size(); ++i)
    if (snaps[i].first > 0 && out.to_last[i] > 0) {
      ts.push_back(snaps[i].first);
      ys.push_back(std::log(out.to_last[i]));
    }
  if (ts.size() < 2) return out;
  const double T = last.first;
  // least squares in log space; log C eliminated in closed form
  auto fit = [&](double p) {
    double mean = 0.0;
    std::vector<double> m(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
      m[i] = std::log(std::abs(std::pow(ts[i], p) - std::pow(T, p)));
      mean += ys[i] - m[i];
    }
    mean /= ts.size();
    double ss = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) ss += std::pow(ys[i] - m[i] - mean, 2);
    return std::pair{ss, mean};
  };
  auto [p, ss] = boost::math::tools::brent_find_minima([&](double q) { return fit(q).first; }, -6.0, -1e-3, 50);
  (void)ss;
  out.slope = p;
  out.prefactor = std::exp(fit(p).second);
  return out;
}

}  // namespace vortexlab
