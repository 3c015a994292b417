#include "vortexlab/poisson.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "vortexlab/panel_quadrature.hpp"

namespace vortexlab {

double Rotation::alpha(int k) const { return k * kappa * clock / (2.0 * std::numbers::pi); }
double Rotation::omega(double r) const { return kappa / (2.0 * std::numbers::pi * r * r); }
cplx Rotation::phase(int k, double r) const { return std::polar(1.0, -alpha(k) / (r * r)); }

namespace {
PolarField apply_phase(const PolarField& f, const Rotation& rot, double sign) {
  PolarField out(f.grid());
  const Grid& g = f.grid();
#pragma omp parallel for schedule(static)
  for (int k = 0; k <= f.kmax(); ++k) {
    const double a = sign * rot.alpha(k);
    for (int j = 0; j < g.n_r; ++j) {
      const double r = g.r(j);
      out.at(k, j) = (k == 0 || a == 0.0) ? f.at(k, j) : f.at(k, j) * std::polar(1.0, -a / (r * r));
    }
  }
  return out;
}
}  // namespace

PolarField rotate(const PolarField& g, const Rotation& rot) { return apply_phase(g, rot, 1.0); }
PolarField unrotate(const PolarField& w, const Rotation& rot) { return apply_phase(w, rot, -1.0); }

double green_kernel(int k, double r, double rho) {
  if (k == 0) throw std::invalid_argument("green_kernel: k = 0 has no kernel (use mean_flow)");
  if (!(r > 0.0 && rho > 0.0)) throw std::invalid_argument("green_kernel: r, rho must be > 0");
  const int a = std::abs(k);
  const double q = r < rho ? r / rho : rho / r;
  return -(rho / (2.0 * a)) * std::pow(q, a);
}

double green_kernel_dr(int k, double r, double rho) {
  if (k == 0) throw std::invalid_argument("green_kernel_dr: k = 0");
  const int a = std::abs(k);
  if (r < rho) return -0.5 * std::pow(r / rho, a) * rho / r;
  return 0.5 * std::pow(rho / r, a) * rho / r;
}

StreamMode solve_stream_mode(const Grid& grid, int k, std::span<const cplx> g, double alpha) {
  if (k == 0) throw std::invalid_argument("solve_stream_mode: k = 0 (use mean_flow)");
  const int n = grid.n_r;
  if (g.size() != static_cast<std::size_t>(n)) throw std::invalid_argument("solve_stream_mode: size mismatch");
  const int a = std::abs(k);
  PanelQuadrature pq(grid);
  StreamMode out;
  out.psi.assign(n, cplx{});
  out.dpsi_dr.assign(n, cplx{});
  for (int j = 0; j < 4; ++j)
    if (g[j] != cplx{} || g[n - 1 - j] != cplx{}) out.touches_boundary = true;

  std::vector<cplx> pm(n - 1), pp(n - 1);
  std::vector<double> rho;
  std::vector<cplx> val;
  for (int j = 0; j + 1 < n; ++j) {
    if (pq.empty_panel(g, j)) continue;
    const int c = pq.nodes(g, alpha, a, j, rho, val);
    const double ra = grid.r(j), rb = grid.r(j + 1);
    cplx sm{}, sp{};
    for (int q = 0; q < c; ++q) {
      const double x = rho[q];
      sm += val[q] * (x * std::exp(a * std::log(x / rb)));
      sp += val[q] * (x * std::exp(a * std::log(ra / x)));
    }
    pm[j] = sm;
    pp[j] = sp;
  }
  // rescaled prefix sums never form r^{|k|} on its own
  std::vector<cplx> sminus(n), splus(n);
  std::vector<double> ratio(n);  // (r_{i-1}/r_i)^{|k|}
  for (int i = 1; i < n; ++i) ratio[i] = std::exp(a * std::log(grid.r(i - 1) / grid.r(i)));
  sminus[0] = 0.0;
  for (int i = 1; i < n; ++i) sminus[i] = sminus[i - 1] * ratio[i] + pm[i - 1];
  splus[n - 1] = 0.0;
  for (int i = n - 2; i >= 0; --i) splus[i] = splus[i + 1] * ratio[i + 1] + pp[i];
  for (int i = 0; i < n; ++i) {
    out.psi[i] = -(sminus[i] + splus[i]) / (2.0 * a);
    out.dpsi_dr[i] = (sminus[i] - splus[i]) / (2.0 * grid.r(i));
  }
  return out;
}

std::vector<double> mean_flow(const Grid& grid, std::span<const double> omega0) {
  const int n = grid.n_r;
  if (omega0.size() != static_cast<std::size_t>(n)) throw std::invalid_argument("mean_flow: size mismatch");
  std::vector<cplx> g(omega0.begin(), omega0.end());
  PanelQuadrature pq(grid);
  std::vector<double> out(n, 0.0);
  std::vector<double> rho;
  std::vector<cplx> val;
  double cum = 0.0;
  for (int j = 0; j + 1 < n; ++j) {
    if (!pq.empty_panel(g, j)) {
      const int c = pq.nodes(g, 0.0, 1, j, rho, val);
      double s = 0.0;
      for (int q = 0; q < c; ++q) s += val[q].real() * rho[q];
      cum += s;
    }
    out[j + 1] = cum / grid.r(j + 1);
  }
  return out;
}

double mean_mass(const Grid& grid, std::span<const double> omega0) {
  auto m = mean_flow(grid, omega0);
  return 2.0 * std::numbers::pi * m.back() * grid.r_max;
}

Velocity velocity(const PolarField& psi) {
  Velocity v{radial_derivative(psi, 1), PolarField(psi.grid())};
  const Grid& g = psi.grid();
  for (int k = 1; k <= psi.kmax(); ++k)
    for (int j = 0; j < g.n_r; ++j) v.u_r.at(k, j) = cplx(0.0, -k / g.r(j)) * psi.at(k, j);
  return v;
}

StreamSolution solve_stream(const PolarField& g, const Rotation& rot, const StreamOptions& opt) {
  const Grid& grid = g.grid();
  StreamSolution s{PolarField(grid), PolarField(grid), PolarField(grid), 0.0};
  std::vector<double> rowmax(g.kmax() + 1, 0.0);
  double gmax = 0.0;
  for (int k = 1; k <= g.kmax(); ++k) {
    for (const auto& c : g.row(k)) rowmax[k] = std::max(rowmax[k], std::abs(c));
    gmax = std::max(gmax, rowmax[k]);
  }
  const double floor = opt.relative_mode_floor * gmax;
  s.mode_floor_used = floor;
#pragma omp parallel for schedule(dynamic, 1)
  for (int k = 1; k <= g.kmax(); ++k) {
    if (rowmax[k] == 0.0 || rowmax[k] < floor) continue;
    auto m = solve_stream_mode(grid, k, g.row(k), rot.alpha(k));
    for (int j = 0; j < grid.n_r; ++j) {
      s.psi.at(k, j) = m.psi[j];
      s.u_theta.at(k, j) = m.dpsi_dr[j];
      s.u_r.at(k, j) = cplx(0.0, -k / grid.r(j)) * m.psi[j];
    }
  }
  // k = 0: mean flow, and psi_0 by cumulative trapezoid from psi_0(r_min) = 0
  std::vector<double> w0(grid.n_r);
  for (int j = 0; j < grid.n_r; ++j) w0[j] = g.at(0, j).real();
  auto mf = mean_flow(grid, w0);
  double acc = 0.0;
  for (int j = 0; j < grid.n_r; ++j) {
    if (j > 0) acc += 0.5 * grid.h() * (mf[j] + mf[j - 1]);
    s.u_theta.at(0, j) = mf[j];
    s.psi.at(0, j) = acc;
  }
  return s;
}

}  // namespace vortexlab
