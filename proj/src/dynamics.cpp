#include "vortexlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "vortexlab/gevrey.hpp"
#include "vortexlab/panel_quadrature.hpp"

namespace vortexlab {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
}

double initial_radial_profile(InitialProfile profile, double lo, double hi, double r) {
  const double x = (r - lo) / (hi - lo);
  if (profile == InitialProfile::plateau) return plateau_cutoff(1.0, 0.9, x);
  return bump_psi_a(1.0, x) / std::exp(-4.0);
}

PolarField initial_vorticity(const Grid& grid, double eps, int m, InitialProfile profile, double lo, double hi) {
  PolarField w(grid);
  if (m < 0 || m > w.kmax()) throw std::invalid_argument("initial mode m outside the retained range");
  const double amp = m == 0 ? eps : 0.5 * eps;
  for (int j = 0; j < grid.n_r; ++j) w.at(m, j) = amp * initial_radial_profile(profile, lo, hi, grid.r(j));
  return w;
}

SimState make_state(const PolarField& omega0, double kappa) {
  if (kappa == 0.0) throw std::invalid_argument("kappa must be nonzero");
  SimState s;
  s.t = 0.0;
  s.g = omega0;
  s.vortex.kappa = kappa;
  const Grid& grid = omega0.grid();
  std::vector<double> w0(grid.n_r);
  for (int j = 0; j < grid.n_r; ++j) w0[j] = omega0.at(0, j).real();
  s.vortex.c0 = mean_mass(grid, w0);
  s.mean_flow_now = mean_flow(grid, w0);
  s.mean_flow_integral.assign(grid.n_r, 0.0);
  s.mean_omega_integral.assign(grid.n_r, 0.0);
  return s;
}

Drift vortex_drift(const PolarField& g, const Rotation& rot) {
  if (g.kmax() < 1) return {};
  PanelQuadrature pq(g.grid());
  const cplx I = pq.integrate(g.row(1), rot.alpha(1), 0.0);
  return {-I.imag(), -I.real()};
}

Drift vortex_drift(const PolarField& omega) { return vortex_drift(omega, Rotation{0.0, 0.0}); }

namespace {

// lab-frame omega_k and d_r omega_k at every node from the unwound field
void lab_fields(const PolarField& g, const Rotation& rot, PolarField& w, PolarField& dw) {
  const Grid& grid = g.grid();
  const double h = grid.h();
  w = PolarField(grid);
  dw = PolarField(grid);
#pragma omp parallel
  {
    std::vector<cplx> d(grid.n_r);
#pragma omp for schedule(static)
    for (int k = 0; k <= g.kmax(); ++k) {
      auto row = g.row(k);
      bool any = false;
      for (const auto& c : row)
        if (c != cplx{}) {
          any = true;
          break;
        }
      if (!any) continue;
      diff1(row, h, d);
      const double a = rot.alpha(k);
      for (int j = 0; j < grid.n_r; ++j) {
        const double r = grid.r(j);
        const cplx e = a == 0.0 ? cplx(1.0) : std::polar(1.0, -a / (r * r));
        w.at(k, j) = row[j] * e;
        dw.at(k, j) = e * (d[j] + cplx(0.0, 2.0 * a / (r * r * r)) * row[j]);
      }
    }
  }
}

// (P'.e_r) f + (1/r)(P'.e_theta) d_theta f, in modes (exact, truncated at kmax)
void add_drift_terms(const PolarField& w, const PolarField& dw, const Drift& P, PolarField& out) {
  const Grid& grid = w.grid();
  const int K = w.kmax();
  const cplx cp(0.5 * P.dP1, -0.5 * P.dP2);  // coefficient of e^{+i theta} in P'.e_r
  const cplx dp(0.5 * P.dP2, 0.5 * P.dP1);   // coefficient of e^{+i theta} in P'.e_theta
  for (int k = 0; k <= K; ++k)
    for (int j = 0; j < grid.n_r; ++j) {
      const double r = grid.r(j);
      auto dth = [&](int q) { return cplx(0.0, q) * w.mode(q, j); };
      cplx v = cp * dw.mode(k - 1, j) + std::conj(cp) * dw.mode(k + 1, j);
      v += (dp * dth(k - 1) + std::conj(dp) * dth(k + 1)) / r;
      out.at(k, j) += v;
    }
}

// (d_theta psi d_r omega - d_r psi d_theta omega)/r via dealiased physical products.
// In flux form the k = 0 row is (1/r) d_r <d_theta psi omega>, which keeps the mass
// budget a pure boundary term even where the lab-frame rows are under-resolved.
void add_nonlinear(const PolarField& w, const PolarField& dw, const StreamSolution& st, double row_floor,
                   bool flux_form, PolarField& out) {
  const Grid& grid = w.grid();
  const int K = w.kmax();
  const int n = grid.n_theta;
  const auto& tr = AngularTransform::get(n);
  double gmax = std::max(w.max_abs(), dw.max_abs() * grid.h());
  const double floor = row_floor * gmax;
  std::vector<double> flux(flux_form ? grid.n_r : 0, 0.0);
#pragma omp parallel
  {
    std::vector<cplx> A(K + 1), B(K + 1), C(K + 1), D(K + 1), res(K + 1);
    std::vector<double> a(n), b(n), c(n), d(n), p(n);
#pragma omp for schedule(dynamic, 16)
    for (int j = 0; j < grid.n_r; ++j) {
      double m = 0.0;
      for (int k = 0; k <= K; ++k) m = std::max({m, std::abs(w.at(k, j)), std::abs(dw.at(k, j)) * grid.h()});
      if (!(m > floor) || m == 0.0) continue;
      for (int k = 0; k <= K; ++k) {
        A[k] = cplx(0.0, k) * st.psi.at(k, j);
        B[k] = dw.at(k, j);
        C[k] = st.u_theta.at(k, j);
        D[k] = cplx(0.0, k) * w.at(k, j);
      }
      tr.inverse(A.data(), K, a.data());
      tr.inverse(B.data(), K, b.data());
      tr.inverse(C.data(), K, c.data());
      tr.inverse(D.data(), K, d.data());
      const double inv_r = 1.0 / grid.r(j);
      for (int i = 0; i < n; ++i) p[i] = (a[i] * b[i] - c[i] * d[i]) * inv_r;
      tr.forward(p.data(), res.data(), K);
      for (int k = flux_form ? 1 : 0; k <= K; ++k) out.at(k, j) += res[k];
      if (flux_form) {
        // <d_theta psi omega> = sum_k 2 Re(ik psi_k conj(omega_k)); k = 0 carries no d_theta
        double s = 0.0;
        for (int k = 1; k <= K; ++k) s += 2.0 * (A[k] * std::conj(w.at(k, j))).real();
        flux[j] = s;
      }
    }
  }
  if (flux_form) {
    std::vector<double> df(grid.n_r);
    diff1(std::span<const double>(flux), grid.h(), df);
    for (int j = 0; j < grid.n_r; ++j) out.at(0, j) += df[j] / grid.r(j);
  }
}

}  // namespace

PolarField transport_rhs(const PolarField& g, const Rotation& rot, const StreamSolution& stream, const Drift& Pdot,
                         const DynamicsOptions& opt) {
  PolarField w, dw;
  lab_fields(g, rot, w, dw);
  PolarField n(g.grid());
  if (opt.drift && (Pdot.dP1 != 0.0 || Pdot.dP2 != 0.0)) add_drift_terms(w, dw, Pdot, n);
  if (opt.nonlinear) add_nonlinear(w, dw, stream, opt.row_floor, opt.flux_form_mean, n);
  return unrotate(n, rot);
}

PolarField rhs(const PolarField& omega, const StreamSolution& stream, const Drift& Pdot, double kappa) {
  DynamicsOptions opt;
  opt.row_floor = 0.0;
  auto n = transport_rhs(omega, Rotation{kappa, 0.0}, stream, Pdot, opt);
  const Grid& grid = omega.grid();
  for (int k = 1; k <= omega.kmax(); ++k)
    for (int j = 0; j < grid.n_r; ++j) {
      const double r = grid.r(j);
      n.at(k, j) -= cplx(0.0, k * kappa / (two_pi * r * r)) * omega.at(k, j);
    }
  return n;
}

namespace {

struct StageResult {
  PolarField dg;
  Drift drift;
};

StageResult stage(const PolarField& g, double tau, double kappa, const DynamicsOptions& opt) {
  const Rotation rot{kappa, tau};
  StageResult r;
  r.drift = opt.drift ? vortex_drift(g, rot) : Drift{};
  if (opt.nonlinear) {
    StreamOptions so{opt.relative_mode_floor};
    auto st = solve_stream(g, rot, so);
    r.dg = transport_rhs(g, rot, st, r.drift, opt);
  } else {
    StreamSolution st{PolarField(g.grid()), PolarField(g.grid()), PolarField(g.grid()), 0.0};
    r.dg = transport_rhs(g, rot, st, r.drift, opt);
  }
  return r;
}

PolarField axpy(const PolarField& x, double a, const PolarField& y) {
  PolarField out = x;
  auto& d = out.data();
  const auto& yd = y.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += a * yd[i];
  return out;
}

double max_velocity_bound(const PolarField& f) {
  // sup over theta of a Fourier series is bounded by the sum of |coefficients|
  double m = 0.0;
  const Grid& grid = f.grid();
  for (int j = 0; j < grid.n_r; ++j) {
    double s = std::abs(f.at(0, j));
    for (int k = 1; k <= f.kmax(); ++k) s += 2.0 * std::abs(f.at(k, j));
    m = std::max(m, s);
  }
  return m;
}

void flush_denormals(PolarField& g) {
  for (auto& c : g.data()) {
    if (std::abs(c.real()) < 1e-280) c.real(0.0);
    if (std::abs(c.imag()) < 1e-280) c.imag(0.0);
  }
}

}  // namespace

double cfl_limit(const SimState& s, const DynamicsOptions& opt) {
  if (!opt.nonlinear && !opt.drift) return INFINITY;
  const Grid& grid = s.grid();
  const Rotation rot = s.rotation();
  double ur = 0.0, ut = 0.0;
  if (opt.nonlinear) {
    auto st = solve_stream(s.g, rot, StreamOptions{opt.relative_mode_floor});
    ur = max_velocity_bound(st.u_r);
    ut = max_velocity_bound(st.u_theta);
  }
  if (opt.drift) {
    auto d = vortex_drift(s.g, rot);
    const double p = std::hypot(d.dP1, d.dP2);
    ur += p;
    ut += p;
  }
  double lim = INFINITY;
  if (ur > 0) lim = std::min(lim, grid.h() / ur);
  if (ut > 0) lim = std::min(lim, grid.dtheta() * grid.r_min / ut);
  return 0.5 * lim;
}

SimState step(const SimState& s, double dt, const DynamicsOptions& opt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be > 0");
  const double lim = cfl_limit(s, opt);
  if (dt > lim) {
    std::ostringstream os;
    os << "CFL violation: dt = " << dt << " exceeds stable dt = " << lim;
    throw CflError(os.str(), lim);
  }
  const double kappa = s.vortex.kappa;
  const double t = s.t;
  auto clock = [&](double c) { return opt.splitting == Splitting::strang ? t + 0.5 * dt : t + c * dt; };

  SimState out = s;
  if (opt.nonlinear || opt.drift) {
    // the rotation half-steps are exact: in unwound variables they only advance the clock
    auto k1 = stage(s.g, clock(0.0), kappa, opt);
    auto k2 = stage(axpy(s.g, 0.5 * dt, k1.dg), clock(0.5), kappa, opt);
    auto k3 = stage(axpy(s.g, 0.5 * dt, k2.dg), clock(0.5), kappa, opt);
    auto k4 = stage(axpy(s.g, dt, k3.dg), clock(1.0), kappa, opt);
    auto& d = out.g.data();
    const auto &a = k1.dg.data(), &b = k2.dg.data(), &c = k3.dg.data(), &e = k4.dg.data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += dt / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + e[i]);
    out.vortex.P1 += dt / 6.0 * (k1.drift.dP1 + 2 * k2.drift.dP1 + 2 * k3.drift.dP1 + k4.drift.dP1);
    out.vortex.P2 += dt / 6.0 * (k1.drift.dP2 + 2 * k2.drift.dP2 + 2 * k3.drift.dP2 + k4.drift.dP2);
    flush_denormals(out.g);
  }
  out.t = t + dt;

  const Grid& grid = s.grid();
  std::vector<double> w0(grid.n_r);
  for (int j = 0; j < grid.n_r; ++j) w0[j] = out.g.at(0, j).real();
  out.mean_flow_now = mean_flow(grid, w0);
  for (int j = 0; j < grid.n_r; ++j) {
    const double r = grid.r(j);
    out.mean_flow_integral[j] += 0.5 * dt * (s.mean_flow_now[j] + out.mean_flow_now[j]) / r;
    out.mean_omega_integral[j] += 0.5 * dt * (s.g.at(0, j).real() + w0[j]) / r;
  }
  return out;
}

Conserved conserved_quantities(const SimState& s) {
  const Grid& grid = s.grid();
  PanelQuadrature pq(grid);
  Conserved c;
  c.mass = two_pi * pq.integrate(s.g.row(0), 0.0, 1.0).real();
  double ens = 0.0;
  std::vector<cplx> sq(grid.n_r);
  for (int k = 0; k <= s.g.kmax(); ++k) {
    bool any = false;
    for (int j = 0; j < grid.n_r; ++j) {
      sq[j] = std::norm(s.g.at(k, j));
      any = any || sq[j] != cplx{};
    }
    if (!any) continue;
    ens += (k == 0 ? 1.0 : 2.0) * pq.integrate(sq, 0.0, 1.0).real();
  }
  c.enstrophy = two_pi * ens;
  const double kc = s.vortex.kappa + c.mass;
  cplx m1{};
  if (s.g.kmax() >= 1) m1 = pq.integrate(s.g.row(1), s.rotation().alpha(1), 2.0);
  c.moment_x = kc * s.vortex.P1 + two_pi * m1.real();
  c.moment_y = kc * s.vortex.P2 - two_pi * m1.imag();
  return c;
}

double moment_scale(const SimState& s) {
  const Grid& grid = s.grid();
  auto phys = to_physical(s.omega());
  double acc = 0.0;
  for (int i = 0; i < grid.n_theta; ++i)
    for (int j = 0; j < grid.n_r; ++j) {
      const double r = grid.r(j);
      acc += std::abs(phys[static_cast<std::size_t>(i) * grid.n_r + j]) * r * r;
    }
  acc *= grid.dtheta() * grid.h();
  auto c = conserved_quantities(s);
  return std::hypot(c.moment_x, c.moment_y) + acc;
}

SupportExtent support_extent(const SimState& s, double rel_threshold) {
  const Grid& grid = s.grid();
  std::vector<double> rowmax(grid.n_r, 0.0);
  double gmax = 0.0;
  for (int k = 0; k <= s.g.kmax(); ++k)
    for (int j = 0; j < grid.n_r; ++j) rowmax[j] = std::max(rowmax[j], std::abs(s.g.at(k, j)));
  for (double m : rowmax) gmax = std::max(gmax, m);
  SupportExtent e;
  if (gmax == 0.0) return e;
  for (int j = 0; j < grid.n_r; ++j)
    if (rowmax[j] > rel_threshold * gmax) {
      if (e.empty) e.r_lo = grid.r(j);
      e.r_hi = grid.r(j);
      e.empty = false;
    }
  return e;
}

bool support_ok(const SimState& s, const DynamicsOptions& opt) {
  auto e = support_extent(s);
  if (e.empty) return true;
  return e.r_lo >= 0.5 * opt.vartheta0 && e.r_hi <= 2.0 / opt.vartheta0;
}

}  // namespace vortexlab
