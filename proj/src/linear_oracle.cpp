#include "vortexlab/linear_oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <numeric>

#include <boost/math/quadrature/gauss.hpp>

#include "vortexlab/dynamics.hpp"

namespace vortexlab {

namespace {

constexpr double pi = std::numbers::pi;
constexpr int kGL = 20;

// Gauss-Legendre nodes and weights on [-1, 1]
struct GL {
  std::array<double, kGL> x{}, w{};
  GL() {
    using G = boost::math::quadrature::gauss<double, kGL>;
    const auto& a = G::abscissa();
    const auto& wt = G::weights();
    int n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == 0.0) {
        x[n] = 0.0;
        w[n++] = wt[i];
        continue;
      }
      x[n] = a[i];
      w[n++] = wt[i];
      x[n] = -a[i];
      w[n++] = wt[i];
    }
  }
};
const GL& gl() {
  static const GL g;
  return g;
}

double wavelength(double rho, int a, double kappa, double t) {
  return 2.0 * pi * pi * rho * rho * rho / (a * std::abs(kappa) * t);
}

}  // namespace

std::vector<ModeData> default_initial_modes(double eps, int m, double lo, double hi) {
  ModeData d;
  d.k = m;
  d.lo = lo;
  d.hi = hi;
  const double amp = m == 0 ? eps : 0.5 * eps;
  d.profile = [=](double r) { return cplx(amp * initial_radial_profile(InitialProfile::bump, lo, hi, r)); };
  return {d};
}

double linear_vorticity(double t, double theta, double r, const std::vector<ModeData>& omega0, double kappa) {
  double w = 0.0;
  const double shift = kappa * t / (2.0 * pi * r * r);
  for (const auto& m : omega0) {
    if (r < m.lo || r > m.hi) continue;
    const cplx c = m.profile(r);
    if (m.k == 0)
      w += c.real();
    else
      w += 2.0 * (c * std::polar(1.0, m.k * (theta - shift))).real();
  }
  return w;
}

StreamProfile linear_stream_profile(double t, const ModeData& mode, std::vector<double> r, double kappa,
                                    const OracleQuadrature& q) {
  if (mode.k == 0) throw std::invalid_argument("linear_stream_profile: k = 0 has no oscillatory kernel");
  const int a = std::abs(mode.k);
  const std::size_t nr = r.size();
  std::vector<std::size_t> order(nr);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return r[i] < r[j]; });

  const double lo = mode.lo, hi = mode.hi;
  const double hmax = (hi - lo) / q.min_panels;
  if (t > 0.0) {
    const double est = a * std::abs(kappa) * t / (4.0 * pi * pi * q.wavelength_fraction) * (1 / (lo * lo) - 1 / (hi * hi)) +
                       q.min_panels + static_cast<double>(nr);
    if (est > q.max_panels)
      throw UnresolvedOscillation("oscillation unresolved within the panel budget at t = " + std::to_string(t),
                                  t * q.max_panels / est);
  }
  // breakpoints: support ends and the sample radii inside
  std::vector<double> bp{lo};
  for (auto i : order)
    if (r[i] > lo && r[i] < hi && r[i] > bp.back()) bp.push_back(r[i]);
  bp.push_back(hi);

  const double c = static_cast<double>(mode.k) * kappa * t / (2.0 * pi);  // phase c / rho^2
  const auto& G = gl();
  // segment integrals of rho^{a+1} f and rho^{1-a} f
  std::vector<cplx> seg_in(bp.size() - 1), seg_out(bp.size() - 1);
  for (std::size_t s = 0; s + 1 < bp.size(); ++s) {
    cplx in = 0.0, out = 0.0;
    double x = bp[s];
    const double x1 = bp[s + 1];
    while (x < x1) {
      double w = std::min(hmax, x1 - x);
      if (t > 0.0) w = std::min(w, q.wavelength_fraction * wavelength(x, a, kappa, t));
      if (x1 - (x + w) < 1e-12 * w) w = x1 - x;
      const double mid = x + 0.5 * w, half = 0.5 * w;
      for (int i = 0; i < kGL; ++i) {
        const double rho = mid + half * G.x[i];
        const cplx f = mode.profile(rho) * std::polar(1.0, -c / (rho * rho)) * (half * G.w[i]);
        in += std::pow(rho, a + 1) * f;
        out += std::pow(rho, 1 - a) * f;
      }
      x += w;
    }
    seg_in[s] = in;
    seg_out[s] = out;
  }
  cplx total_out = 0.0;
  for (const auto& v : seg_out) total_out += v;

  StreamProfile p;
  p.r = r;
  p.psi.assign(nr, 0.0);
  p.dpsi_dr.assign(nr, 0.0);
  cplx In = 0.0, Out = total_out;
  std::size_t s = 0;
  for (auto i : order) {
    const double ri = r[i];
    if (!(ri > 0.0)) throw std::invalid_argument("linear_stream_profile: radii must be positive");
    while (s + 1 < bp.size() && bp[s + 1] <= ri) {
      In += seg_in[s];
      Out -= seg_out[s];
      ++s;
    }
    const cplx out = ri >= hi ? cplx(0.0) : Out;
    p.psi[i] = -(1.0 / (2.0 * a)) * (std::pow(ri, -a) * In + std::pow(ri, a) * out);
    p.dpsi_dr[i] = 0.5 * (std::pow(ri, -a - 1) * In - std::pow(ri, a - 1) * out);
  }
  return p;
}

cplx linear_stream_mode(double t, const ModeData& mode, double r, double kappa, const OracleQuadrature& q) {
  return linear_stream_profile(t, mode, {r}, kappa, q).psi[0];
}

std::vector<double> geometric_ladder(double t0, double t1, double ratio) {
  std::vector<double> t;
  for (double x = t0; x <= t1 * (1 + 1e-12); x *= ratio) t.push_back(x);
  return t;
}

OracleSpec default_oracle_spec(double eps, int m, double kappa) {
  OracleSpec s;
  s.kappa = kappa;
  s.modes = default_initial_modes(eps, m);
  s.times = geometric_ladder(1.0, 1000.0, std::pow(2.0, 0.25));
  const int n = 512;
  for (int i = 0; i < n; ++i) s.r_samples.push_back(1.0 / 16 + (16.0 - 1.0 / 16) * i / (n - 1));
  return s;
}

OracleReport oracle_decay_report(const OracleSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();
  OracleReport rep;
  rep.fit_lo = spec.fit_lo;
  rep.fit_hi = spec.fit_hi;
  for (const auto& m : spec.modes) rep.ks.push_back(m.k);
  const int nt = static_cast<int>(spec.times.size());
  rep.rows.resize(nt);
  const int nth = spec.n_theta;
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic)
  for (int it = 0; it < nt; ++it) {
    try {
      const double t = spec.times[it];
      auto& row = rep.rows[it];
      row.t = t;
      const std::size_t nr = spec.r_samples.size();
      std::vector<double> ur(static_cast<std::size_t>(nth) * nr, 0.0), ut(ur.size(), 0.0);
      for (const auto& m : spec.modes) {
        if (m.k == 0) {  // radial data: no k != 0 output
          row.sup_psi.push_back(0.0);
          row.sup_dpsi.push_back(0.0);
          continue;
        }
        const auto p = linear_stream_profile(t, m, spec.r_samples, spec.kappa, spec.quad);
        double sp = 0.0, sd = 0.0;
        for (std::size_t j = 0; j < nr; ++j) {
          sp = std::max(sp, std::abs(p.psi[j]));
          sd = std::max(sd, std::abs(p.dpsi_dr[j]));
          const double r = spec.r_samples[j];
          for (int i = 0; i < nth; ++i) {
            const cplx e = std::polar(1.0, m.k * 2.0 * pi * i / nth);
            // u_r = -(1/r) d_theta psi, u_theta = d_r psi; both conjugate modes
            ur[static_cast<std::size_t>(i) * nr + j] += 2.0 * (-cplx(0.0, m.k) / r * p.psi[j] * e).real();
            ut[static_cast<std::size_t>(i) * nr + j] += 2.0 * (p.dpsi_dr[j] * e).real();
          }
        }
        row.sup_psi.push_back(sp);
        row.sup_dpsi.push_back(sd);
      }
      for (std::size_t i = 0; i < ur.size(); ++i) {
        row.sup_ur = std::max(row.sup_ur, std::abs(ur[i]));
        row.sup_utheta = std::max(row.sup_utheta, std::abs(ut[i]));
      }
    } catch (...) {
#pragma omp critical
      err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);

  std::vector<double> ts(nt), v(nt);
  for (int i = 0; i < nt; ++i) ts[i] = rep.rows[i].t;
  auto fit = [&](auto get) {
    for (int i = 0; i < nt; ++i) v[i] = get(rep.rows[i]);
    return decay_fit(ts, v, spec.fit_lo, spec.fit_hi);
  };
  for (std::size_t m = 0; m < spec.modes.size(); ++m) {
    if (spec.modes[m].k == 0) {
      rep.slope_psi.push_back({});
      rep.slope_dpsi.push_back({});
      continue;
    }
    rep.slope_psi.push_back(fit([m](const OracleSeriesRow& r) { return r.sup_psi[m]; }));
    rep.slope_dpsi.push_back(fit([m](const OracleSeriesRow& r) { return r.sup_dpsi[m]; }));
  }
  bool any = std::any_of(spec.modes.begin(), spec.modes.end(), [](const ModeData& d) { return d.k != 0; });
  if (any) {
    rep.slope_ur = fit([](const OracleSeriesRow& r) { return r.sup_ur; });
    rep.slope_utheta = fit([](const OracleSeriesRow& r) { return r.sup_utheta; });
  }
  rep.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

nlohmann::json OracleReport::to_json() const {
  auto fj = [](const SlopeFit& f) { return nlohmann::json{{"slope", f.slope}, {"ci95", f.width}, {"n", f.n}}; };
  nlohmann::json j;
  j["fit_window"] = {fit_lo, fit_hi};
  j["modes"] = ks;
  j["slopes"] = nlohmann::json::object();
  for (std::size_t m = 0; m < ks.size(); ++m) {
    j["slopes"]["sup_psi_k" + std::to_string(ks[m])] = fj(slope_psi[m]);
    j["slopes"]["sup_dpsi_k" + std::to_string(ks[m])] = fj(slope_dpsi[m]);
  }
  j["slopes"]["sup_ur"] = fj(slope_ur);
  j["slopes"]["sup_utheta_nonradial"] = fj(slope_utheta);
  j["n_times"] = rows.size();
  j["runtime_s"] = runtime_s;
  return j;
}

void OracleReport::write_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << "t";
  for (int k : ks) os << ",sup_psi_k" << k << ",sup_dpsi_k" << k;
  os << ",sup_ur,sup_utheta_nonradial\n";
  os << std::setprecision(17);
  for (const auto& r : rows) {
    os << r.t;
    for (std::size_t m = 0; m < ks.size(); ++m) os << ',' << r.sup_psi[m] << ',' << r.sup_dpsi[m];
    os << ',' << r.sup_ur << ',' << r.sup_utheta << '\n';
  }
}

}  // namespace vortexlab
