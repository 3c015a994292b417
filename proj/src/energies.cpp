#include "vortexlab/energies.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "vortexlab/poisson.hpp"

namespace vortexlab {

namespace {

double jt(double t) { return std::sqrt(1.0 + t * t); }

// log A and d/dt log A at one (k, xi), lambda values precomputed
struct AEval {
  Star s;
  double t, h, lam, lam_p, lam_m;
  const WeightParams* p;
  AEval(Star s_, double t_, const WeightParams& p_) : s(s_), t(t_), p(&p_) {
    h = 1e-4 * std::max(1.0, t);
    lam = lambda_of(t, p_);
    lam_p = lambda_of(t + h, p_);
    lam_m = t < h ? lam : lambda_of(t - h, p_);
  }
  // returns log A, writes d/dt log A (same differences as dlogA_dt)
  double operator()(int k, double xi, double& dlog) const {
    const double la = log_A(s, k, t, xi, *p, lam);
    const double up = log_A(s, k, t + h, xi, *p, lam_p);
    dlog = t < h ? (up - la) / h : (up - log_A(s, k, t - h, xi, *p, lam_m)) / (2.0 * h);
    return la;
  }
};

EnergyTerm finish(long double E, long double Bd, long double tail) {
  EnergyTerm r;
  r.E = static_cast<double>(E);
  r.Bdot = static_cast<double>(Bd);
  r.tail_warning = E > 0 && tail / E > 1e-3L;
  return r;
}

// sum over k = kmin..kmax (with the conjugate rows) of mult(k, xi) A_k^2 |F~|^2 dxi
template <class Mult>
EnergyTerm mode_sum(const Spectrum& sp, double t, const WeightParams& p, int kmin, Mult&& mult) {
  const AEval A(Star::K, t, p);
  const double ximax = std::abs(sp.xi.front());
  // per-row partial sums, combined in k order so the result is thread-count independent
  const int nk = sp.kmax - kmin + 1;
  std::vector<long double> pE(nk, 0.0L), pB(nk, 0.0L), pT(nk, 0.0L);
#pragma omp parallel for schedule(dynamic)
  for (int k = kmin; k <= sp.kmax; ++k) {
    long double E = 0.0L, Bd = 0.0L, tail = 0.0L;
    const double rows = k == 0 ? 1.0 : 2.0;
    for (int m = 0; m < sp.n_xi; ++m) {
      const double c = std::norm(sp.at(k, m));
      if (c == 0.0) continue;
      const double xi = sp.xi[m];
      double dlog = 0.0;
      const double A2 = std::exp(2.0 * A(k, xi, dlog));
      const double w = rows * mult(k, xi) * c * sp.dxi;
      E += w * A2;
      Bd += w * std::abs(dlog) * A2;
      if (std::abs(xi) > 0.9 * ximax || (sp.kmax > 0 && k > 0.9 * sp.kmax)) tail += w * A2;
    }
    pE[k - kmin] = E;
    pB[k - kmin] = Bd;
    pT[k - kmin] = tail;
  }
  long double E = 0.0L, Bd = 0.0L, tail = 0.0L;
  for (int i = 0; i < nk; ++i) E += pE[i], Bd += pB[i], tail += pT[i];
  return finish(E, Bd, tail);
}

PolarField with_cutoff(const PolarField& f, const ScaledCutoff& c) {
  PolarField out = f;
  const Grid& g = f.grid();
  for (int j = 0; j < g.n_r; ++j) {
    const double w = c(g.r(j));
    for (int k = 0; k <= f.kmax(); ++k) out.at(k, j) *= w;
  }
  return out;
}

}  // namespace

ScaledCutoff cutoff_psi(double kappa, double c0, double vartheta0) {
  const double lo = upsilon_lo(kappa, c0, vartheta0), hi = upsilon_hi(kappa, vartheta0);
  return make_cutoff(4.0, lo / 3, 3 * hi, lo / 2, 2 * hi);
}

ScaledCutoff cutoff_psi_dagger(double kappa, double c0, double vartheta0) {
  const double lo = upsilon_lo(kappa, c0, vartheta0), hi = upsilon_hi(kappa, vartheta0);
  return make_cutoff(4.0, lo / 9, 9 * hi, lo / 8, 8 * hi);
}

EnergyTerm energy_F(const PolarField& F, double t, const WeightParams& p) {
  return mode_sum(spectrum_of(F), t, p, 0, [](int, double) { return 1.0; });
}

EnergyTerm energy_phi(const PolarField& phi, double t, const WeightParams& p, const ScaledCutoff& Psi) {
  const double tt = jt(t);
  auto mult = [tt, t](int k, double xi) {
    const double kk = k, q = xi / kk;
    return std::pow(kk, 4) * tt * tt * std::pow(jt(t - q), 4) / (q * q + tt * tt);
  };
  return mode_sum(spectrum_of(with_cutoff(phi, Psi)), t, p, 1, mult);
}

EnergyTerm energy_scalar(std::span<const double> profile, double v0, double dv, Scalar which, double t,
                         const WeightParams& p, const ScaledCutoff* cutoff) {
  std::vector<double> f(profile.begin(), profile.end());
  if (cutoff)
    for (std::size_t i = 0; i < f.size(); ++i) f[i] *= (*cutoff)(v0 + i * dv);
  const Spectrum sp = spectrum_of(f, dv);
  const Star s = which == Scalar::Wstar ? Star::NR : Star::R;
  const AEval A(s, t, p);
  const double ximax = std::abs(sp.xi.front());
  const double pre = which == Scalar::Wstar ? p.K_const * p.K_const * std::pow(jt(t), 1.5) : 1.0;
  long double E = 0.0L, Bd = 0.0L, tail = 0.0L;
  for (int m = 0; m < sp.n_xi; ++m) {
    const double c = std::norm(sp.coef[m]);
    if (c == 0.0) continue;
    const double xi = sp.xi[m];
    double dlog = 0.0;
    const double A2 = std::exp(2.0 * A(0, xi, dlog));
    const double w = pre * (which == Scalar::Wstar ? std::pow(jb(xi), -1.5) : 1.0) * c * sp.dxi;
    E += w * A2;
    Bd += w * std::abs(dlog) * A2;
    if (std::abs(xi) > 0.9 * ximax) tail += w * A2;
  }
  return finish(E, Bd, tail);
}

EnergyRecord accumulate_B(const EnergyRecord* prev, double t, const std::array<EnergyTerm, 5>& now, double K_const) {
  EnergyRecord r;
  r.t = t;
  r.K_const = K_const;
  for (int i = 0; i < 5; ++i) {
    r.E[i] = now[i].E;
    r.Bdot[i] = now[i].Bdot;
    r.tail_warning = r.tail_warning || now[i].tail_warning;
  }
  if (!prev) return r;
  if (!(t >= prev->t)) throw std::invalid_argument("accumulate_B: time must not decrease");
  for (int i = 0; i < 5; ++i) {
    r.B[i] = prev->B[i];
    if (t <= 1.0) continue;
    double t0 = prev->t, f0 = prev->Bdot[i];
    if (t0 < 1.0) {  // integrand interpolated to s = 1
      f0 += (1.0 - t0) / (t - t0) * (r.Bdot[i] - f0);
      t0 = 1.0;
    }
    r.B[i] += 0.5 * (t - t0) * (f0 + r.Bdot[i]);
  }
  return r;
}

PolarField pullback_stream(const PolarField& psi, const CoordinateMap& m, const VGrid& vg) {
  PolarField phi = pullback_F(psi, m, vg);
  const Grid& g = psi.grid();
  const double t = m.t();
  for (int i = 0; i < vg.n; ++i) {
    const double v = vg.v(i);
    const double r = m.r_of_v(v);
    const bool inner = r < g.r_min, outer = r > g.r_max;
    if (!inner && !outer) continue;
    const int j = inner ? 0 : g.n_r - 1;
    const double rj = g.r(j);
    for (int k = 1; k <= psi.kmax(); ++k) {
      const double ratio = inner ? std::pow(r / rj, k) : std::pow(rj / r, k);
      // F_k = psi_k(r) e^{ikt v}
      phi.at(k, i) = psi.at(k, j) * ratio * std::polar(1.0, k * t * v);
    }
  }
  return phi;
}

std::array<EnergyTerm, 5> energies_of(const SimState& s, const CoordinateMap& m, const WeightParams& p,
                                      double vartheta0) {
  const double kappa = s.vortex.kappa, c0 = s.vortex.c0, t = s.t;
  const VGrid vg = default_vgrid(kappa, c0, vartheta0);
  const double dv = vg.h();
  const double lo = upsilon_lo(kappa, c0, vartheta0), hi = upsilon_hi(kappa, vartheta0);
  auto grid_over = [dv](double a, double b) { return VGrid{a, a + dv * std::ceil((b - a) / dv), 1 + static_cast<int>(std::ceil((b - a) / dv))}; };

  std::array<EnergyTerm, 5> out;
  out[0] = energy_F(pullback_F(s.omega(), m, vg), t, p);

  const StreamSolution st = solve_stream(s.g, s.rotation());
  const ScaledCutoff Psi = cutoff_psi(kappa, c0, vartheta0);
  out[1] = energy_phi(pullback_stream(st.psi, m, grid_over(lo / 3, 3 * hi)), t, p, Psi);

  const auto prof = m.resample(vg);
  out[2] = energy_scalar(prof.Vstar, vg.lo, dv, Scalar::Vstar, t, p);
  out[4] = energy_scalar(prof.Wstar, vg.lo, dv, Scalar::Wstar, t, p);

  const VGrid wide = grid_over(lo / 9, 9 * hi);
  const auto pw = m.resample(wide);
  const ScaledCutoff Pd = cutoff_psi_dagger(kappa, c0, vartheta0);
  out[3] = energy_scalar(pw.rhostar, wide.lo, dv, Scalar::rhostar, t, p, &Pd);
  return out;
}

SlopeFit decay_fit(std::span<const double> t, std::span<const double> value, double t_a, double t_b) {
  if (t.size() != value.size()) throw std::invalid_argument("decay_fit: size mismatch");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_a || t[i] > t_b) continue;
    if (!(value[i] > 0.0)) throw std::domain_error("decay_fit: nonpositive value in the fit window");
    x.push_back(std::log(t[i]));
    y.push_back(std::log(value[i]));
  }
  const int n = static_cast<int>(x.size());
  if (n < 8) throw std::invalid_argument("decay_fit: fewer than 8 points in the window");
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  SlopeFit f;
  f.n = n;
  f.slope = sxy / sxx;
  double rss = 0.0;
  for (int i = 0; i < n; ++i) rss += std::pow(y[i] - my - f.slope * (x[i] - mx), 2);
  const boost::math::students_t dist(n - 2);
  f.width = boost::math::quantile(boost::math::complement(dist, 0.025)) * std::sqrt(rss / (n - 2) / sxx);
  return f;
}

}  // namespace vortexlab
