#include "vortexlab/gevrey.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace vortexlab {

void GevreyNormSpec::validate() const {
  if (!(lambda > 0.0)) throw std::invalid_argument("Gevrey lambda must be > 0");
  if (!(s > 0.0 && s <= 1.0)) throw std::invalid_argument("Gevrey s must lie in (0,1]");
}

double bump_psi_a(double a, double x) {
  if (!(x > 0.0 && x < 1.0)) return 0.0;
  return std::exp(-(std::pow(x, -a) + std::pow(1.0 - x, -a)));
}

double plateau_cutoff(double a, double rho, double x) {
  if (!(rho >= 0.9 && rho < 1.0)) throw std::invalid_argument("plateau_cutoff: rho must lie in [9/10, 1)");
  if (!(x > 0.0 && x < 1.0)) return 0.0;
  // psi(x) / (psi(x) + psi(x-rho) + psi(x+rho)) written with exponent differences,
  // so deep inside the plateau nothing underflows
  auto u = [a](double y) { return std::pow(y, -a) + std::pow(1.0 - y, -a); };
  const double u0 = u(x);
  double s = 1.0;
  for (double y : {x - rho, x + rho})
    if (y > 0.0 && y < 1.0) s += std::exp(u0 - u(y));
  return 1.0 / s;
}

double plateau_cutoff_complement(double a, double rho, double x) {
  if (!(rho >= 0.9 && rho < 1.0)) throw std::invalid_argument("plateau_cutoff: rho must lie in [9/10, 1)");
  if (!(x > 0.0 && x < 1.0)) return 1.0;
  auto u = [a](double y) { return std::pow(y, -a) + std::pow(1.0 - y, -a); };
  const double u0 = u(x);
  double t = 0.0;  // (psi(x-rho) + psi(x+rho)) / psi(x)
  for (double y : {x - rho, x + rho})
    if (y > 0.0 && y < 1.0) t += std::exp(u0 - u(y));
  return t / (1.0 + t);
}

ScaledCutoff make_cutoff(double a, double supp_lo, double supp_hi, double one_lo, double one_hi) {
  if (!(supp_lo < one_lo && one_lo < one_hi && one_hi < supp_hi))
    throw std::invalid_argument("make_cutoff: need supp_lo < one_lo < one_hi < supp_hi");
  const double w = supp_hi - supp_lo;
  double rho = std::max({0.9, 1.0 - (one_lo - supp_lo) / w, (one_hi - supp_lo) / w});
  if (!(rho < 1.0)) throw std::invalid_argument("make_cutoff: plateau too wide for the support");
  return {a, rho, supp_lo, supp_hi};
}

namespace {

// centred order: m = -n/2 .. n/2-1
int centred(int i, int n) { return (i + n / 2) % n; }

}  // namespace

Spectrum spectrum_of(const PolarField& F) {
  const Grid& g = F.grid();
  Spectrum s;
  s.kmax = F.kmax();
  s.n_xi = g.n_r;
  const double dv = g.h();
  s.dxi = 2.0 * std::numbers::pi / (g.n_r * dv);
  s.xi.resize(g.n_r);
  for (int m = 0; m < g.n_r; ++m) s.xi[m] = (m - g.n_r / 2) * s.dxi;
  s.coef.assign(static_cast<std::size_t>(s.kmax + 1) * s.n_xi, cplx{});
#pragma omp parallel
  {
    std::vector<cplx> buf(g.n_r);
#pragma omp for schedule(static)
    for (int k = 0; k <= s.kmax; ++k) {
      auto row = F.row(k);
      std::copy(row.begin(), row.end(), buf.begin());
      dft_inplace(buf);
      for (int i = 0; i < g.n_r; ++i) s.coef[static_cast<std::size_t>(k) * s.n_xi + centred(i, g.n_r)] = dv * buf[i];
    }
  }
  return s;
}

Spectrum spectrum_of(std::span<const double> gv, double dv) {
  const int n = static_cast<int>(gv.size());
  Spectrum s;
  s.kmax = 0;
  s.n_xi = n;
  s.dxi = 2.0 * std::numbers::pi / (n * dv);
  s.xi.resize(n);
  for (int m = 0; m < n; ++m) s.xi[m] = (m - n / 2) * s.dxi;
  std::vector<cplx> buf(gv.begin(), gv.end());
  dft_inplace(buf);
  s.coef.resize(n);
  const double c = dv / std::sqrt(2.0 * std::numbers::pi);
  for (int i = 0; i < n; ++i) s.coef[centred(i, n)] = c * buf[i];
  return s;
}

namespace {

GevreyNorm weighted(const Spectrum& s, const GevreyNormSpec& spec, bool full_k) {
  spec.validate();
  const double ximax = std::abs(s.xi.front());
  long double total = 0.0L, tail = 0.0L;
  for (int k = 0; k <= s.kmax; ++k) {
    const double mult = (full_k && k > 0) ? 2.0 : 1.0;
    for (int m = 0; m < s.n_xi; ++m) {
      const double xi = s.xi[m];
      const double br = std::sqrt(1.0 + double(k) * k + xi * xi);
      const double w = std::exp(2.0 * spec.lambda * std::pow(br, spec.s));
      const long double c = mult * w * std::norm(s.at(k, m)) * s.dxi;
      total += c;
      if (std::abs(xi) > 0.9 * ximax || (s.kmax > 0 && k > 0.9 * s.kmax)) tail += c;
    }
  }
  GevreyNorm r;
  r.norm = std::sqrt(static_cast<double>(total));
  r.tail_fraction = total > 0 ? static_cast<double>(tail / total) : 0.0;
  r.warning = r.tail_fraction > 1e-3;
  return r;
}

}  // namespace

GevreyNorm gevrey_norm(const PolarField& F, const GevreyNormSpec& spec) {
  return weighted(spectrum_of(F), spec, true);
}

GevreyNorm gevrey_norm(std::span<const double> profile, double dv, const GevreyNormSpec& spec) {
  return weighted(spectrum_of(profile, dv), spec, false);
}

std::vector<double> sample_bump(double a, double dx, double length) {
  // bump centred in a zero-padded window of the given length
  const int n = static_cast<int>(std::llround(length / dx));
  std::vector<double> f(n);
  const double x0 = 0.5 * length - 0.5;
  for (int i = 0; i < n; ++i) f[i] = bump_psi_a(a, i * dx - x0);
  return f;
}

DecayFit verify_gevrey_decay(std::span<const double> samples, double dx) {
  const int n = static_cast<int>(samples.size());
  std::vector<cplx> buf(samples.begin(), samples.end());
  dft_inplace(buf);
  const int nh = n / 2;
  std::vector<double> mag(nh + 1), xi(nh + 1);
  for (int m = 0; m <= nh; ++m) {
    mag[m] = std::abs(buf[m]);
    xi[m] = 2.0 * std::numbers::pi * m / (n * dx);
  }
  const double ref = mag[0];
  DecayFit fit;
  if (!(ref > 0.0)) return fit;
  // upper envelope removes the oscillatory zeros of the transform
  std::vector<double> env(nh + 1);
  double run = 0.0;
  for (int m = nh; m >= 0; --m) env[m] = run = std::max(run, mag[m] / ref);
  int lo = -1, hi = -1;
  for (int m = 1; m <= nh; ++m) {
    if (env[m] < 1e-3 && env[m] > 1e-12) {
      if (lo < 0) lo = m;
      hi = m;
    }
  }
  if (lo < 0 || hi <= lo) return fit;
  std::vector<int> sel;
  for (int i = 0; i < 200; ++i) {
    int m = static_cast<int>(lo * std::pow(double(hi) / lo, i / 199.0));
    if (sel.empty() || m != sel.back()) sel.push_back(m);
  }
  fit.n_points = static_cast<int>(sel.size());
  double best = INFINITY;
  for (double p = 0.2; p <= 2.5 + 1e-12; p += 0.001) {
    // linear least squares for y = c - mu x^p
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int m : sel) {
      const double x = std::pow(xi[m], p), y = std::log(env[m]);
      sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    const double N = static_cast<double>(sel.size());
    const double slope = (N * sxy - sx * sy) / (N * sxx - sx * sx);
    const double c = (sy - slope * sx) / N;
    double res = 0.0;
    for (int m : sel) {
      const double e = c + slope * std::pow(xi[m], p) - std::log(env[m]);
      res += e * e;
    }
    if (res < best) best = res, fit.p = p, fit.mu = -slope;
  }
  fit.accepted = fit.n_points >= 8 && fit.p > 0.0 && fit.p <= 1.0;
  return fit;
}

}  // namespace vortexlab
