#pragma once

#include <span>
#include <vector>

#include "vortexlab/grid_fields.hpp"

namespace vortexlab {

struct GevreyNormSpec {
  double lambda = 0.1;
  double s = 0.5;
  void validate() const;
};

double bump_psi_a(double a, double x);
double plateau_cutoff(double a, double rho, double x);
// 1 - plateau_cutoff, accurate where the cutoff rounds to 1
double plateau_cutoff_complement(double a, double rho, double x);

// Plateau cutoff rescaled from [0,1] to [lo, hi].
struct ScaledCutoff {
  double a = 1.0, rho = 0.9, lo = 0.0, hi = 1.0;
  double operator()(double x) const { return plateau_cutoff(a, rho, (x - lo) / (hi - lo)); }
};
// Smallest-transition cutoff supported in [supp_lo, supp_hi] and equal to 1 on [one_lo, one_hi].
ScaledCutoff make_cutoff(double a, double supp_lo, double supp_hi, double one_lo, double one_hi);

// Unitary transform of a field sampled on a uniform v-grid, extended by zero:
//   F~(k, xi) = dv * sum_j F_k(v_j) e^{-i xi (v_j - v_0)},  xi_m = 2 pi m / (n_v dv),
// where F(z,v) = sum_k F_k(v) e^{ikz}.  With this convention
//   sum_{k in Z} sum_m |F~|^2 dxi = int_T int |F|^2 dz dv.
struct Spectrum {
  int kmax = 0;
  int n_xi = 0;
  double dxi = 0.0;
  std::vector<double> xi;     // centred, ascending
  std::vector<cplx> coef;     // (k, m), k = 0..kmax
  cplx at(int k, int m) const { return coef[static_cast<std::size_t>(k) * n_xi + m]; }
};

Spectrum spectrum_of(const PolarField& F);
// 1D profile: g~(xi) = dv/sqrt(2 pi) * sum_j g(v_j) e^{-i xi (v_j - v_0)}
Spectrum spectrum_of(std::span<const double> g, double dv);

struct GevreyNorm {
  double norm = 0.0;
  double tail_fraction = 0.0;  // weighted content in the outer 10% of retained frequencies
  bool warning = false;        // tail_fraction > 1e-3
};

// field on (z, v): PolarField whose radial axis is v
GevreyNorm gevrey_norm(const PolarField& F, const GevreyNormSpec& spec);
GevreyNorm gevrey_norm(std::span<const double> profile, double dv, const GevreyNormSpec& spec);

struct DecayFit {
  double p = 0.0;       // fitted exponent in log|f~| ~ c - mu |xi|^p
  double mu = 0.0;
  int n_points = 0;
  bool accepted = false;  // p in (0,1] with enough points: Gevrey-type decay
};

// samples on a uniform grid with spacing dx (zero outside)
DecayFit verify_gevrey_decay(std::span<const double> samples, double dx);
std::vector<double> sample_bump(double a, double dx, double length);

}  // namespace vortexlab
