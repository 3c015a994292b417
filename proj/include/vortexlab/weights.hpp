#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

namespace vortexlab {

struct WeightParams {
  double delta0 = 0.1;
  double delta = 0.1;
  double delta_prime = 0.01;
  double sigma0 = 0.01;
  double K_const = 1.0;
  void validate() const;
};

enum class Star { NR, R, K };

inline double jb(double x) { return std::sqrt(1.0 + x * x); }
inline double jb(double k, double xi) { return std::sqrt(1.0 + k * k + xi * xi); }

// Breakpoints of the raw weights at one frequency eta > delta^-10.
struct CriticalStructure {
  double eta = 0.0;
  int k0 = 0;
  bool active = false;  // eta > delta^-10
  double t(int l) const;  // t_{l,eta}; t(0) = 2 eta
  // interval index l with t in I_l = [t_l, t_{l-1}], 0 if t >= 2 eta, k0 + 1 if t < t_{k0}
  int interval(double t) const;
  static CriticalStructure of(double eta, const WeightParams& p);
};

double lambda_of(double t, const WeightParams& p);

// Raw weights.  All values are carried as logarithms; w underflows long before
// the frequencies of interest.
double log_w(Star s, int k, double t, double eta, const WeightParams& p);
double w_raw(Star s, int k, double t, double eta, const WeightParams& p);

// All three raw weights at one eta > 0, with the prefix sums computed once.
class RawWeights {
 public:
  RawWeights(double eta, const WeightParams& p);
  const CriticalStructure& cs() const { return cs_; }
  double log_nr(double t) const;
  double log_r(double t) const;
  double log_k(int k, double t) const;  // for eta > 0
  // piece formulas on I_l in the offset s = t - eta/l (s >= 0: upper branch);
  // inner = the w_R correction is applied
  double piece_nr(int l, double s) const;
  double piece_r(int l, bool inner, double s) const;
  double offset_above(int l) const;  // t_{l-1} - eta/l
  double offset_below(int l) const;  // t_l - eta/l
  double half_width(int l) const;    // eta / (8 l^2)
  double piece_low(double t) const;  // t <= t_{k0}
  double log_w_at_tk0() const;

 private:
  WeightParams p_;
  CriticalStructure cs_;
  std::vector<double> S_;  // S_l = -log w_NR(t_l)
};

// Mollification length L_{delta'}(t, xi) and the mollifier phi
double mollifier_length(double t, double xi, const WeightParams& p);
double mollifier_phi(double x);
double mollifier_mass(double rel_tol = 1e-10);  // d0, at the quadrature tolerance used

double log_b(Star s, int k, double t, double xi, const WeightParams& p, double rel_tol = 1e-10);
double b_mollified(Star s, int k, double t, double xi, const WeightParams& p, double rel_tol = 1e-10);

double log_A(Star s, int k, double t, double xi, const WeightParams& p);
// with lambda(t) supplied; b = 1 without quadrature where the window lies in |xi| <= delta^-10
double log_A(Star s, int k, double t, double xi, const WeightParams& p, double lam);
double weight_A(Star s, int k, double t, double xi, const WeightParams& p);
// d/dt log A by centred differences, step 1e-4 max(1, t) (one-sided at t < step)
double dlogA_dt(Star s, int k, double t, double xi, const WeightParams& p);

struct MuWeights {
  double mu_sharp = 0.0, mu_star = 0.0, mu_k = 0.0, mu_R = 0.0;
};
double mu_sharp(double t, double xi, const WeightParams& p);
double mu_star(double t, double xi, const WeightParams& p);
MuWeights mu_weights(double t, double xi, int k, const WeightParams& p);

struct WeightSweep {
  std::vector<double> deltas{0.5, 0.1};
  std::vector<double> eta_factors{2.0, 10.0};  // eta = factor * delta^-10
  int n_t = 64;                                // log-spaced in [0, 4 eta]
  int k_min = -3, k_max = 3;
  std::vector<double> compare_offsets{1.0, 10.0, 100.0, 1000.0};
};

// Runs the exact property checks and measures the empirical constants.
nlohmann::json weight_selftest(const WeightParams& base, const WeightSweep& sweep);
// Entries of report["empirical_constants"] more than a factor `ratio` away from the baseline.
std::vector<std::string> compare_to_baseline(const nlohmann::json& report, const nlohmann::json& baseline,
                                             double ratio = 2.0);

}  // namespace vortexlab
