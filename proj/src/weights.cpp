#include "vortexlab/weights.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "vortexlab/gevrey.hpp"

namespace vortexlab {

using nlohmann::json;

void WeightParams::validate() const {
  if (!(delta0 > 0.0 && delta0 <= 0.125)) throw std::invalid_argument("delta0 must lie in (0, 1/8]");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  if (!(delta_prime > 0.0 && delta_prime <= delta)) throw std::invalid_argument("delta_prime must lie in (0, delta]");
  if (!(sigma0 > 0.0 && sigma0 <= 0.1)) throw std::invalid_argument("sigma0 must lie in (0, 0.1]");
  if (!(K_const >= 1.0)) throw std::invalid_argument("K_const must be >= 1");
}

namespace {

double threshold(const WeightParams& p) { return std::pow(p.delta, -10.0); }

double coef_a(int j) { return j == 1 ? 1.0 : 1.0 / (2.0 * j * (j - 1.0)); }
double coef_b(int j) { return 1.0 / (2.0 * j * (j + 1.0)); }

// -log of the drop of w_NR across the interval I_j: offsets of t_{j-1} and t_j from eta/j
// are eta a_j and eta b_j.  Every formula below goes through the same expressions so that
// adjacent pieces agree bit for bit at the breakpoints.
double log_a(int j, double eta, double d2) { return std::log1p(d2 * (eta * coef_a(j))); }
double log_b_(int j, double eta, double d2) { return std::log1p(d2 * (eta * coef_b(j))); }
double drop(int j, double eta, double d2, double d0) { return d0 * log_a(j, eta, d2) + (1.0 + d0) * log_b_(j, eta, d2); }

double exact_prefix(int l, double eta, double d2, double d0) {
  double s = 0.0;
  for (int j = 1; j <= l; ++j) s = s + drop(j, eta, d2, d0);
  return s;
}

// w_NR on I_l as a function of the offset s = t - eta/l, given S_{l-1}
double nr_formula(int l, double s, double eta, double Sprev, const WeightParams& p) {
  const double d2 = p.delta * p.delta, d0 = p.delta0;
  const double la = log_a(l, eta, d2);
  if (!std::signbit(s)) return -Sprev + d0 * (std::log1p(d2 * s) - la);
  return -(Sprev + (d0 * la + (1.0 + d0) * std::log1p(d2 * -s)));
}

double half_width(int l, double eta) { return eta / (8.0 * l * l); }

double r_correction(int l, bool inner, double s, double eta, const WeightParams& p) {
  if (!inner) return 0.0;
  const double d2 = p.delta * p.delta;
  return std::log1p(d2 * std::abs(s)) - std::log1p(d2 * half_width(l, eta));
}

// log w for eta > delta^-10, k already mapped to eta > 0.  prefix(l) = S_l.
template <class Prefix>
double log_w_pos(Star s, int k, double t, double eta, const CriticalStructure& cs, const WeightParams& p,
                 Prefix&& prefix) {
  if (t >= 2.0 * eta) return 0.0;
  const int l = cs.interval(t);
  if (l > cs.k0) {
    const double beta = 1.0 - t / cs.t(cs.k0);
    return beta * (-p.delta * std::sqrt(eta)) + (1.0 - beta) * (-prefix(cs.k0));
  }
  const double off = t - eta / l;
  const double nr = nr_formula(l, off, eta, prefix(l - 1), p);
  bool resonant = s == Star::R || (s == Star::K && k >= 1 && k <= cs.k0 && k == l);
  return resonant ? nr + r_correction(l, std::abs(off) <= half_width(l, eta), off, eta, p) : nr;
}

// sign conventions: w_NR, w_R even in eta; w_k(eta) = w_{-k}(-eta)
bool normalise(Star s, int& k, double& eta) {
  if (eta < 0.0) {
    eta = -eta;
    if (s == Star::K) k = -k;
    return true;
  }
  return false;
}

}  // namespace

double CriticalStructure::t(int l) const {
  if (l == 0) return 2.0 * eta;
  return 0.5 * (eta / (l + 1.0) + eta / l);
}

int CriticalStructure::interval(double tt) const {
  if (tt >= 2.0 * eta) return 0;
  if (tt < t(k0)) return k0 + 1;
  int l = std::clamp(static_cast<int>(eta / tt), 1, k0);
  while (l < k0 && tt < t(l)) ++l;
  while (l > 1 && tt > t(l - 1)) --l;
  return l;
}

CriticalStructure CriticalStructure::of(double eta, const WeightParams& p) {
  CriticalStructure cs;
  cs.eta = std::abs(eta);
  cs.active = cs.eta > threshold(p);
  if (cs.active) cs.k0 = static_cast<int>(std::floor(std::sqrt(p.delta * p.delta * p.delta * cs.eta)));
  return cs;
}

// ---- lambda ---------------------------------------------------------------

namespace {

struct LambdaCache {
  std::mutex m;
  std::map<double, std::vector<double>> cum;  // sigma0 -> int_0^{2^j}, j = -1 (value at 1), 0, 1, ...
};

double bracket_integral(double a, double b, double sigma) {
  auto f = [sigma](double s) { return std::pow(1.0 + s * s, -0.5 * (1.0 + sigma)); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 0);
}

// int_0^t <s>^{-1-sigma} ds
double bracket_primitive(double t, double sigma) {
  static LambdaCache cache;
  if (t <= 1.0) return bracket_integral(0.0, t, sigma);
  // nodes 1, 2, 4, ...: cum[j] = int_0^{2^j}
  const int J = static_cast<int>(std::floor(std::log2(t)));
  std::vector<double> local;
  {
    std::lock_guard<std::mutex> lk(cache.m);
    auto& v = cache.cum[sigma];
    if (v.empty()) v.push_back(bracket_integral(0.0, 1.0, sigma));
    while (static_cast<int>(v.size()) <= J + 1) {
      const double a = std::ldexp(1.0, static_cast<int>(v.size()) - 1);
      v.push_back(v.back() + bracket_integral(a, 2.0 * a, sigma));
    }
    local.assign(v.begin(), v.begin() + J + 1);
  }
  const double a = std::ldexp(1.0, J);
  return local[J] + (t > a ? bracket_integral(a, t, sigma) : 0.0);
}

}  // namespace

double lambda_of(double t, const WeightParams& p) {
  if (t < 0.0) throw std::invalid_argument("lambda_of: t must be >= 0");
  return 1.5 * p.delta0 - p.delta0 * p.sigma0 * p.sigma0 * bracket_primitive(t, p.sigma0);
}

// ---- raw weights ----------------------------------------------------------

double log_w(Star s, int k, double t, double eta, const WeightParams& p) {
  if (t < 0.0) throw std::invalid_argument("log_w: t must be >= 0");
  normalise(s, k, eta);
  if (eta <= threshold(p)) return 0.0;
  const auto cs = CriticalStructure::of(eta, p);
  const double d2 = p.delta * p.delta;
  return log_w_pos(s, k, t, eta, cs, p, [&](int l) { return exact_prefix(l, eta, d2, p.delta0); });
}

double w_raw(Star s, int k, double t, double eta, const WeightParams& p) { return std::exp(log_w(s, k, t, eta, p)); }

RawWeights::RawWeights(double eta, const WeightParams& p) : p_(p), cs_(CriticalStructure::of(eta, p)) {
  S_.assign(cs_.k0 + 1, 0.0);
  const double d2 = p.delta * p.delta;
  for (int j = 1; j <= cs_.k0; ++j) S_[j] = S_[j - 1] + drop(j, cs_.eta, d2, p.delta0);
}

double RawWeights::log_nr(double t) const {
  if (!cs_.active) return 0.0;
  return log_w_pos(Star::NR, 0, t, cs_.eta, cs_, p_, [&](int l) { return S_[l]; });
}
double RawWeights::log_r(double t) const {
  if (!cs_.active) return 0.0;
  return log_w_pos(Star::R, 0, t, cs_.eta, cs_, p_, [&](int l) { return S_[l]; });
}
double RawWeights::log_k(int k, double t) const {
  if (!cs_.active) return 0.0;
  return log_w_pos(Star::K, k, t, cs_.eta, cs_, p_, [&](int l) { return S_[l]; });
}
double RawWeights::piece_nr(int l, double s) const { return nr_formula(l, s, cs_.eta, S_[l - 1], p_); }
double RawWeights::piece_r(int l, bool inner, double s) const {
  return piece_nr(l, s) + r_correction(l, inner, s, cs_.eta, p_);
}
double RawWeights::offset_above(int l) const { return cs_.eta * coef_a(l); }
double RawWeights::offset_below(int l) const { return -(cs_.eta * coef_b(l)); }
double RawWeights::half_width(int l) const { return vortexlab::half_width(l, cs_.eta); }
double RawWeights::piece_low(double t) const {
  const double beta = 1.0 - t / cs_.t(cs_.k0);
  return beta * (-p_.delta * std::sqrt(cs_.eta)) + (1.0 - beta) * (-S_[cs_.k0]);
}
double RawWeights::log_w_at_tk0() const { return -S_[cs_.k0]; }

// ---- mollification --------------------------------------------------------

namespace {

const ScaledCutoff& phi_cutoff() {
  static const ScaledCutoff c = make_cutoff(1.0, -1.6, 1.6, -1.25, 1.25);
  return c;
}
// end of the plateau of phi (>= 5/4)
double phi_plateau_end() {
  const auto& c = phi_cutoff();
  return c.lo + c.rho * (c.hi - c.lo);
}

// int_0^{8/5} f(x) dx, split at the plateau edge
template <class F>
double half_window_integral(F&& f, double rel_tol) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  const double xp = phi_plateau_end();
  double err = 0.0;
  return GK::integrate(f, 0.0, xp, 12, rel_tol, &err) + GK::integrate(f, xp, 1.6, 12, rel_tol, &err);
}

// S_l(c) near a centre c0 by a cubic Taylor expansion of each prefix sum.
class PrefixExpansion {
 public:
  PrefixExpansion(double c0, int lmax, double d2, double d0) : c0_(c0), d2_(d2), d0_(d0) {
    S_.assign(std::max(lmax, 0) + 1, {0.0, 0.0, 0.0, 0.0});
    for (int j = 1; j <= lmax; ++j) {
      const double a = coef_a(j), b = coef_b(j);
      const double qa = a / (1.0 + c0 * a), qb = b / (1.0 + c0 * b);
      std::array<double, 4> d{d0 * std::log1p(c0 * a) + (1 + d0) * std::log1p(c0 * b), d0 * qa + (1 + d0) * qb, -(d0 * qa * qa + (1 + d0) * qb * qb),
                              2.0 * (d0 * qa * qa * qa + (1 + d0) * qb * qb * qb)};
      for (int q = 0; q < 4; ++q) S_[j][q] = S_[j - 1][q] + d[q];
    }
  }
  double operator()(int l, double c) const {
    const double e = (c - c0_) / c0_;
    const int lmax = static_cast<int>(S_.size()) - 1;
    if (l > lmax || std::abs(e) > 1e-3 || l * e * e * e * e > 1e-16) return exact_prefix(l, c / d2_, d2_, d0_);
    const double D = c - c0_;
    const auto& s = S_[l];
    return s[0] + D * (s[1] + D * (0.5 * s[2] + D * s[3] / 6.0));
  }

 private:
  double c0_, d2_, d0_;
  std::vector<std::array<double, 4>> S_;
};

}  // namespace

double mollifier_length(double t, double xi, const WeightParams& p) {
  const double b = jb(xi);
  return 1.0 + p.delta_prime * b / (std::sqrt(b) + p.delta_prime * t);
}

double mollifier_phi(double x) { return phi_cutoff()(x); }

double mollifier_mass(double rel_tol) {
  return half_window_integral([](double x) { return 2.0 * mollifier_phi(x); }, rel_tol);
}

double log_b(Star s, int k, double t, double xi, const WeightParams& p, double rel_tol) {
  if (t < 0.0) throw std::invalid_argument("log_b: t must be >= 0");
  const double L = mollifier_length(t, xi, p);
  const double thr = threshold(p);
  const double d2 = p.delta * p.delta;
  const double reach = std::abs(xi) + 1.6 * L;
  const auto cs_far = CriticalStructure::of(reach, p);
  int lmax = 0;
  if (cs_far.active) lmax = std::min(cs_far.k0, cs_far.interval(t)) + 2;
  const PrefixExpansion prefix(d2 * std::max(std::abs(xi), thr), lmax, d2, p.delta0);

  auto lw = [&](double rho) {
    int kk = k;
    double eta = rho;
    normalise(s, kk, eta);
    if (eta <= thr) return 0.0;
    const auto cs = CriticalStructure::of(eta, p);
    const double c = d2 * eta;
    return log_w_pos(s, kk, t, eta, cs, p, [&](int l) { return prefix(l, c); });
  };
  double m = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 32; ++i) {
    const double x = 1.6 * i / 32.0;
    m = std::max({m, lw(xi - L * x), lw(xi + L * x)});
  }
  auto f = [&](double x) { return (std::exp(lw(xi - L * x) - m) + std::exp(lw(xi + L * x) - m)) * mollifier_phi(x); };
  const double I = half_window_integral(f, rel_tol);
  return m + std::log(I / mollifier_mass(rel_tol));
}

double b_mollified(Star s, int k, double t, double xi, const WeightParams& p, double rel_tol) {
  return std::exp(log_b(s, k, t, xi, p, rel_tol));
}

double log_A(Star s, int k, double t, double xi, const WeightParams& p) {
  return log_A(s, k, t, xi, p, lambda_of(t, p));
}

double log_A(Star s, int k, double t, double xi, const WeightParams& p, double lam) {
  const double sd = std::sqrt(p.delta);
  // w = 1 on the whole window: b = 1
  const bool flat = std::abs(xi) + 1.6 * mollifier_length(t, xi, p) <= threshold(p);
  const double lb = flat ? 0.0 : log_b(s, k, t, xi, p);
  if (s != Star::K) return (lam + sd) * std::sqrt(jb(xi)) - lb;
  const double u = sd * std::sqrt(jb(xi)) - lb, v = sd * std::sqrt(std::abs(static_cast<double>(k)));
  const double hi = std::max(u, v);
  return lam * std::sqrt(jb(k, xi)) + hi + std::log1p(std::exp(std::min(u, v) - hi));
}

double weight_A(Star s, int k, double t, double xi, const WeightParams& p) { return std::exp(log_A(s, k, t, xi, p)); }

double dlogA_dt(Star s, int k, double t, double xi, const WeightParams& p) {
  const double h = 1e-4 * std::max(1.0, t);
  if (t < h) return (log_A(s, k, t + h, xi, p) - log_A(s, k, t, xi, p)) / h;
  return (log_A(s, k, t + h, xi, p) - log_A(s, k, t - h, xi, p)) / (2.0 * h);
}

// ---- mu weights -----------------------------------------------------------

double mu_sharp(double t, double xi, const WeightParams& p) {
  const double x = std::abs(xi);
  const double d2 = p.delta * p.delta;
  if (x <= threshold(p)) return 0.0;
  if (t > 2.0 * x) return 0.0;
  const auto cs = CriticalStructure::of(x, p);
  const int l = cs.interval(t);
  if (l > cs.k0) return d2;
  if (l == 0) return d2 / (1.0 + d2 * std::abs(t - x));  // t = 2|xi| closes I_1
  return d2 / (1.0 + d2 * std::abs(t - x / l));
}

double mu_star(double t, double xi, const WeightParams& p) {
  const double L = mollifier_length(t, xi, p);
  auto f = [&](double x) { return (mu_sharp(t, xi - L * x, p) + mu_sharp(t, xi + L * x, p)) * mollifier_phi(x); };
  return half_window_integral(f, 1e-10) / mollifier_mass(1e-10);
}

MuWeights mu_weights(double t, double xi, int k, const WeightParams& p) {
  MuWeights m;
  m.mu_sharp = mu_sharp(t, xi, p);
  m.mu_star = mu_star(t, xi, p);
  const double decay = std::pow(jb(t), 1.0 + p.sigma0);
  const double e = std::sqrt(p.delta) * (std::sqrt(std::abs(static_cast<double>(k))) - std::sqrt(jb(xi))) +
                   log_b(Star::K, k, t, xi, p);
  // 1 / (1 + e^e) without overflow
  const double damp = e > 0 ? std::exp(-e) / (1.0 + std::exp(-e)) : 1.0 / (1.0 + std::exp(e));
  m.mu_k = std::sqrt(jb(k, xi)) / decay + m.mu_star * damp;
  m.mu_R = std::sqrt(jb(xi)) / decay + m.mu_star;
  return m;
}

// ---- selftest -------------------------------------------------------------

namespace {

struct Check {
  std::string name;
  long checked = 0;
  long violations = 0;
  json examples = json::array();
  void test(bool ok, const json& where) {
    ++checked;
    if (!ok) {
      ++violations;
      if (examples.size() < 5) examples.push_back(where);
    }
  }
  json to_json() const { return {{"checked", checked}, {"violations", violations}, {"examples", examples}}; }
};

const char* star_name(Star s) { return s == Star::NR ? "NR" : s == Star::R ? "R" : "k"; }

json where(Star s, int k, double t, double xi) { return {{"star", star_name(s)}, {"k", k}, {"t", t}, {"xi", xi}}; }

std::vector<double> t_ladder(double eta, int n) {
  std::vector<double> t{0.0};
  const double lo = 1.0, hi = 4.0 * eta;
  for (int i = 0; i < n - 1; ++i) t.push_back(lo * std::pow(hi / lo, i / (n - 2.0)));
  return t;
}

json run_delta(WeightParams p, const WeightSweep& sw) {
  std::map<std::string, Check> C;
  auto chk = [&](const std::string& n) -> Check& {
    auto& c = C[n];
    c.name = n;
    return c;
  };
  const double thr = threshold(p);
  const double d = p.delta;
  std::vector<double> etas;
  for (double f : sw.eta_factors) etas.push_back(f * thr);

  struct Stars {
    Star s;
    int k;
  };
  std::vector<Stars> stars{{Star::NR, 0}, {Star::R, 0}};
  for (int k = sw.k_min; k <= sw.k_max; ++k) stars.push_back({Star::K, k});

  double cmp_log = -std::numeric_limits<double>::infinity();
  double rk_min = INFINITY, rk_max = 0, rR_min = INFINITY, rR_max = 0;

  for (double eta0 : etas) {
    const auto ts = t_ladder(eta0, sw.n_t);
    for (double eta : {eta0, -eta0}) {
      const RawWeights rw(eta, p);  // uses |eta|
      // raw ordering, monotonicity, symmetry
      for (const auto& st : stars) {
        double prev = -INFINITY, prev_t = -1.0;
        for (double t : ts) {
          const double lw = log_w(st.s, st.k, t, eta, p);
          chk("w_monotone").test(lw >= prev, where(st.s, st.k, t, eta));
          // the same property restricted to t beyond the first critical time t_{k0}
          if (prev_t > CriticalStructure::of(eta, p).t(CriticalStructure::of(eta, p).k0))
            chk("w_monotone_above_tk0").test(lw >= prev, where(st.s, st.k, t, eta));
          prev = lw;
          prev_t = t;
          chk("w_range").test(lw <= 0.0 && std::isfinite(lw), where(st.s, st.k, t, eta));
          if (st.s == Star::K) {
            chk("symmetry").test(lw == log_w(Star::K, -st.k, t, -eta, p), where(st.s, st.k, t, eta));
            const double nr = log_w(Star::NR, 0, t, eta, p), r = log_w(Star::R, 0, t, eta, p);
            chk("raw_ordering").test(r <= lw && lw <= nr && nr <= 0.0, where(st.s, st.k, t, eta));
            const int kk = eta > 0 ? st.k : -st.k;
            const auto cs = CriticalStructure::of(eta, p);
            if (st.k * eta <= 0 || cs.interval(t) != kk) chk("w_k_equals_w_NR_off_resonance").test(lw == nr, where(st.s, st.k, t, eta));
          } else {
            chk("symmetry").test(lw == log_w(st.s, 0, t, -eta, p), where(st.s, 0, t, eta));
          }
        }
      }
      // b and A along the ladder at xi = eta
      const double xi = eta;
      std::vector<double> prevA(stars.size(), INFINITY);
      double prev_tA = -1.0;
      for (double t : ts) {
        const double lbR = log_b(Star::R, 0, t, xi, p), lbNR = log_b(Star::NR, 0, t, xi, p);
        chk("ordering_lower").test(-d * std::sqrt(std::abs(xi)) <= lbR + 1e-12, where(Star::R, 0, t, xi));
        chk("ordering_chain").test(lbR <= lbNR + 1e-9 && lbNR <= 1e-12, where(Star::NR, 0, t, xi));
        for (std::size_t i = 0; i < stars.size(); ++i) {
          const auto& st = stars[i];
          if (st.s == Star::K) {
            const double lbk = log_b(Star::K, st.k, t, xi, p);
            chk("ordering_chain").test(lbR <= lbk + 1e-9 && lbk <= lbNR + 1e-9, where(st.s, st.k, t, xi));
          }
          const double lA = log_A(st.s, st.k, t, xi, p);
          chk("A_nonincreasing").test(lA <= prevA[i] + 1e-12 * std::abs(lA), where(st.s, st.k, t, xi));
          if (prev_tA > CriticalStructure::of(xi, p).t(CriticalStructure::of(xi, p).k0))
            chk("A_nonincreasing_above_tk0").test(lA <= prevA[i] + 1e-12 * std::abs(lA), where(st.s, st.k, t, xi));
          prevA[i] = lA;
          if (st.s == Star::K) {
            chk("A_k_floor").test(lA >= 1.1 * p.delta0 * std::sqrt(jb(st.k, xi)), where(st.s, st.k, t, xi));
            chk("symmetry_A").test(lA == log_A(Star::K, -st.k, t, -xi, p), where(st.s, st.k, t, xi));
            // mu_k vs |d_t log A_k|
            const double r = mu_weights(t, xi, st.k, p).mu_k / std::abs(dlogA_dt(st.s, st.k, t, xi, p));
            if (std::isfinite(r)) rk_min = std::min(rk_min, r), rk_max = std::max(rk_max, r);
          } else {
            chk("A_R_ge_A_NR").test(log_A(Star::R, 0, t, xi, p) >= log_A(Star::NR, 0, t, xi, p) - 1e-9,
                                    where(st.s, 0, t, xi));
            if (st.s == Star::R) {
              const double r = mu_weights(t, xi, 0, p).mu_R / std::abs(dlogA_dt(Star::R, 0, t, xi, p));
              if (std::isfinite(r)) rR_min = std::min(rR_min, r), rR_max = std::max(rR_max, r);
            }
          }
        }
        // mu cases
        const double ms = mu_sharp(t, xi, p);
        const auto cs = CriticalStructure::of(xi, p);
        double expect;
        if (t > 2.0 * std::abs(xi)) expect = 0.0;
        else if (t < cs.t(cs.k0)) expect = d * d;
        else {
          const int l = std::max(1, cs.interval(t));
          expect = d * d / (1.0 + d * d * std::abs(t - std::abs(xi) / l));
        }
        chk("mu_sharp_cases").test(ms == expect && ms == mu_sharp(t, -xi, p), where(Star::R, 0, t, xi));
        const auto mw = mu_weights(t, xi, 0, p);
        chk("mu_ranges").test(mw.mu_sharp >= 0 && mw.mu_sharp <= d * d &&
                                  mw.mu_R >= std::sqrt(jb(xi)) / std::pow(jb(t), 1 + p.sigma0),
                              where(Star::R, 0, t, xi));
        prev_tA = t;
      }
      // low frequencies: mu_sharp = 0, w = 1, b = 1
      for (double t : ts) {
        const double x = 0.5 * thr * (eta > 0 ? 1 : -1);
        chk("mu_sharp_cases").test(mu_sharp(t, x, p) == 0.0, where(Star::R, 0, t, x));
        chk("w_low_frequency").test(log_w(Star::NR, 0, t, x, p) == 0.0 && log_w(Star::K, 1, t, x, p) == 0.0,
                                    where(Star::NR, 0, t, x));
      }
      const double xs = 0.5 * thr;
      chk("b_constant").test(log_b(Star::NR, 0, 0.0, xs, p) == 0.0 && log_b(Star::K, 2, 10.0, -xs, p) == 0.0,
                             where(Star::NR, 0, 0.0, xs));

      // continuity at every breakpoint, from the piece formulas on each side (offset coordinates)
      const auto& cs = rw.cs();
      auto jump = [&](double a, double b) { return std::abs(std::exp(a - std::max(a, b)) - std::exp(b - std::max(a, b))); };
      for (int l = 1; l <= cs.k0; ++l) {
        const double tl1 = cs.t(l - 1);
        // t_{l-1}: top of I_l against the bottom of I_{l-1} (or w = 1 at 2 eta)
        const double above = l == 1 ? 0.0 : rw.piece_nr(l - 1, rw.offset_below(l - 1));
        chk("continuity").test(jump(rw.piece_nr(l, rw.offset_above(l)), above) < 1e-12, where(Star::NR, l, tl1, cs.eta));
        // eta / l: the two branches of w_NR (and w_R)
        chk("continuity").test(jump(rw.piece_nr(l, -0.0), rw.piece_nr(l, 0.0)) < 1e-12 &&
                                   jump(rw.piece_r(l, true, -0.0), rw.piece_r(l, true, 0.0)) < 1e-12,
                               where(Star::NR, l, cs.eta / l, cs.eta));
        // edges of the resonant window
        const double h = rw.half_width(l);
        for (double sb : {-h, h})
          chk("continuity").test(jump(rw.piece_r(l, true, sb), rw.piece_r(l, false, sb)) < 1e-12,
                                 where(Star::R, l, cs.eta / l + sb, cs.eta));
      }
      const double tk0 = cs.t(cs.k0);
      chk("continuity").test(jump(rw.piece_low(tk0), rw.piece_nr(cs.k0, rw.offset_below(cs.k0))) < 1e-12,
                             where(Star::NR, cs.k0, tk0, cs.eta));

      // comparison ratios w(eta) / w(xi) near the sweep frequency
      for (double t : ts)
        for (double off : sw.compare_offsets)
          for (double sgn : {-1.0, 1.0}) {
            const double xi2 = eta + sgn * off;
            const double bound = std::sqrt(d) * std::sqrt(off);
            for (int k = sw.k_min; k <= sw.k_max; ++k) {
              const double a = log_w(Star::NR, 0, t, xi2, p) - log_w(Star::NR, 0, t, eta, p);
              const double b = log_w(Star::R, 0, t, xi2, p) - log_w(Star::R, 0, t, eta, p);
              const double c = log_w(Star::K, k, t, xi2, p) - log_w(Star::K, k, t, eta, p);
              const double hi = std::max({a, b, c});
              const double lsum = hi + std::log(std::exp(a - hi) + std::exp(b - hi) + std::exp(c - hi));
              cmp_log = std::max(cmp_log, lsum - bound);
            }
          }
    }
  }

  // window bound on sampled eta
  for (int i = 0; i < 24; ++i) {
    const double eta = thr * 1.01 * std::pow(100.0 / 1.01, i / 23.0);
    const RawWeights rw(eta, p);
    const double lX = -std::pow(d, 1.5) * std::log(1.0 / d) * std::sqrt(eta);
    const double lw = rw.log_w_at_tk0();
    chk("window_bound").test(4.0 * lX <= lw && lw <= 0.25 * lX, {{"eta", eta}, {"log_w", lw}, {"log_X", lX}});
  }
  for (double eta : etas) {
    const RawWeights rw(eta, p);
    const double lX = -std::pow(d, 1.5) * std::log(1.0 / d) * std::sqrt(eta);
    const double lw = rw.log_w_at_tk0();
    chk("window_bound").test(4.0 * lX <= lw && lw <= 0.25 * lX, {{"eta", eta}, {"log_w", lw}, {"log_X", lX}});
  }

  // lambda
  {
    double prev = INFINITY;
    for (double t : t_ladder(etas.back(), sw.n_t)) {
      const double l = lambda_of(t, p);
      chk("lambda").test(l < prev && l > p.delta0 && l <= 1.5 * p.delta0, {{"t", t}, {"lambda", l}});
      prev = l;
    }
  }

  json props = json::object();
  long total = 0;
  for (auto& [n, c] : C) {
    props[n] = c.to_json();
    total += c.violations;
  }
  json consts = {{"comparison_w_ratio", std::exp(cmp_log)},
                 {"mu_k_over_dlogA_min", rk_min},
                 {"mu_k_over_dlogA_max", rk_max},
                 {"mu_R_over_dlogA_min", rR_min},
                 {"mu_R_over_dlogA_max", rR_max}};
  return {{"params",
           {{"delta0", p.delta0}, {"delta", p.delta}, {"delta_prime", p.delta_prime}, {"sigma0", p.sigma0}}},
          {"etas", etas},
          {"n_t", sw.n_t},
          {"k_range", {sw.k_min, sw.k_max}},
          {"properties", props},
          {"violations", total},
          {"empirical_constants", consts}};
}

}  // namespace

json weight_selftest(const WeightParams& base, const WeightSweep& sweep) {
  const auto t0 = std::chrono::steady_clock::now();
  json out = {{"schema", 1}, {"sweeps", json::array()}};
  long total = 0;
  for (double d : sweep.deltas) {
    WeightParams p = base;
    p.delta = d;
    p.delta_prime = d / 10.0;
    p.validate();
    auto r = run_delta(p, sweep);
    total += r["violations"].get<long>();
    out["sweeps"].push_back(r);
  }
  out["violations_total"] = total;
  out["passed"] = total == 0;
  out["runtime_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

std::vector<std::string> compare_to_baseline(const json& report, const json& baseline, double ratio) {
  std::vector<std::string> bad;
  const auto& a = report.at("sweeps");
  const auto& b = baseline.at("sweeps");
  if (a.size() != b.size()) {
    bad.push_back("sweep count differs from baseline");
    return bad;
  }
  for (std::size_t i = 0; i < a.size(); ++i)
    for (auto& [name, v] : b[i].at("empirical_constants").items()) {
      const std::string tag = "delta=" + std::to_string(a[i]["params"]["delta"].get<double>()) + ":" + name;
      if (!a[i]["empirical_constants"].contains(name)) {
        bad.push_back(tag + " missing");
        continue;
      }
      const double x = a[i]["empirical_constants"][name].get<double>(), y = v.get<double>();
      if (!(x > 0 && y > 0) || x > ratio * y || y > ratio * x) bad.push_back(tag);
    }
  return bad;
}

}  // namespace vortexlab
