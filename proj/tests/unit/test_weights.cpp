#include <doctest.h>

#include <cmath>
#include <random>

#include "vortexlab/weights.hpp"

using namespace vortexlab;

namespace {

WeightParams params(double delta) {
  WeightParams p;
  p.delta = delta;
  p.delta_prime = delta / 10;
  return p;
}

// straight recursion in t, interval by interval, no prefix sums
double naive_log_w(Star s, int k, double t, double eta, const WeightParams& p) {
  eta = std::abs(eta);
  const double d2 = p.delta * p.delta;
  if (eta <= std::pow(p.delta, -10) || t >= 2 * eta) return 0.0;
  const int k0 = static_cast<int>(std::floor(std::sqrt(p.delta * p.delta * p.delta * eta)));
  auto tc = [&](int l) { return l == 0 ? 2 * eta : 0.5 * (eta / (l + 1) + eta / l); };
  double L = 0.0;  // log w_NR(t_{l-1})
  for (int l = 1; l <= k0; ++l) {
    const double c = eta / l, top = tc(l - 1);
    const double at_c = L - p.delta0 * std::log1p(d2 * (top - c));
    if (t >= tc(l)) {
      double v = t >= c ? L + p.delta0 * (std::log1p(d2 * (t - c)) - std::log1p(d2 * (top - c)))
                        : at_c - (1 + p.delta0) * std::log1p(d2 * (c - t));
      const bool resonant = s == Star::R || (s == Star::K && k == l);
      const double hw = eta / (8.0 * l * l);
      if (resonant && std::abs(t - c) <= hw) v += std::log1p(d2 * std::abs(t - c)) - std::log1p(d2 * hw);
      return v;
    }
    L = at_c - (1 + p.delta0) * std::log1p(d2 * (c - tc(l)));
  }
  const double beta = 1 - t / tc(k0);
  return -beta * p.delta * std::sqrt(eta) + (1 - beta) * L;
}

double simpson(auto f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * f(a + i * h);
  return s * h / 3;
}

}  // namespace

TEST_CASE("lambda") {
  WeightParams p;
  CHECK(lambda_of(0, p) == doctest::Approx(0.15).epsilon(1e-15));
  const double I1 = simpson([](double s) { return std::pow(1 + s * s, -0.505); }, 0, 1, 2000);
  CHECK(lambda_of(1, p) == doctest::Approx(0.15 - 1e-5 * I1).epsilon(1e-13));
  CHECK(0.15 - lambda_of(1, p) == doctest::Approx(8.8e-6).epsilon(0.01));
  // int_0^inf <s>^{-1-sigma} ds = sqrt(pi) Gamma(sigma/2) / (2 Gamma((1+sigma)/2))
  const double sig = p.sigma0;
  const double Iinf = std::sqrt(M_PI) * std::tgamma(sig / 2) / (2 * std::tgamma((1 + sig) / 2));
  const double lam_inf = 1.5 * p.delta0 - p.delta0 * sig * sig * Iinf;
  CHECK(lam_inf >= 1.4 * p.delta0);
  // tail: int_T^inf <s>^{-1-sigma} = T^{-sigma}/sigma + O(T^{-2-sigma})
  for (double T : {1e6, 1e9, 1e12}) {
    const double tail = std::pow(T, -sig) / sig;
    CHECK(lambda_of(T, p) == doctest::Approx(lam_inf + p.delta0 * sig * sig * tail).epsilon(1e-10));
  }
  double prev = lambda_of(0, p);
  for (double t = 0.5; t < 1e8; t *= 3) {
    const double l = lambda_of(t, p);
    CHECK(l < prev);
    CHECK(l > p.delta0);
    prev = l;
  }
}

TEST_CASE("critical structure") {
  auto cs = CriticalStructure::of(1e4, params(0.5));
  CHECK(cs.active);
  CHECK(cs.k0 == 35);
  CHECK(cs.t(1) == 7500.0);
  CHECK(cs.t(0) == 2e4);
  for (double delta : {0.5, 0.1}) {
    auto p = params(delta);
    for (double f : {2.0, 10.0, 37.5}) {
      const double eta = f * std::pow(delta, -10);
      auto c = CriticalStructure::of(eta, p);
      CHECK(c.k0 == static_cast<int>(std::floor(std::sqrt(delta * delta * delta * eta))));
      CHECK(c.t(c.k0) >= std::pow(delta, -1.5) * std::sqrt(eta) / 2);
      for (int l = 1; l <= c.k0; ++l) {
        CHECK(c.t(l) <= eta / l);
        CHECK(eta / l <= c.t(l - 1));
        const double len = c.t(l - 1) - c.t(l);
        CHECK(len >= 0.25 * eta / (l * l));
        CHECK(len <= 4 * eta / (l * l));
        const double mid = 0.5 * (c.t(l) + c.t(l - 1));
        CHECK(c.interval(mid) == l);
      }
      CHECK(c.interval(2 * eta + 1) == 0);
      CHECK(c.interval(0.5 * c.t(c.k0)) == c.k0 + 1);
    }
  }
  CHECK_FALSE(CriticalStructure::of(1000.0, params(0.5)).active);
}

TEST_CASE("raw weights against a direct recursion") {
  std::mt19937_64 rng(7);
  for (double delta : {0.5, 0.1}) {
    auto p = params(delta);
    for (double f : {2.0, 10.0}) {
      const double eta = f * std::pow(delta, -10);
      std::uniform_real_distribution<double> ut(0, 2.2 * eta);
      for (int i = 0; i < 400; ++i) {
        const double t = ut(rng);
        for (int k : {-2, 0, 1, 2, 3}) {
          for (Star s : {Star::NR, Star::R, Star::K}) {
            const double ref = naive_log_w(s, k, t, eta, p);
            const double got = log_w(s, k, t, eta, p);
            CHECK(got == doctest::Approx(ref).epsilon(1e-10).scale(1.0));
          }
        }
      }
    }
  }
}

TEST_CASE("raw weight examples") {
  auto p = params(0.5);
  CHECK(w_raw(Star::NR, 0, 2e4, 1e4, p) == 1.0);
  CHECK(w_raw(Star::R, 1, 3e4, 1e4, p) == 1.0);
  for (double t : {0.0, 3.0, 500.0}) {
    CHECK(w_raw(Star::NR, 0, t, 1000.0, p) == 1.0);
    CHECK(w_raw(Star::K, 2, t, -1000.0, p) == 1.0);
  }
  // symmetry and ordering
  for (double t : {10.0, 400.0, 3000.0, 9000.0, 9999.0, 15000.0}) {
    for (int k = -3; k <= 3; ++k) CHECK(log_w(Star::K, k, t, -1e4, p) == log_w(Star::K, -k, t, 1e4, p));
    CHECK(log_w(Star::NR, 0, t, -1e4, p) == log_w(Star::NR, 0, t, 1e4, p));
    for (int k = -3; k <= 3; ++k) {
      CHECK(log_w(Star::R, 0, t, 1e4, p) <= log_w(Star::K, k, t, 1e4, p));
      CHECK(log_w(Star::K, k, t, 1e4, p) <= log_w(Star::NR, 0, t, 1e4, p));
      if (k <= 0) CHECK(log_w(Star::K, k, t, 1e4, p) == log_w(Star::NR, 0, t, 1e4, p));
    }
  }
  // window bound at t_{k0}
  for (double delta : {0.5, 0.1}) {
    auto q = params(delta);
    for (double f : {2.0, 10.0}) {
      const double eta = f * std::pow(delta, -10);
      RawWeights rw(eta, q);
      const double logX = -std::pow(delta, 1.5) * std::log(1 / delta) * std::sqrt(eta);
      const double lw = rw.log_w_at_tk0();
      CHECK(lw >= 4 * logX);
      CHECK(lw <= 0.25 * logX);
      CHECK(rw.log_r(rw.cs().t(rw.cs().k0)) == lw);
    }
  }
  // w_NR is nondecreasing above t_{k0} at (delta, eta) = (0.5, 1e4)
  RawWeights rw(1e4, p);
  double prev = -1e300;
  int bad = 0;
  for (int i = 0; i <= 4000; ++i) {
    const double t = rw.cs().t(rw.cs().k0) + (2e4 - rw.cs().t(rw.cs().k0)) * i / 4000.0;
    const double v = rw.log_nr(t);
    if (v < prev) ++bad;
    prev = v;
  }
  CHECK(bad == 0);
}

TEST_CASE("w_NR monotone on [0, 2 eta] at delta = 0.5, eta = 1e4") {
  // includes the interpolation region t <= t_{k0}
  RawWeights rw(1e4, params(0.5));
  double prev = -1e300;
  int bad = 0;
  for (int i = 0; i <= 4000; ++i) {
    const double v = rw.log_nr(2e4 * i / 4000.0);
    if (v < prev) ++bad;
    prev = v;
  }
  INFO("log w(0) = ", rw.log_nr(0.0), ", log w(t_k0) = ", rw.log_w_at_tk0());
  CHECK(bad == 0);
}

TEST_CASE("mollified weights") {
  auto p = params(0.1);
  // constant weight under the window
  for (double t : {0.0, 1.0, 100.0})
    for (double xi : {0.0, 3.0, -50.0}) {
      CHECK(b_mollified(Star::NR, 0, t, xi, p) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(b_mollified(Star::K, 1, t, xi, p) == doctest::Approx(1.0).epsilon(1e-12));
    }
  CHECK(mollifier_phi(0.0) == 1.0);
  CHECK(mollifier_phi(1.25) == 1.0);
  CHECK(mollifier_phi(1.6) == 0.0);
  CHECK(mollifier_phi(-1.3) == mollifier_phi(1.3));
  const double d0 = mollifier_mass(1e-12);
  CHECK(d0 > 2.5);
  CHECK(d0 < 3.2);
  CHECK(mollifier_length(0, 0, p) == doctest::Approx(1 + p.delta_prime).epsilon(1e-15));

  // refinement: tolerance 1e-8 against 1e-9
  auto q = params(0.5);
  for (double xi : {1.5e3, 1e4, 3e4})
    for (double t : {100.0, 900.0, 5000.0, 9950.0}) {
      for (Star s : {Star::NR, Star::R}) {
        const double a = log_b(s, 0, t, xi, q, 1e-8), b = log_b(s, 0, t, xi, q, 1e-9);
        CHECK(std::abs(std::exp(a - b) - 1) < 1e-7);
      }
      const double bR = log_b(Star::R, 0, t, xi, q), bk = log_b(Star::K, 1, t, xi, q),
                   bN = log_b(Star::NR, 0, t, xi, q);
      CHECK(bR <= bk);
      CHECK(bk <= bN);
      CHECK(bN <= 0.0);
    }
}

TEST_CASE("main weights") {
  WeightParams p;
  p.delta = 0.01;
  p.delta_prime = 0.001;
  const double A0 = std::exp(0.15) * (std::exp(0.1) + 1);
  CHECK(weight_A(Star::K, 0, 0, 0, p) == doctest::Approx(A0).epsilon(1e-14));
  CHECK(A0 == doctest::Approx(2.4458).epsilon(1e-4));

  auto q = params(0.5);
  for (double t : {0.0, 50.0, 800.0, 7000.0, 1e4, 2e4})
    for (double xi : {-1e4, -30.0, 0.0, 7.0, 2e3, 1e4}) {
      CHECK(log_A(Star::K, 1, t, xi, q) == log_A(Star::K, -1, t, -xi, q));
      CHECK(log_A(Star::R, 0, t, xi, q) >= log_A(Star::NR, 0, t, xi, q));
      for (int k = -3; k <= 3; ++k)
        CHECK(log_A(Star::K, k, t, xi, q) >= 1.1 * q.delta0 * std::sqrt(jb(k, xi)));
    }
}

TEST_CASE("mu weights") {
  auto p = params(0.5);
  CHECK(mu_sharp(1e4, 1e4, p) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(mu_sharp(2.5e4, 1e4, p) == 0.0);
  CHECK(mu_sharp(10.0, 500.0, p) == 0.0);
  for (double t : {0.0, 3.0, 1e3}) {
    const double xi = 200.0;
    auto m = mu_weights(t, xi, 1, p);
    CHECK(m.mu_sharp == 0.0);
    CHECK(m.mu_R == doctest::Approx(std::sqrt(jb(xi)) / std::pow(jb(t), 1 + p.sigma0)).epsilon(1e-12));
  }
  for (double t : {0.0, 100.0, 5000.0, 9990.0, 1.5e4})
    for (double xi : {2e3, 1e4, -1e4}) {
      const double m = mu_sharp(t, xi, p);
      CHECK(m >= 0.0);
      CHECK(m <= p.delta * p.delta);
      auto w = mu_weights(t, xi, 2, p);
      CHECK(w.mu_R >= std::sqrt(jb(xi)) / std::pow(jb(t), 1 + p.sigma0) * (1 - 1e-14));
    }
}
