#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "vortexlab/gevrey.hpp"

using namespace vortexlab;

TEST_CASE("bump_psi_a") {
  CHECK(bump_psi_a(1, 0.0) == 0.0);
  CHECK(bump_psi_a(1, 1.0) == 0.0);
  CHECK(bump_psi_a(1, 0.5) == doctest::Approx(0.0183156388887342).epsilon(1e-14));
  for (double a : {0.5, 1.0, 2.0, 3.5})
    for (double x = 0.01; x < 1; x += 0.0137) CHECK(bump_psi_a(a, x) == doctest::Approx(bump_psi_a(a, 1 - x)).epsilon(1e-13));
}

TEST_CASE("plateau cutoff: range, support, plateau") {
  for (double a : {1.0, 2.0})
    for (double rho : {0.9, 0.95, 0.999}) {
      CHECK(plateau_cutoff(a, rho, 0.5) == 1.0);
      CHECK(plateau_cutoff(a, rho, -0.1) == 0.0);
      CHECK(plateau_cutoff(a, rho, 1.0) == 0.0);
      for (int i = 0; i <= 20000; ++i) {
        const double x = -0.2 + 1.4 * i / 20000.0;
        const double v = plateau_cutoff(a, rho, x);
        CHECK((v >= 0.0 && v <= 1.0));
        if (x <= 0.0 || x >= 1.0) CHECK(v == 0.0);
        if (x >= 1 - rho && x <= rho) CHECK(v == 1.0);
      }
    }
  // transition region: at x = rho + 0.01 the value is 1 - O(1e-39), so the
  // upper bound is checked through the complement
  for (double rho : {0.9, 0.95}) {
    const double x = rho + 0.01;
    CHECK(plateau_cutoff(1.0, rho, x) > 0.0);
    CHECK(plateau_cutoff_complement(1.0, rho, x) > 0.0);
    CHECK(plateau_cutoff_complement(1.0, rho, 0.5) == 0.0);
  }
  const double mid = plateau_cutoff(1.0, 0.9, 0.95);
  CHECK(mid == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(plateau_cutoff(1.0, 0.9, 0.93) + plateau_cutoff_complement(1.0, 0.9, 0.93) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS(plateau_cutoff(1.0, 0.5, 0.5));

  auto c = make_cutoff(1.0, -1.6, 1.6, -1.25, 1.25);
  CHECK(c(0.0) == 1.0);
  CHECK(c(1.25) == 1.0);
  CHECK(c(-1.25) == 1.0);
  CHECK(c(1.6) == 0.0);
  CHECK(c(-1.7) == 0.0);
}

TEST_CASE("Fourier decay exponent of psi_a") {
  const double dx = 64.0 / (1 << 18);
  auto f1 = sample_bump(1.0, dx, 64.0);
  auto r1 = verify_gevrey_decay(f1, dx);
  CHECK(r1.accepted);
  CHECK(std::abs(r1.p - 0.5) < 0.05);
  auto f2 = sample_bump(2.0, dx, 64.0);
  auto r2 = verify_gevrey_decay(f2, dx);
  CHECK(r2.accepted);
  CHECK(std::abs(r2.p - 2.0 / 3.0) < 0.05);
  // Gaussian: analytic transform decays like exp(-sigma^2 xi^2 / 2)
  std::vector<double> gs(f1.size());
  for (std::size_t i = 0; i < gs.size(); ++i) {
    const double x = i * dx - 32.0;
    gs[i] = std::exp(-x * x / (2 * 0.05 * 0.05));
  }
  auto rg = verify_gevrey_decay(gs, dx);
  CHECK(std::abs(rg.p - 2.0) < 0.05);
  CHECK_FALSE(rg.accepted);
}

TEST_CASE("gevrey norm conventions") {
  Grid g{16, 64, 0.0 + 1.0, 2.0, 2.0 / 3.0};
  PolarField F(g);
  GevreyNormSpec spec{0.1, 0.5};
  CHECK(gevrey_norm(F, spec).norm == 0.0);
  // single mode at (k, xi) = (+-1, 0): constant-in-v k = 1 row with unit total l2 mass.
  // sum_k sum_m |F~|^2 dxi = 2 pi dv sum_k sum_j |F_k|^2, so c = 1/sqrt(2 * 2 pi n_v dv)
  const double dv = g.h();
  const double c = 1.0 / std::sqrt(2.0 * 2.0 * std::numbers::pi * g.n_r * dv);
  for (int j = 0; j < g.n_r; ++j) F.at(1, j) = c;
  CHECK(gevrey_norm(F, spec).norm == doctest::Approx(std::exp(0.1 * std::pow(2.0, 0.25))).epsilon(1e-12));
  CHECK(std::exp(0.1 * std::pow(2.0, 0.25)) == doctest::Approx(1.1263).epsilon(1e-4));

  // Parseval: lambda -> 0 gives the physical L2 norm
  std::mt19937 rng(3);
  std::normal_distribution<double> nd;
  PolarField R(g);
  double phys = 0;
  for (int k = 0; k <= R.kmax(); ++k)
    for (int j = 0; j < g.n_r; ++j) {
      R.at(k, j) = k == 0 ? cplx(nd(rng), 0) : cplx(nd(rng), nd(rng));
      phys += (k == 0 ? 1 : 2) * std::norm(R.at(k, j)) * 2 * std::numbers::pi * dv;
    }
  CHECK(gevrey_norm(R, {1e-300, 0.5}).norm == doctest::Approx(std::sqrt(phys)).epsilon(1e-12));
}

TEST_CASE("gevrey norm refinement stability and lambda monotonicity") {
  auto gauss_norm = [](int n) {
    const double lo = -4, hi = 4, dv = (hi - lo) / n;
    std::vector<double> p(n);
    for (int j = 0; j < n; ++j) {
      const double v = lo + j * dv;
      p[j] = std::exp(-v * v / 0.5);
    }
    return gevrey_norm(p, dv, {0.5, 0.5}).norm;
  };
  CHECK(gauss_norm(512) == doctest::Approx(gauss_norm(1024)).epsilon(1e-6));

  std::mt19937 rng(11);
  std::normal_distribution<double> nd;
  Grid g{16, 128, 0.0 + 0.5, 1.5, 2.0 / 3.0};
  for (int trial = 0; trial < 100; ++trial) {
    PolarField F(g);
    for (int k = 0; k <= F.kmax(); ++k)
      for (int j = 0; j < g.n_r; ++j) F.at(k, j) = k == 0 ? cplx(nd(rng), 0) : cplx(nd(rng), nd(rng));
    double prev = 0;
    for (double lam : {0.01, 0.05, 0.1, 0.2, 0.4}) {
      const double n = gevrey_norm(F, {lam, 0.5}).norm;
      CHECK(n >= prev);
      prev = n;
    }
  }
}
