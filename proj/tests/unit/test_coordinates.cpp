#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "vortexlab/coordinates.hpp"

using namespace vortexlab;

namespace {

constexpr double pi = std::numbers::pi;

MeanHistory unperturbed(const Grid& g, double t, double kappa) {
  MeanHistory h;
  h.t = t;
  h.kappa = kappa;
  for (auto* f : {&h.flow_integral, &h.flow_now, &h.omega_integral, &h.omega_now}) f->assign(g.n_r, 0.0);
  return h;
}

// <omega>(s, r) = a(s) q(r), q a Gaussian ring; int_0^r x q(x) dx in closed form
struct Ring {
  double r0 = 1.0, sig = 0.2, eps = 1e-3;
  double q(double r) const { return std::exp(-std::pow((r - r0) / sig, 2)); }
  double Q(double r) const {
    const double e = std::exp(-std::pow((r - r0) / sig, 2)), e0 = std::exp(-std::pow(r0 / sig, 2));
    return -0.5 * sig * sig * (e - e0) +
           r0 * sig * std::sqrt(pi) / 2 * (std::erf((r - r0) / sig) + std::erf(r0 / sig));
  }
  double a(double s) const { return eps * (1 + std::sin(s)); }
  double A(double t) const { return eps * (t + 1 - std::cos(t)); }
  MeanHistory history(const Grid& g, double t, double kappa) const {
    MeanHistory h = unperturbed(g, t, kappa);
    h.c0 = 2 * pi * a(t) * Q(g.r_max);
    for (int j = 0; j < g.n_r; ++j) {
      const double r = g.r(j);
      // <d_r psi> = Q(r)/r
      h.flow_integral[j] = A(t) * Q(r) / (r * r);
      h.flow_now[j] = a(t) * Q(r) / r;
      h.omega_integral[j] = A(t) * q(r) / r;
      h.omega_now[j] = a(t) * q(r);
    }
    return h;
  }
};

}  // namespace

TEST_CASE("unperturbed vortex") {
  Grid g{64, 1024, 0.05, 16.0};
  const double kappa = 2 * pi;
  for (double t : {0.0, 3.0}) {
    CoordinateMap m(g, unperturbed(g, t, kappa));
    CHECK(m.v_of_r(1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(m.r_of_v(1.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(m.r_of_v(400.0) == doctest::Approx(0.05).epsilon(1e-14));  // off the grid, inner law
    CHECK(m.r_of_v(1e-4) == doctest::Approx(100.0).epsilon(1e-14));  // outer law
    for (std::size_t j = 0; j < m.v_nodes().size(); ++j) {
      const double r = g.r(j);
      CHECK(m.v_nodes()[j] == doctest::Approx(1 / (r * r)).epsilon(1e-14));
      CHECK(m.Vp_nodes()[j] == doctest::Approx(-2 * m.v_nodes()[j] / r).epsilon(1e-14));
      CHECK(std::abs(m.Vstar_nodes()[j]) < 1e-12 * m.v_nodes()[j] / r);
      CHECK(std::abs(m.Wstar_nodes()[j]) < 1e-12 * m.v_nodes()[j] / r);
    }
    VGrid vg = default_vgrid(kappa, 0.0, 0.125, 512);
    auto p = m.resample(vg);
    for (int i = 0; i < vg.n; ++i) {
      CHECK(std::abs(p.rhostar[i]) < 1e-12 * p.rho[i]);
      CHECK(p.Vp[i] == doctest::Approx(-2 * p.rho[i] * p.v[i]).epsilon(1e-12));
    }
    CHECK(support_leak(m, vg, 0.125) < 1e-12);
    CHECK(pv2_residual(m, vg, 0.125) < 1e-4);
  }
  CHECK(vstar_crosscheck(CoordinateMap(g, unperturbed(g, 1.0, kappa))) < 1e-12);
}

TEST_CASE("V* by two formulas, synthetic mean vorticity") {
  Grid g{64, 1024, 0.05, 16.0};
  Ring ring;
  for (double t : {0.5, 7.0, 40.0}) {
    CoordinateMap m(g, ring.history(g, t, 1.0));
    const double err = vstar_crosscheck(m);
    INFO("t = ", t, " rel err ", err);
    CHECK(err < 1e-6);
    // closed form for (1/t) int <omega>/r
    for (int j = 0; j < g.n_r; j += 37)
      CHECK(m.Vstar_avg_nodes()[j] == doctest::Approx(ring.A(t) / t * ring.q(g.r(j)) / g.r(j)).epsilon(1e-14));
    // dot v from its definition against d/dt of the closed form v
    const double dt = 1e-4;
    for (double r : {0.8, 1.0, 1.3}) {
      const int j = static_cast<int>(std::lround((r - g.r_min) / g.h()));
      const double rj = g.r(j);
      auto vt = [&](double s) { return ring.A(s) / s * ring.Q(rj) / (rj * rj); };
      const double ref = (vt(t + dt) - vt(t - dt)) / (2 * dt);
      CHECK(m.Vdot_nodes()[j] == doctest::Approx(ref).epsilon(1e-6).scale(1e-12));
    }
  }
}

TEST_CASE("inverse map") {
  Grid g{64, 1024, 0.05, 16.0};
  Ring ring;
  ring.eps = 2e-2;
  CoordinateMap m(g, ring.history(g, 10.0, 1.0));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(1.0 / 16, 16.0);
  for (int i = 0; i < 2000; ++i) {
    const double r = u(rng);
    CHECK(m.r_of_v(m.v_of_r(r)) == doctest::Approx(r).epsilon(1e-8));
  }
  CHECK_THROWS_AS(m.r_of_v(0.0), std::domain_error);
}

TEST_CASE("non-monotone map is refused") {
  Grid g{64, 512, 0.05, 16.0};
  MeanHistory h = unperturbed(g, 1.0, 1.0);
  for (int j = 0; j < g.n_r; ++j) h.flow_integral[j] = 50.0 * std::exp(-std::pow((g.r(j) - 1) / 0.05, 2));
  CHECK_THROWS_AS(CoordinateMap(g, h), NonMonotoneMap);
}

TEST_CASE("pullback") {
  Grid g{32, 1024, 0.05, 16.0};
  Ring ring;
  // t = 0: F is omega resampled, z = theta
  std::vector<double> samples(static_cast<std::size_t>(g.n_theta) * g.n_r);
  const auto nodes = g.nodes();
  for (int i = 0; i < g.n_theta; ++i)
    for (int j = 0; j < g.n_r; ++j) {
      const double th = 2 * pi * i / g.n_theta;
      samples[static_cast<std::size_t>(i) * g.n_r + j] = ring.q(nodes[j]) * (1 + 0.5 * std::cos(2 * th));
    }
  PolarField omega = to_modes(g, samples);
  CoordinateMap m0(g, unperturbed(g, 0.0, 1.0));
  VGrid vg = default_vgrid(1.0, 0.0, 0.125, 2048);
  PolarField F = pullback_F(omega, m0, vg);
  // monotone cubic with O(h) slopes at extrema: |err| <= h^2 max|q''| / 4, max|q''| = 2/sig^2
  const double tol = g.h() * g.h() * (2 / (ring.sig * ring.sig)) / 4;
  for (int i = 0; i < vg.n; ++i) {
    const double r = m0.r_of_v(vg.v(i));
    const double q = r >= g.r_min && r <= g.r_max ? ring.q(r) : 0.0;
    CHECK(std::abs(F.at(0, i).real() - q) < tol);
    CHECK(std::abs(F.at(2, i) - cplx(0.25 * q)) < 0.25 * tol);
    CHECK(std::abs(F.at(1, i)) < 1e-15);
  }
  // radial field under a mean-flow map: F_0(v(t, r_j)) = <omega>(r_j)
  CoordinateMap m(g, ring.history(g, 5.0, 1.0));
  PolarField Fr = pullback_F(omega, m, vg);
  for (int i = 0; i < vg.n; i += 3) {
    const double r = m.r_of_v(vg.v(i));
    if (r < g.r_min || r > g.r_max) continue;
    CHECK(std::abs(Fr.at(0, i).real() - ring.q(r)) < tol);
  }
}

TEST_CASE("pullback is time-invariant under linear dynamics") {
  Grid g{32, 512, 0.05, 16.0};
  PolarField w0 = initial_vorticity(g, 1e-3, 2);
  SimState s = make_state(w0, 1.0);
  DynamicsOptions opt;
  opt.nonlinear = false;
  opt.drift = false;
  VGrid vg = default_vgrid(1.0, s.vortex.c0, 0.125, 2048);
  PolarField F0 = pullback_F(s.omega(), build_map(s), vg);
  for (int n = 0; n < 20; ++n) s = step(s, 0.25, opt);
  PolarField F1 = pullback_F(s.omega(), build_map(s), vg);
  const double d = f_distance(F1, F0), n0 = f_distance(F0, PolarField(F0.grid()));
  INFO("relative change ", d / n0);
  CHECK(n0 > 0);
  CHECK(d < 1e-10 * n0);
}

TEST_CASE("profile convergence fit") {
  Grid g{8, 64, 0.01, 1.0};
  PolarField base(g), dir(g);
  for (int j = 0; j < g.n_r; ++j) {
    base.at(0, j) = std::sin(3.0 * j / g.n_r);
    dir.at(1, j) = cplx(0.3, -0.2) * std::cos(j * 0.1);
  }
  std::vector<std::pair<double, PolarField>> same, inv, inv2;
  for (double t : {20.0, 40.0, 60.0, 100.0, 150.0, 200.0}) {
    same.emplace_back(t, base);
    inv.emplace_back(t, base + (1.0 / t) * dir);
    inv2.emplace_back(t, base + (1.0 / (t * t)) * dir);
  }
  auto z = profile_convergence(same);
  for (double d : z.distances) CHECK(d == 0.0);
  auto a = profile_convergence(inv);
  CHECK(a.slope == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(a.prefactor == doctest::Approx(f_distance(dir, PolarField(g))).epsilon(1e-6));
  CHECK(profile_convergence(inv2).slope == doctest::Approx(-2.0).epsilon(1e-6));
  CHECK(a.distances.size() == 5);
  CHECK(a.distances[0] == doctest::Approx((1.0 / 20 - 1.0 / 40) * f_distance(dir, PolarField(g))).epsilon(1e-12));
  CHECK_THROWS(profile_convergence({inv[0], inv[1]}));
}
