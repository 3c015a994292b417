#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "vortexlab/dynamics.hpp"

using namespace vortexlab;

namespace {
constexpr double pi = std::numbers::pi;

PolarField sample(const Grid& g, const std::function<double(double, double)>& f) {
  std::vector<double> s(static_cast<std::size_t>(g.n_theta) * g.n_r);
  for (int i = 0; i < g.n_theta; ++i)
    for (int j = 0; j < g.n_r; ++j) s[static_cast<std::size_t>(i) * g.n_r + j] = f(i * g.dtheta(), g.r(j));
  return to_modes(g, s);
}

// 4th-order central difference of a closed-form function
double d4(const std::function<double(double)>& f, double x, double e = 1e-3) {
  return (-f(x + 2 * e) + 8 * f(x + e) - 8 * f(x - e) + f(x - 2 * e)) / (12 * e);
}

double max_diff(const PolarField& a, const PolarField& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}
}  // namespace

TEST_CASE("vortex_drift") {
  Grid g{32, 800, 0.25, 4.0, 2.0 / 3.0};
  const double eps = 1e-2;
  // unit-integral radial profile
  auto prof = [](double r) { return std::exp(-(r - 2) * (r - 2) / 0.08) / std::sqrt(0.08 * pi); };
  auto c = sample(g, [&](double th, double r) { return eps * std::cos(th) * prof(r); });
  auto s = sample(g, [&](double th, double r) { return eps * std::sin(th) * prof(r); });
  auto rad = sample(g, [&](double, double r) { return prof(r); });
  auto dc = vortex_drift(c), ds = vortex_drift(s), dr = vortex_drift(rad);
  CHECK(std::abs(dc.dP1) < 1e-15);
  CHECK(dc.dP2 == doctest::Approx(-eps / 2).epsilon(1e-10));
  CHECK(ds.dP1 == doctest::Approx(eps / 2).epsilon(1e-10));
  CHECK(std::abs(ds.dP2) < 1e-15);
  CHECK(dr.dP1 == 0.0);
  CHECK(dr.dP2 == 0.0);
}

TEST_CASE("rhs: steady radial state and rotation term") {
  Grid g{32, 400, 0.5, 3.0, 2.0 / 3.0};
  const double kappa = 1.7;
  auto prof = [](double r) { return std::exp(-(r - 1.5) * (r - 1.5) / 0.1); };
  StreamSolution zero{PolarField(g), PolarField(g), PolarField(g), 0.0};

  auto rad = sample(g, [&](double, double r) { return prof(r); });
  auto st = solve_stream(rad, Rotation{kappa, 0.0});
  CHECK(rhs(rad, st, Drift{}, kappa).max_abs() < 1e-15);

  auto w = sample(g, [&](double th, double r) { return std::cos(th) * prof(r); });
  auto expect = sample(g, [&](double th, double r) { return kappa / (2 * pi * r * r) * std::sin(th) * prof(r); });
  CHECK(max_diff(rhs(w, zero, Drift{}, kappa), expect) < 1e-14);
}

TEST_CASE("rhs matches a direct physical-space finite-difference evaluation") {
  Grid g{32, 1024, 0.5, 3.0, 2.0 / 3.0};
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-1, 1);
  struct Term {
    int k;
    double a, b, c, w;
  };
  auto make = [&](int K) {
    std::vector<Term> t;
    for (int k = 0; k <= K; ++k) t.push_back({k, U(rng), U(rng), 1.5 + 0.4 * U(rng), 0.1 + 0.03 * (U(rng) + 1)});
    return t;
  };
  auto eval = [](const std::vector<Term>& T, double th, double r) {
    double s = 0;
    for (const auto& t : T) {
      const double e = std::exp(-(r - t.c) * (r - t.c) / t.w);
      s += e * (t.a * std::cos(t.k * th) + t.b * (t.k ? std::sin(t.k * th) : 0.0));
    }
    return s;
  };
  const auto W = make(4), Psi = make(4);
  const double kappa = 1.3;
  const Drift P{0.37, -0.21};

  auto omega = sample(g, [&](double th, double r) { return eval(W, th, r); });
  StreamSolution st{sample(g, [&](double th, double r) { return eval(Psi, th, r); }),
                    sample(g, [&](double th, double r) { return d4([&](double x) { return eval(Psi, th, x); }, r); }),
                    PolarField(g), 0.0};
  auto got = rhs(omega, st, P, kappa);

  auto oracle = sample(g, [&](double th, double r) {
    const double wr = d4([&](double x) { return eval(W, th, x); }, r);
    const double wt = d4([&](double y) { return eval(W, y, r); }, th);
    const double pr = d4([&](double x) { return eval(Psi, th, x); }, r);
    const double pt = d4([&](double y) { return eval(Psi, y, r); }, th);
    const double er = P.dP1 * std::cos(th) + P.dP2 * std::sin(th);
    const double et = -P.dP1 * std::sin(th) + P.dP2 * std::cos(th);
    return er * wr + et * wt / r - kappa / (2 * pi * r * r) * wt + (pt * wr - pr * wt) / r;
  });
  const double scale = oracle.max_abs();
  INFO("rel err ", max_diff(got, oracle) / scale);
  CHECK(max_diff(got, oracle) < 1e-8 * scale);
}

TEST_CASE("zero perturbation is a fixed point") {
  Grid g{32, 256, 0.1, 4.0, 2.0 / 3.0};
  auto s = make_state(initial_vorticity(g, 0.0, 2), 1.0);
  auto s2 = s;
  for (int n = 0; n < 5; ++n) s2 = step(s2, 0.1, DynamicsOptions{});
  CHECK(s2.g.max_abs() == 0.0);
  CHECK(s2.vortex.P1 == 0.0);
  CHECK(s2.vortex.P2 == 0.0);
  CHECK(s2.omega().max_abs() == 0.0);
}

TEST_CASE("linear transport is exact rotation") {
  Grid g{64, 512, 0.25, 4.0, 2.0 / 3.0};
  const double kappa = 1.0;
  auto w0 = initial_vorticity(g, 1e-3, 2);
  auto s = make_state(w0, kappa);
  DynamicsOptions opt;
  opt.nonlinear = false;
  opt.drift = false;
  for (int n = 0; n < 50; ++n) s = step(s, 0.7, opt);
  const double t = s.t;
  auto w = s.omega();
  double err = 0;
  for (int j = 0; j < g.n_r; ++j) {
    const double r = g.r(j);
    const cplx e = std::polar(1.0, -2 * kappa * t / (2 * pi * r * r));
    err = std::max(err, std::abs(w.at(2, j) - w0.at(2, j) * e));
    CHECK(std::abs(w.at(2, j)) == doctest::Approx(std::abs(w0.at(2, j))).epsilon(1e-14));
  }
  CHECK(err < 1e-15 * w0.max_abs() * 10);
}

TEST_CASE("time-stepping order (Richardson)") {
  Grid g{32, 256, 0.2, 4.0, 2.0 / 3.0};
  for (auto sp : {Splitting::strang, Splitting::integrating_factor}) {
    DynamicsOptions opt;
    opt.splitting = sp;
    auto w0 = initial_vorticity(g, 0.2, 1);
    w0 += initial_vorticity(g, 0.3, 2);
    w0 += initial_vorticity(g, 0.4, 0);
    auto run = [&](double dt, double T) {
      auto s = make_state(w0, 1.0);
      const int n = static_cast<int>(std::lround(T / dt));
      for (int i = 0; i < n; ++i) s = step(s, dt, opt);
      return s;
    };
    const double T = 1.2, dt = 0.03;
    auto a = run(dt, T), b = run(dt / 2, T), c = run(dt / 4, T);
    const double e1 = max_diff(a.omega(), b.omega()), e2 = max_diff(b.omega(), c.omega());
    const double order = std::log2(e1 / e2);
    INFO("splitting ", static_cast<int>(sp), " order ", order, " e1 ", e1, " e2 ", e2);
    // midpoint-frozen clock is second order; the stage-following clock keeps RK4's order
    if (sp == Splitting::strang)
      CHECK(std::abs(order - 2.0) < 0.1);
    else
      CHECK(order >= 3.8);
    CHECK(std::abs(a.vortex.P1 - c.vortex.P1) > 0.0);  // m=1 content drives the vortex
  }
}

TEST_CASE("CFL refusal") {
  Grid g{32, 256, 0.2, 4.0, 2.0 / 3.0};
  auto s = make_state(initial_vorticity(g, 0.5, 1), 1.0);
  const double lim = cfl_limit(s, DynamicsOptions{});
  CHECK(lim > 0);
  CHECK(std::isfinite(lim));
  try {
    step(s, 2 * lim, DynamicsOptions{});
    FAIL("expected CflError");
  } catch (const CflError& e) {
    CHECK(e.stable_dt == doctest::Approx(lim));
  }
  CHECK_NOTHROW(step(s, 0.9 * lim, DynamicsOptions{}));
}

TEST_CASE("conserved quantities") {
  Grid g{32, 1001, 0.0 + 0.5, 2.5, 2.0 / 3.0};
  auto empty = make_state(PolarField(g), 1.0);
  empty.vortex.P1 = 0.25;
  empty.vortex.P2 = -0.5;
  auto c0 = conserved_quantities(empty);
  CHECK(c0.mass == 0.0);
  CHECK(c0.enstrophy == 0.0);
  CHECK(c0.moment_x == 0.25);
  CHECK(c0.moment_y == -0.5);

  // indicator of [1,2]: 3 pi up to the O(h) resolution of the jumps
  auto ind = sample(g, [](double, double r) { return (r >= 1 - 1e-12 && r <= 2 + 1e-12) ? 1.0 : 0.0; });
  auto si = make_state(ind, 1.0);
  CHECK(std::abs(conserved_quantities(si).mass - 3 * pi) < 3 * pi * g.h());

  // smooth radial field, closed-form mass and enstrophy
  auto prof = [](double r) { return std::exp(-(r - 1.5) * (r - 1.5) / 0.02); };
  auto s = make_state(sample(g, [&](double, double r) { return prof(r); }), 2.0);
  s.vortex.P1 = 0.3;
  s.vortex.P2 = -0.2;
  auto c = conserved_quantities(s);
  const double mass = 2 * pi * 1.5 * std::sqrt(0.02 * pi);  // int r e^{-(r-1.5)^2/s} dr
  CHECK(c.mass == doctest::Approx(mass).epsilon(1e-10));
  CHECK(c.enstrophy == doctest::Approx(2 * pi * 1.5 * std::sqrt(0.01 * pi)).epsilon(1e-10));
  CHECK(c.moment_x == doctest::Approx((2.0 + mass) * 0.3).epsilon(1e-12));
  CHECK(c.moment_y == doctest::Approx((2.0 + mass) * -0.2).epsilon(1e-12));

  // first moment of a cos(theta) field: int r cos th * r cos th g r dr dth = pi int r^2 g dr
  auto sc = make_state(sample(g, [&](double th, double r) { return std::cos(th) * prof(r); }), 1.0);
  auto cc = conserved_quantities(sc);
  const double m2 = std::sqrt(0.02 * pi) * (1.5 * 1.5 + 0.01);  // int r^2 e^{-(r-1.5)^2/s}
  CHECK(cc.moment_x == doctest::Approx(pi * m2).epsilon(1e-10));
  CHECK(std::abs(cc.moment_y) < 1e-14);
}

TEST_CASE("support monitor") {
  Grid g{32, 512, 0.05, 16.0, 2.0 / 3.0};
  auto s = make_state(initial_vorticity(g, 1e-3, 2), 1.0);
  auto e = support_extent(s);
  CHECK_FALSE(e.empty);
  CHECK(e.r_lo >= 0.5);
  CHECK(e.r_hi <= 2.0);
  CHECK(support_ok(s, DynamicsOptions{}));
  DynamicsOptions wide;
  wide.vartheta0 = 0.25;  // annulus [1/8, 8]
  CHECK(support_ok(s, wide));
  auto far = make_state(initial_vorticity(g, 1e-3, 2, InitialProfile::bump, 6.0, 10.0), 1.0);
  CHECK_FALSE(support_ok(far, wide));
}
