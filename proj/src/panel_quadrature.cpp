#include "vortexlab/panel_quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace vortexlab {

namespace {

constexpr std::array<double, 6> gl_x = {-0.9324695142031521, -0.6612093864662645, -0.2386191860831969,
                                        0.2386191860831969,  0.6612093864662645,  0.9324695142031521};
constexpr std::array<double, 6> gl_w = {0.1713244923791704, 0.3607615730481386, 0.4679139345726910,
                                        0.4679139345726910, 0.3607615730481386, 0.1713244923791704};
// barycentric weights of 8 equispaced points: (-1)^i C(7,i)
constexpr std::array<double, 8> bary = {1, -7, 21, -35, 35, -21, 7, -1};
constexpr int stencil = 8;

}  // namespace

PanelQuadrature::PanelQuadrature(const Grid& g) : n_(g.n_r), r0_(g.r_min), h_(g.h()) {}

int PanelQuadrature::subpanels(double alpha, int kabs, int j) const {
  const double a = r(j), b = r(j + 1);
  const double phase = std::abs(alpha) * (1.0 / (a * a) - 1.0 / (b * b));
  const double power = kabs * std::log(b / a);
  return 1 + static_cast<int>(phase / 1.5 + power / 2.0);
}

static int stencil_start(int j, int n) { return std::clamp(j - 3, 0, n - stencil); }

bool PanelQuadrature::empty_panel(std::span<const cplx> g, int j) const {
  const int s = stencil_start(j, n_);
  for (int i = 0; i < stencil; ++i)
    if (g[s + i] != cplx{}) return false;
  return true;
}

int PanelQuadrature::nodes(std::span<const cplx> g, double alpha, int kabs, int j, std::vector<double>& rho,
                           std::vector<cplx>& val) const {
  const int nsub = subpanels(alpha, kabs, j);
  const int s = stencil_start(j, n_);
  const int count = 6 * nsub;
  rho.resize(count);
  val.resize(count);
  const double hs = 1.0 / nsub;  // sub-panel width in cell units
  int q = 0;
  for (int m = 0; m < nsub; ++m) {
    for (int i = 0; i < 6; ++i, ++q) {
      const double x = (j - s) + (m + 0.5 * (1.0 + gl_x[i])) * hs;  // stencil coordinate
      double den = 0.0;
      cplx num{};
      for (int p = 0; p < stencil; ++p) {
        const double c = bary[p] / (x - p);
        den += c;
        num += c * g[s + p];
      }
      const double rr = r0_ + (s + x) * h_;
      rho[q] = rr;
      cplx v = num / den;
      if (alpha != 0.0) v *= std::polar(1.0, -alpha / (rr * rr));
      val[q] = v * (0.5 * gl_w[i] * hs * h_);
    }
  }
  return count;
}

cplx PanelQuadrature::integrate(std::span<const cplx> g, double alpha, double p) const {
  std::vector<double> rho;
  std::vector<cplx> val;
  cplx sum{};
  for (int j = 0; j + 1 < n_; ++j) {
    if (empty_panel(g, j)) continue;
    const int kabs = static_cast<int>(std::ceil(std::abs(p)));
    const int c = nodes(g, alpha, kabs, j, rho, val);
    for (int q = 0; q < c; ++q) sum += val[q] * (p == 0.0 ? 1.0 : std::pow(rho[q], p));
  }
  return sum;
}

}  // namespace vortexlab
