#pragma once

#include <span>
#include <vector>

#include "vortexlab/grid_fields.hpp"

namespace vortexlab {

// Quadrature over one radial panel [r_j, r_{j+1}] of
//   f(rho) = g(rho) * exp(-i alpha / rho^2),
// with g interpolated by local 8-point Lagrange on the uniform grid and the
// phase evaluated exactly.  Panels are cut into enough Gauss-Legendre
// sub-panels to resolve the phase and a power weight rho^{+-kabs}.
class PanelQuadrature {
 public:
  explicit PanelQuadrature(const Grid& g);

  int n_r() const { return n_; }
  double r(int j) const { return r0_ + j * h_; }

  int subpanels(double alpha, int kabs, int j) const;
  // true when the interpolation stencil of panel j is identically zero
  bool empty_panel(std::span<const cplx> g, int j) const;
  // Fills rho[q] and val[q] = weight_q * f(rho_q).  Returns node count.
  int nodes(std::span<const cplx> g, double alpha, int kabs, int j, std::vector<double>& rho,
            std::vector<cplx>& val) const;

  // int rho^p f(rho) d rho over the whole grid
  cplx integrate(std::span<const cplx> g, double alpha, double p) const;

 private:
  int n_;
  double r0_, h_;
};

}  // namespace vortexlab
