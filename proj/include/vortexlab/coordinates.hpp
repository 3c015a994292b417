#pragma once

#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "vortexlab/dynamics.hpp"
#include "vortexlab/grid_fields.hpp"

namespace vortexlab {

struct NonMonotoneMap : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Inputs of the (z, v) map at one time; profiles on the radial nodes.
struct MeanHistory {
  double t = 0.0;
  double kappa = 1.0;
  double c0 = 0.0;
  std::vector<double> flow_integral;   // Phi = int_0^t <d_r psi>/r ds
  std::vector<double> flow_now;        // <d_r psi>(t, r)
  std::vector<double> omega_integral;  // int_0^t <omega>/r ds
  std::vector<double> omega_now;       // <omega>(t, r)
};
MeanHistory mean_history(const SimState& s);

struct VGrid {
  double lo = 0.0, hi = 1.0;
  int n = 2048;
  double h() const { return (hi - lo) / (n - 1); }
  double v(int i) const { return lo + i * h(); }
};

// [upsilon_lo / 2, 2 upsilon_hi]
VGrid default_vgrid(double kappa, double c0, double vartheta0, int n = 2048);
double upsilon_hi(double kappa, double vartheta0);
double upsilon_lo(double kappa, double c0, double vartheta0);

class CoordinateMap {
 public:
  CoordinateMap(const Grid& grid, const MeanHistory& h);

  double t() const { return t_; }
  double kappa() const { return kappa_; }
  double c0() const { return c0_; }
  const Grid& grid() const { return grid_; }

  double v_of_r(double r) const;
  // beyond the radial grid the unperturbed laws v = kappa / 2 pi r^2 (inside)
  // and (kappa + c0) / 2 pi r^2 (outside) are used
  double r_of_v(double v) const;

  // on the radial nodes, i.e. at v = v(t, r_j)
  const std::vector<double>& v_nodes() const { return v_; }
  const std::vector<double>& Vp_nodes() const { return Vp_; }
  const std::vector<double>& Vpp_nodes() const { return Vpp_; }
  const std::vector<double>& Vdot_nodes() const { return Vdot_; }
  const std::vector<double>& Vstar_nodes() const { return Vstar_; }      // V' + 2 rho v
  const std::vector<double>& Vstar_avg_nodes() const { return Vavg_; }   // (1/t) int <omega>/r
  const std::vector<double>& Wstar_nodes() const { return Wstar_; }
  const std::vector<double>& Phi_nodes() const { return Phi_; }

  struct Profiles {
    std::vector<double> v, r, Vp, Vpp, Vdot, rho, Vstar, rhostar, Wstar;
  };
  Profiles resample(const VGrid& vg) const;

 private:
  Grid grid_;
  double t_, kappa_, c0_;
  std::vector<double> r_, v_, Vp_, Vpp_, Vdot_, Vstar_, Vavg_, Wstar_, Phi_, avg_flow_, dflow_, d2flow_;
  struct Interp;
  std::shared_ptr<const Interp> flow_;  // monotone cubic through avg_flow_
};

CoordinateMap build_map(const SimState& s);

// max |V'+2 rho v - (1/t) int <omega>/r| / max |(1/t) int <omega>/r| over the nodes
double vstar_crosscheck(const CoordinateMap& m);
// max |V'' - V' d_v V'| / max |V''| on the v-grid nodes in [upsilon_lo, upsilon_hi],
// d_v by 4th-order differences on the uniform v-grid
double pv2_residual(const CoordinateMap& m, const VGrid& vg, double vartheta0);
// largest |V*|, |W*| at v-grid nodes outside [upsilon_lo, upsilon_hi]
double support_leak(const CoordinateMap& m, const VGrid& vg, double vartheta0);

// F_k(v) = omega_k(r(v)) e^{ikt v}; rows k, columns the v-grid (stored as a
// PolarField on a Grid whose radial axis is v)
PolarField pullback_F(const PolarField& omega, const CoordinateMap& m, const VGrid& vg);
Grid vgrid_as_grid(const Grid& g, const VGrid& vg);

struct ProfileConvergence {
  std::vector<double> distances;  // ||F(t_{i+1}) - F(t_i)||
  std::vector<double> to_last;    // ||F(t_i) - F(t_last)||, i < last
  double slope = 0.0;             // p in ||F(t) - F(t_last)|| = C |t^p - t_last^p|
  double prefactor = 0.0;
};
// L2 over (k, v) with the v-grid spacing as weight
double f_distance(const PolarField& a, const PolarField& b);
ProfileConvergence profile_convergence(const std::vector<std::pair<double, PolarField>>& snaps);

}  // namespace vortexlab
