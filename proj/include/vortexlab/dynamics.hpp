#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "vortexlab/grid_fields.hpp"
#include "vortexlab/poisson.hpp"

namespace vortexlab {

enum class Splitting {
  strang,            // rotation clock frozen at the midpoint during the RK4 step
  integrating_factor // clock follows each RK4 stage (Lawson RK4)
};

struct DynamicsOptions {
  bool nonlinear = true;  // self-induced transport by psi'
  bool drift = true;      // P' terms and the vortex ODE
  Splitting splitting = Splitting::integrating_factor;
  double relative_mode_floor = 1e-14;  // stream modes below this (relative) are skipped: FFT round-off noise
  double row_floor = 1e-30;            // radial rows below this (relative) carry no transport
  double vartheta0 = 0.125;            // support monitor annulus [vartheta0/2, 2/vartheta0]
  bool flux_form_mean = true;          // k = 0 transport as (1/r) d_r <d_theta psi omega>
};

struct SimState {
  double t = 0.0;
  PolarField g;  // vorticity unwound by the rotation clock t
  VortexState vortex;
  std::vector<double> mean_flow_integral;   // int_0^t <d_r psi>(s,r)/r ds
  std::vector<double> mean_omega_integral;  // int_0^t <omega>(s,r)/r ds
  std::vector<double> mean_flow_now;        // <d_r psi>(t,r)

  Rotation rotation() const { return {vortex.kappa, t}; }
  PolarField omega() const { return rotate(g, rotation()); }
  const Grid& grid() const { return g.grid(); }
};

enum class InitialProfile { bump, plateau };

// omega_0 = eps cos(m theta) b(r), b supported in [lo, hi] with peak 1
PolarField initial_vorticity(const Grid& grid, double eps, int m, InitialProfile profile = InitialProfile::bump,
                             double lo = 0.5, double hi = 2.0);
double initial_radial_profile(InitialProfile profile, double lo, double hi, double r);

SimState make_state(const PolarField& omega0, double kappa);

struct Drift {
  double dP1 = 0.0, dP2 = 0.0;
};
// P' = (1/2pi) int int (sin, -cos) omega dtheta dr = (-int Im omega_1 dr, -int Re omega_1 dr)
Drift vortex_drift(const PolarField& omega);
Drift vortex_drift(const PolarField& g, const Rotation& rot);

// d_t omega' of the full perturbation equation, lab frame (includes the rotation term)
PolarField rhs(const PolarField& omega, const StreamSolution& stream, const Drift& Pdot, double kappa);

// Non-rotational part of the right-hand side for an unwound field at clock rot.clock,
// returned unwound (R^{-1} N(R g)).
PolarField transport_rhs(const PolarField& g, const Rotation& rot, const StreamSolution& stream, const Drift& Pdot,
                         const DynamicsOptions& opt);

struct CflError : std::runtime_error {
  double stable_dt;
  CflError(const std::string& m, double dt) : std::runtime_error(m), stable_dt(dt) {}
};

double cfl_limit(const SimState& s, const DynamicsOptions& opt);
SimState step(const SimState& s, double dt, const DynamicsOptions& opt);

struct Conserved {
  double mass = 0.0, enstrophy = 0.0, moment_x = 0.0, moment_y = 0.0;
};
Conserved conserved_quantities(const SimState& s);
// scale for relative moment drift: |M| + int r |omega| dA
double moment_scale(const SimState& s);

struct SupportExtent {
  double r_lo = 0.0, r_hi = 0.0;
  bool empty = true;
};
SupportExtent support_extent(const SimState& s, double rel_threshold = 1e-12);
bool support_ok(const SimState& s, const DynamicsOptions& opt);

}  // namespace vortexlab
