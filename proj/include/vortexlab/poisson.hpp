#pragma once

#include <span>
#include <vector>

#include "vortexlab/grid_fields.hpp"

namespace vortexlab {

// Differential rotation of the unperturbed vortex, Omega(r) = kappa / (2 pi r^2).
// A field stored "unwound" at clock tau has lab modes
//   omega_k(r) = g_k(r) exp(-i k tau Omega(r)).
struct Rotation {
  double kappa = 0.0;
  double clock = 0.0;
  // phase coefficient: k tau Omega(r) = alpha / r^2
  double alpha(int k) const;
  double omega(double r) const;
  cplx phase(int k, double r) const;  // exp(-i k tau Omega(r))
};

PolarField rotate(const PolarField& g, const Rotation& rot);    // unwound -> lab
PolarField unrotate(const PolarField& w, const Rotation& rot);  // lab -> unwound

double green_kernel(int k, double r, double rho);
double green_kernel_dr(int k, double r, double rho);

struct StreamMode {
  std::vector<cplx> psi;
  std::vector<cplx> dpsi_dr;
  bool touches_boundary = false;
};

// psi_k = int G_k(r, rho) omega_k(rho) d rho at the grid nodes, where
// omega_k = g exp(-i alpha / rho^2).  alpha = 0 is the plain static solve.
StreamMode solve_stream_mode(const Grid& grid, int k, std::span<const cplx> g, double alpha = 0.0);

// <d_r psi>(r) = (1/r) int_{r_min}^r rho <omega>(rho) d rho
std::vector<double> mean_flow(const Grid& grid, std::span<const double> omega0);
double mean_mass(const Grid& grid, std::span<const double> omega0);  // 2 pi int rho <omega> d rho

struct Velocity {
  PolarField u_theta;
  PolarField u_r;
};
Velocity velocity(const PolarField& psi);

struct StreamSolution {
  PolarField psi;
  PolarField u_theta;  // d_r psi, from the kernel derivative
  PolarField u_r;      // -(ik/r) psi_k
  double mode_floor_used = 0.0;
};

struct StreamOptions {
  // modes whose max |g_k| is below floor * max_k |g_k| are treated as zero
  double relative_mode_floor = 0.0;
};

// input is the unwound field g at clock rot.clock; output in the lab frame
StreamSolution solve_stream(const PolarField& g, const Rotation& rot, const StreamOptions& opt = {});

}  // namespace vortexlab
