#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "vortexlab/coordinates.hpp"
#include "vortexlab/gevrey.hpp"
#include "vortexlab/weights.hpp"

namespace vortexlab {

// A weighted spectral sum and the matching |dA/dt| A integrand at one time.
struct EnergyTerm {
  double E = 0.0;
  double Bdot = 0.0;
  bool tail_warning = false;  // > 1e-3 of the weighted content in the outer 10% of the spectrum
};

// Localising cutoffs of the phi and rho* energies, Gevrey class a = 4 (> 3/4 decay exponent needed)
ScaledCutoff cutoff_psi(double kappa, double c0, double vartheta0);         // 1 on [u_lo/2, 2 u_hi]
ScaledCutoff cutoff_psi_dagger(double kappa, double c0, double vartheta0);  // 1 on [u_lo/8, 8 u_hi]

// F on a uniform v-grid (PolarField whose radial axis is v)
EnergyTerm energy_F(const PolarField& F, double t, const WeightParams& p);
// phi on a uniform v-grid; multiplied by Psi(v), k = 0 removed
EnergyTerm energy_phi(const PolarField& phi, double t, const WeightParams& p, const ScaledCutoff& Psi);

enum class Scalar { Vstar, rhostar, Wstar };
// profile on the uniform grid v_i = v0 + i dv; rho* is multiplied by cutoff (if given) first
EnergyTerm energy_scalar(std::span<const double> profile, double v0, double dv, Scalar which, double t,
                         const WeightParams& p, const ScaledCutoff* cutoff = nullptr);

inline constexpr std::array<const char*, 5> energy_names{"F", "phi", "Vstar", "rhostar", "Wstar"};

struct EnergyRecord {
  double t = 0.0;
  std::array<double, 5> E{};
  std::array<double, 5> B{};
  std::array<double, 5> Bdot{};
  double K_const = 1.0;
  bool tail_warning = false;
};

// trapezoid in s from s = 1; before t = 1 the B's stay 0
EnergyRecord accumulate_B(const EnergyRecord* prev, double t, const std::array<EnergyTerm, 5>& now, double K_const);

// The five energies of a simulation state.
std::array<EnergyTerm, 5> energies_of(const SimState& s, const CoordinateMap& m, const WeightParams& p,
                                      double vartheta0);

// psi pulled back to (z, v); beyond the radial grid the exterior/interior harmonic
// continuation psi_k ~ r^{-|k|}, r^{|k|} is used
PolarField pullback_stream(const PolarField& psi, const CoordinateMap& m, const VGrid& vg);

struct SlopeFit {
  double slope = 0.0;
  double width = 0.0;  // 95% half-width of the slope
  int n = 0;
};
// least squares of log value against log t over t in [t_a, t_b]
SlopeFit decay_fit(std::span<const double> t, std::span<const double> value, double t_a, double t_b);

}  // namespace vortexlab
