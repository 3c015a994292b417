#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "vortexlab/energies.hpp"
#include "vortexlab/grid_fields.hpp"

namespace vortexlab {

// omega_{0,k}(rho) supported in [lo, hi]; the k < 0 mode is the conjugate
struct ModeData {
  int k = 1;
  std::function<cplx(double)> profile;
  double lo = 0.5, hi = 2.0;
};

// omega_0 = eps cos(m theta) b(r) with the simulator's default bump b on [lo, hi]
std::vector<ModeData> default_initial_modes(double eps, int m, double lo = 0.5, double hi = 2.0);

double linear_vorticity(double t, double theta, double r, const std::vector<ModeData>& omega0, double kappa);

struct OracleQuadrature {
  double wavelength_fraction = 0.25;  // panel width cap, fraction of 2 pi^2 rho^3 / (|k| kappa t)
  int min_panels = 64;                // width also capped at (hi - lo) / min_panels
  long max_panels = 4'000'000;
};

struct UnresolvedOscillation : std::runtime_error {
  double max_reliable_t;
  UnresolvedOscillation(const std::string& m, double t) : std::runtime_error(m), max_reliable_t(t) {}
};

struct StreamProfile {
  std::vector<double> r;
  std::vector<cplx> psi, dpsi_dr;
};

// psi_k(t, r) = int G_k(r, rho) omega_{0,k}(rho) e^{-ik kappa t / (2 pi rho^2)} d rho and its r-derivative
// (kernel derivative under the integral), at all requested radii.
StreamProfile linear_stream_profile(double t, const ModeData& mode, std::vector<double> r, double kappa,
                                    const OracleQuadrature& q = {});
cplx linear_stream_mode(double t, const ModeData& mode, double r, double kappa, const OracleQuadrature& q = {});

struct OracleSpec {
  double kappa = 1.0;
  std::vector<ModeData> modes;
  std::vector<double> times;      // default: geometric ladder, ratio 2^{1/4}, [1, 1000]
  std::vector<double> r_samples;  // default: 512 uniform points on [1/16, 16]
  double fit_lo = 20.0, fit_hi = 500.0;
  OracleQuadrature quad;
  int n_theta = 64;  // angular samples for the reconstructed velocity
};
std::vector<double> geometric_ladder(double t0, double t1, double ratio);
OracleSpec default_oracle_spec(double eps = 1e-3, int m = 1, double kappa = 1.0);

struct OracleSeriesRow {
  double t = 0.0;
  std::vector<double> sup_psi, sup_dpsi;  // per mode of the spec
  double sup_ur = 0.0, sup_utheta = 0.0;  // |u_r|, |u_theta - <u_theta>|
};

struct OracleReport {
  std::vector<OracleSeriesRow> rows;
  std::vector<int> ks;
  std::vector<SlopeFit> slope_psi, slope_dpsi;
  SlopeFit slope_ur, slope_utheta;
  double fit_lo = 0.0, fit_hi = 0.0;
  double runtime_s = 0.0;
  nlohmann::json to_json() const;
  void write_csv(const std::string& path) const;
};
OracleReport oracle_decay_report(const OracleSpec& spec);

}  // namespace vortexlab
