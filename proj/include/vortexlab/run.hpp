#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "vortexlab/dynamics.hpp"
#include "vortexlab/linear_oracle.hpp"
#include "vortexlab/weights.hpp"

namespace vortexlab {

struct OracleConfig {
  double epsilon = 1e-3;
  int m = 1;
  double kappa = 1.0;
  double t0 = 1.0, t1 = 1000.0, ratio = 1.189207115002721;  // 2^{1/4}
  int n_r = 512;
  double r_lo = 1.0 / 16, r_hi = 16.0;
  double fit_lo = 20.0, fit_hi = 500.0;
  double wavelength_fraction = 0.25;
  int n_theta = 64;
  OracleSpec spec() const;
};

struct RunConfig {
  static constexpr int current_schema = 1;
  int schema = current_schema;

  double kappa = 1.0;
  double vartheta0 = 0.125;
  double epsilon = 1e-3;
  int m = 2;
  InitialProfile initial_profile = InitialProfile::bump;
  double support_lo = 0.5, support_hi = 2.0;

  Grid grid;
  double dt = 0.05;
  double t_end = 200.0;
  double cadence = 1.0;         // series row spacing
  double snapshot_every = 10.0;  // .snap spacing (0: none)
  DynamicsOptions dynamics;

  bool energies = true;
  WeightParams weights;
  double fit_lo = 20.0, fit_hi = 200.0;  // decay-fit window of the run
  double blowup_factor = 1e6;

  std::uint64_t seed = 1;
  std::string output_dir = "runs/default";

  OracleConfig oracle;
  WeightSweep sweep;
  std::string weights_baseline;  // selftest baseline JSON (empty: no comparison); paths are relative to the cwd

  void validate() const;
  nlohmann::json to_json() const;
};

RunConfig parse_config(const std::string& toml_text);
RunConfig load_config(const std::string& path);

struct PInfinity {
  double P1 = 0.0, P2 = 0.0;
};
// (kappa + c0)^{-1} int (x, y) omega_0 dA, omega_0 centred at the origin
PInfinity estimate_P_infinity(const PolarField& omega0, double kappa);
PInfinity estimate_P_infinity(const RunConfig& cfg);
// mean of (P1, P2) over the rows with t >= t_from
PInfinity late_time_average(const std::vector<double>& t, const std::vector<double>& P1,
                            const std::vector<double>& P2, double t_from);

PolarField initial_field(const RunConfig& cfg);

std::vector<std::string> series_columns();

struct RunResult {
  int exit_code = 0;
  std::string failure;  // empty on success
  nlohmann::json summary;
};

// Runs the dynamics loop and writes series.csv, .snap files and summary.json into cfg.output_dir.
RunResult simulate(const RunConfig& cfg);

// Writes oracle_report.json and oracle_series.csv into cfg.output_dir.
nlohmann::json run_oracle(const RunConfig& cfg);

// Writes weights_selftest.json into cfg.output_dir; "baseline_mismatches" lists
// empirical constants outside 2x of cfg.weights_baseline.
nlohmann::json run_weights_selftest(const RunConfig& cfg);

// Merges whatever is present in dir into report.json and report_series.csv.
nlohmann::json build_report(const std::string& dir);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<double> column(const std::string& name) const;
};
CsvTable read_csv(const std::string& path);

}  // namespace vortexlab
