// vortexlab: simulate | oracle | weights selftest | report
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "vortexlab/run.hpp"

using namespace vortexlab;

namespace {

void apply_thread_env() {
#ifdef _OPENMP
  // VORTEXLAB_THREADS wins over OMP_NUM_THREADS
  if (const char* s = std::getenv("VORTEXLAB_THREADS")) {
    const int n = std::atoi(s);
    if (n > 0) omp_set_num_threads(n);
  }
#endif
}

RunConfig config_with_override(const std::string& path, const std::string& out) {
  RunConfig c = load_config(path);
  if (!out.empty()) c.output_dir = out;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_env();
  CLI::App app{"vortexlab: point vortex + perturbation simulator and diagnostics"};
  app.require_subcommand(1);

  std::string cfg_path, out_dir, report_dir;

  auto* sim = app.add_subcommand("simulate", "run the dynamics loop");
  sim->add_option("--config", cfg_path, "TOML run configuration")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", out_dir, "override output_dir");

  auto* orc = app.add_subcommand("oracle", "linear oracle decay report");
  orc->add_option("--config", cfg_path, "TOML configuration ([oracle] table)")->required()->check(CLI::ExistingFile);
  orc->add_option("--out", out_dir, "override output_dir");

  auto* wts = app.add_subcommand("weights", "weight functions");
  wts->require_subcommand(1);
  auto* st = wts->add_subcommand("selftest", "exact-property sweep and empirical constants");
  st->add_option("--config", cfg_path, "TOML configuration ([weights], [selftest])")->required()->check(CLI::ExistingFile);
  st->add_option("--out", out_dir, "override output_dir");

  auto* rep = app.add_subcommand("report", "merge a run directory into report.json");
  rep->add_option("dir", report_dir, "run directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      const RunConfig c = config_with_override(cfg_path, out_dir);
      const RunResult r = simulate(c);
      const auto& s = r.summary;
      std::cout << "simulate: " << s["status"].get<std::string>() << ", " << s["rows"] << " rows to t = " << s["t_final"]
                << " in " << s["runtime_s"] << " s -> " << c.output_dir << "\n";
      if (r.exit_code) std::cerr << "simulate failed: " << r.failure << "\n";
      return r.exit_code;
    }
    if (*orc) {
      const RunConfig c = config_with_override(cfg_path, out_dir);
      const auto j = run_oracle(c);
      std::cout << j["slopes"].dump(2) << "\n";
      return 0;
    }
    if (*st) {
      const RunConfig c = config_with_override(cfg_path, out_dir);
      const auto j = run_weights_selftest(c);
      std::cout << "weights selftest: " << j["violations_total"] << " violations, " << j["baseline_mismatches"].size()
                << " baseline mismatches -> " << c.output_dir << "/weights_selftest.json\n";
      return j["violations_total"].get<long>() == 0 && j["baseline_mismatches"].empty() ? 0 : 1;
    }
    if (*rep) {
      const auto j = build_report(report_dir);
      std::cout << "report: present " << j["manifest"]["present"].dump() << ", missing "
                << j["manifest"]["missing"].dump() << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 64;
  }
  return 0;
}
