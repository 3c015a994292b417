#include "vortexlab/run.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "vortexlab/coordinates.hpp"
#include "vortexlab/energies.hpp"

namespace vortexlab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---- config ----

void check_keys(const toml::table& t, const std::string& where, const std::set<std::string>& allowed) {
  for (auto&& [k, v] : t) {
    (void)v;
    if (!allowed.count(std::string(k.str())))
      throw std::invalid_argument("config: unknown key '" + std::string(k.str()) + "' in " + where);
  }
}

template <class T>
void get(const toml::table& t, const char* key, T& out) {
  const auto* node = t.get(key);
  if (!node) return;
  if constexpr (std::is_same_v<T, bool>) {
    auto v = node->value<bool>();
    if (!v) throw std::invalid_argument(std::string("config: '") + key + "' must be a boolean");
    out = *v;
  } else if constexpr (std::is_same_v<T, std::string>) {
    auto v = node->value<std::string>();
    if (!v) throw std::invalid_argument(std::string("config: '") + key + "' must be a string");
    out = *v;
  } else if constexpr (std::is_integral_v<T>) {
    auto v = node->value<int64_t>();
    if (!v) throw std::invalid_argument(std::string("config: '") + key + "' must be an integer");
    out = static_cast<T>(*v);
  } else {
    auto v = node->value<double>();  // integers convert
    if (!v) throw std::invalid_argument(std::string("config: '") + key + "' must be a number");
    out = *v;
  }
}

std::vector<double> get_list(const toml::table& t, const char* key, std::vector<double> dflt) {
  const auto* node = t.get(key);
  if (!node) return dflt;
  const auto* arr = node->as_array();
  if (!arr) throw std::invalid_argument(std::string("config: '") + key + "' must be an array");
  std::vector<double> out;
  for (auto&& e : *arr) {
    auto v = e.value<double>();
    if (!v) throw std::invalid_argument(std::string("config: '") + key + "' must hold numbers");
    out.push_back(*v);
  }
  return out;
}

const toml::table* sub(const toml::table& t, const char* name) {
  const auto* n = t.get(name);
  if (!n) return nullptr;
  const auto* tb = n->as_table();
  if (!tb) throw std::invalid_argument(std::string("config: '") + name + "' must be a table");
  return tb;
}

const char* profile_name(InitialProfile p) { return p == InitialProfile::bump ? "bump" : "plateau"; }

// ---- csv ----

std::string fmt17(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

double abs_mass(const SimState& s) {
  const Grid& g = s.grid();
  const auto phys = to_physical(s.omega());
  double acc = 0.0;
  for (int i = 0; i < g.n_theta; ++i)
    for (int j = 0; j < g.n_r; ++j) acc += std::abs(phys[static_cast<std::size_t>(i) * g.n_r + j]) * g.r(j);
  return acc * g.dtheta() * g.h();
}

double max_abs_physical(PolarField f, bool drop_mean) {
  if (drop_mean)
    for (auto& c : f.row(0)) c = 0.0;
  double m = 0.0;
  for (double x : to_physical(f)) m = std::max(m, std::abs(x));
  return m;
}

std::string snap_name(const std::string& q, double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_t%09.3f.snap", q.c_str(), t);
  return buf;
}

void write_field_snap(const fs::path& dir, const std::string& q, double t, const PolarField& f) {
  const Grid& g = f.grid();
  SnapHeader h{g.n_theta, g.n_r, g.r_min, g.r_max, t, q};
  write_snapshot((dir / snap_name(q, t)).string(), h, to_physical(f));
}

json fit_json(const std::vector<double>& t, const std::vector<double>& v, double a, double b) {
  try {
    const SlopeFit f = decay_fit(t, v, a, b);
    return {{"slope", f.slope}, {"ci95", f.width}, {"n", f.n}};
  } catch (const std::exception& e) {
    return {{"slope", nullptr}, {"error", e.what()}};
  }
}

json read_json(const fs::path& p) {
  std::ifstream is(p);
  return json::parse(is);
}

void write_json(const fs::path& p, const json& j) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << j.dump(2) << '\n';
}

}  // namespace

// ---------------------------------------------------------------- config

OracleSpec OracleConfig::spec() const {
  OracleSpec s;
  s.kappa = kappa;
  s.modes = default_initial_modes(epsilon, m);
  s.times = geometric_ladder(t0, t1, ratio);
  for (int i = 0; i < n_r; ++i) s.r_samples.push_back(r_lo + (r_hi - r_lo) * i / (n_r - 1));
  s.fit_lo = fit_lo;
  s.fit_hi = fit_hi;
  s.quad.wavelength_fraction = wavelength_fraction;
  s.n_theta = n_theta;
  return s;
}

void RunConfig::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("config: " + m); };
  if (schema != current_schema) fail("unsupported schema " + std::to_string(schema));
  if (!(vartheta0 > 0.0 && vartheta0 <= 0.125)) fail("vartheta0 must lie in (0, 1/8]");
  if (!(epsilon >= 0.0)) fail("epsilon must be >= 0");
  if (kappa == 0.0 || !std::isfinite(kappa)) fail("kappa must be finite and nonzero");
  if (!(dt > 0.0)) fail("dt must be > 0");
  if (!(t_end > 0.0)) fail("t_end must be > 0");
  if (!(cadence > 0.0) || cadence > t_end) fail("cadence must lie in (0, t_end]");
  if (snapshot_every < 0.0) fail("snapshot_every must be >= 0");
  if (!(support_lo >= vartheta0 && support_hi <= 1.0 / vartheta0 && support_lo < support_hi))
    fail("initial support must lie inside [vartheta0, 1/vartheta0]");
  grid.validate();
  if (!(grid.r_min <= 0.5 * vartheta0 && grid.r_max >= support_hi)) fail("radial grid must cover the initial support");
  if (m < 0 || m > grid.kmax()) fail("m outside the retained modes");
  if (!(fit_lo < fit_hi)) fail("fit window must be increasing");
  weights.validate();
  if (!(oracle.t0 > 0 && oracle.t1 > oracle.t0 && oracle.ratio > 1.0)) fail("oracle time ladder invalid");
  if (oracle.n_r < 2 || !(oracle.r_lo > 0 && oracle.r_hi > oracle.r_lo)) fail("oracle radii invalid");
  if (oracle.m < 0) fail("oracle m must be >= 0");
}

json RunConfig::to_json() const {
  return {{"schema", schema},
          {"output_dir", output_dir},
          {"seed", seed},
          {"physics",
           {{"kappa", kappa},
            {"vartheta0", vartheta0},
            {"epsilon", epsilon},
            {"m", m},
            {"initial_profile", profile_name(initial_profile)},
            {"support", {support_lo, support_hi}}}},
          {"grid",
           {{"n_theta", grid.n_theta},
            {"n_r", grid.n_r},
            {"r_min", grid.r_min},
            {"r_max", grid.r_max},
            {"dealias_fraction", grid.dealias_fraction}}},
          {"time", {{"dt", dt}, {"t_end", t_end}, {"cadence", cadence}, {"snapshot_every", snapshot_every}}},
          {"dynamics",
           {{"nonlinear", dynamics.nonlinear},
            {"drift", dynamics.drift},
            {"splitting", dynamics.splitting == Splitting::strang ? "strang" : "integrating_factor"},
            {"flux_form_mean", dynamics.flux_form_mean}}},
          {"diagnostics", {{"energies", energies}, {"fit_window", {fit_lo, fit_hi}}, {"blowup_factor", blowup_factor}}},
          {"weights",
           {{"delta0", weights.delta0},
            {"delta", weights.delta},
            {"delta_prime", weights.delta_prime},
            {"sigma0", weights.sigma0},
            {"K_const", weights.K_const}}},
          {"oracle",
           {{"epsilon", oracle.epsilon},
            {"m", oracle.m},
            {"kappa", oracle.kappa},
            {"t_range", {oracle.t0, oracle.t1}},
            {"ratio", oracle.ratio},
            {"n_r", oracle.n_r},
            {"r_range", {oracle.r_lo, oracle.r_hi}},
            {"fit_window", {oracle.fit_lo, oracle.fit_hi}},
            {"wavelength_fraction", oracle.wavelength_fraction},
            {"n_theta", oracle.n_theta}}},
          {"selftest",
           {{"deltas", sweep.deltas},
            {"eta_factors", sweep.eta_factors},
            {"n_t", sweep.n_t},
            {"k_range", {sweep.k_min, sweep.k_max}},
            {"compare_offsets", sweep.compare_offsets},
            {"baseline", weights_baseline}}}};
}

RunConfig parse_config(const std::string& text) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + std::string(e.description()));
  }
  check_keys(root, "top level",
             {"schema", "output_dir", "seed", "physics", "grid", "time", "dynamics", "diagnostics", "weights", "oracle",
              "selftest"});
  RunConfig c;
  if (!root.get("schema")) throw std::invalid_argument("config: missing 'schema'");
  get(root, "schema", c.schema);
  get(root, "output_dir", c.output_dir);
  get(root, "seed", c.seed);

  if (const auto* t = sub(root, "physics")) {
    check_keys(*t, "[physics]", {"kappa", "vartheta0", "epsilon", "m", "initial_profile", "support"});
    get(*t, "kappa", c.kappa);
    get(*t, "vartheta0", c.vartheta0);
    get(*t, "epsilon", c.epsilon);
    get(*t, "m", c.m);
    std::string prof = profile_name(c.initial_profile);
    get(*t, "initial_profile", prof);
    if (prof == "bump")
      c.initial_profile = InitialProfile::bump;
    else if (prof == "plateau")
      c.initial_profile = InitialProfile::plateau;
    else
      throw std::invalid_argument("config: initial_profile must be 'bump' or 'plateau'");
    auto s = get_list(*t, "support", {c.support_lo, c.support_hi});
    if (s.size() != 2) throw std::invalid_argument("config: support must have two entries");
    c.support_lo = s[0];
    c.support_hi = s[1];
  }
  if (const auto* t = sub(root, "grid")) {
    check_keys(*t, "[grid]", {"n_theta", "n_r", "r_min", "r_max", "dealias_fraction"});
    get(*t, "n_theta", c.grid.n_theta);
    get(*t, "n_r", c.grid.n_r);
    get(*t, "r_min", c.grid.r_min);
    get(*t, "r_max", c.grid.r_max);
    get(*t, "dealias_fraction", c.grid.dealias_fraction);
  }
  if (const auto* t = sub(root, "time")) {
    check_keys(*t, "[time]", {"dt", "t_end", "cadence", "snapshot_every"});
    get(*t, "dt", c.dt);
    get(*t, "t_end", c.t_end);
    get(*t, "cadence", c.cadence);
    get(*t, "snapshot_every", c.snapshot_every);
  }
  if (const auto* t = sub(root, "dynamics")) {
    check_keys(*t, "[dynamics]", {"nonlinear", "drift", "splitting", "flux_form_mean"});
    get(*t, "nonlinear", c.dynamics.nonlinear);
    get(*t, "drift", c.dynamics.drift);
    get(*t, "flux_form_mean", c.dynamics.flux_form_mean);
    std::string sp = "integrating_factor";
    get(*t, "splitting", sp);
    if (sp == "strang")
      c.dynamics.splitting = Splitting::strang;
    else if (sp == "integrating_factor")
      c.dynamics.splitting = Splitting::integrating_factor;
    else
      throw std::invalid_argument("config: splitting must be 'strang' or 'integrating_factor'");
  }
  if (const auto* t = sub(root, "diagnostics")) {
    check_keys(*t, "[diagnostics]", {"energies", "fit_window", "blowup_factor"});
    get(*t, "energies", c.energies);
    get(*t, "blowup_factor", c.blowup_factor);
    auto w = get_list(*t, "fit_window", {c.fit_lo, c.fit_hi});
    if (w.size() != 2) throw std::invalid_argument("config: fit_window must have two entries");
    c.fit_lo = w[0];
    c.fit_hi = w[1];
  }
  bool dprime_set = false;
  if (const auto* t = sub(root, "weights")) {
    check_keys(*t, "[weights]", {"delta0", "delta", "delta_prime", "sigma0", "K_const"});
    get(*t, "delta0", c.weights.delta0);
    get(*t, "delta", c.weights.delta);
    dprime_set = t->get("delta_prime") != nullptr;
    get(*t, "delta_prime", c.weights.delta_prime);
    get(*t, "sigma0", c.weights.sigma0);
    get(*t, "K_const", c.weights.K_const);
  }
  if (!dprime_set) c.weights.delta_prime = c.weights.delta / 10.0;
  if (const auto* t = sub(root, "oracle")) {
    check_keys(*t, "[oracle]",
               {"epsilon", "m", "kappa", "t_range", "ratio", "n_r", "r_range", "fit_window", "wavelength_fraction",
                "n_theta"});
    auto& o = c.oracle;
    get(*t, "epsilon", o.epsilon);
    get(*t, "m", o.m);
    get(*t, "kappa", o.kappa);
    get(*t, "ratio", o.ratio);
    get(*t, "n_r", o.n_r);
    get(*t, "wavelength_fraction", o.wavelength_fraction);
    get(*t, "n_theta", o.n_theta);
    auto pair = [&](const char* key, double& a, double& b) {
      auto v = get_list(*t, key, {a, b});
      if (v.size() != 2) throw std::invalid_argument(std::string("config: ") + key + " must have two entries");
      a = v[0];
      b = v[1];
    };
    pair("t_range", o.t0, o.t1);
    pair("r_range", o.r_lo, o.r_hi);
    pair("fit_window", o.fit_lo, o.fit_hi);
  }
  if (const auto* t = sub(root, "selftest")) {
    check_keys(*t, "[selftest]", {"deltas", "eta_factors", "n_t", "k_range", "compare_offsets", "baseline"});
    c.sweep.deltas = get_list(*t, "deltas", c.sweep.deltas);
    c.sweep.eta_factors = get_list(*t, "eta_factors", c.sweep.eta_factors);
    c.sweep.compare_offsets = get_list(*t, "compare_offsets", c.sweep.compare_offsets);
    get(*t, "n_t", c.sweep.n_t);
    auto kr = get_list(*t, "k_range", {double(c.sweep.k_min), double(c.sweep.k_max)});
    if (kr.size() != 2) throw std::invalid_argument("config: k_range must have two entries");
    c.sweep.k_min = static_cast<int>(kr[0]);
    c.sweep.k_max = static_cast<int>(kr[1]);
    get(*t, "baseline", c.weights_baseline);
  }
  c.dynamics.vartheta0 = c.vartheta0;
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

// ---------------------------------------------------------------- P infinity

PInfinity estimate_P_infinity(const PolarField& omega0, double kappa) {
  const SimState s = make_state(omega0, kappa);
  const Conserved c = conserved_quantities(s);  // P = 0: moments of omega_0 alone
  const double kc = kappa + s.vortex.c0;
  return {c.moment_x / kc, c.moment_y / kc};
}

PInfinity estimate_P_infinity(const RunConfig& cfg) { return estimate_P_infinity(initial_field(cfg), cfg.kappa); }

PInfinity late_time_average(const std::vector<double>& t, const std::vector<double>& P1,
                            const std::vector<double>& P2, double t_from) {
  PInfinity p;
  int n = 0;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= t_from) {
      p.P1 += P1[i];
      p.P2 += P2[i];
      ++n;
    }
  if (n > 0) {
    p.P1 /= n;
    p.P2 /= n;
  }
  return p;
}

PolarField initial_field(const RunConfig& cfg) {
  return initial_vorticity(cfg.grid, cfg.epsilon, cfg.m, cfg.initial_profile, cfg.support_lo, cfg.support_hi);
}

std::vector<std::string> series_columns() {
  std::vector<std::string> c{"t",         "P1",         "P2",        "abs_dP",       "mass",
                             "enstrophy", "moment_x",   "moment_y",  "max_utheta_nonradial",
                             "max_ur",    "support_r_lo", "support_r_hi", "vstar_crosscheck", "pv2_residual"};
  for (const char* n : energy_names) c.push_back(std::string("E_") + n);
  for (const char* n : energy_names) c.push_back(std::string("B_") + n);
  for (const char* n : energy_names) c.push_back(std::string("Bdot_") + n);
  c.insert(c.end(), {"K_const", "tail_warning", "profile_distance"});
  return c;
}

// ---------------------------------------------------------------- simulate

RunResult simulate(const RunConfig& cfg_in) {
  const auto clock0 = std::chrono::steady_clock::now();
  RunConfig cfg = cfg_in;
  cfg.dynamics.vartheta0 = cfg.vartheta0;
  cfg.validate();
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);

  std::ofstream csv(dir / "series.csv");
  if (!csv) throw std::runtime_error("cannot write series.csv in " + dir.string());
  const auto cols = series_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) csv << (i ? "," : "") << cols[i];
  csv << '\n' << std::flush;

  SimState s = make_state(initial_field(cfg), cfg.kappa);
  const Conserved c0 = conserved_quantities(s);
  const double mass_scale = std::max(std::abs(c0.mass), abs_mass(s));
  const double mom_scale = moment_scale(s);
  const double norm0 = s.g.l2();
  const PInfinity Pinf = estimate_P_infinity(s.g, cfg.kappa);
  const VGrid vg = default_vgrid(cfg.kappa, s.vortex.c0, cfg.vartheta0);

  const int n_out = static_cast<int>(std::floor(cfg.t_end / cfg.cadence + 1e-9));
  const int sub_steps = std::max(1, static_cast<int>(std::ceil(cfg.cadence / cfg.dt - 1e-9)));
  const double h = cfg.cadence / sub_steps;
  const int snap_stride =
      cfg.snapshot_every > 0 ? std::max(1, static_cast<int>(std::lround(cfg.snapshot_every / cfg.cadence))) : 0;

  std::vector<double> ts, P1s, P2s, uth, urs;
  double d_mass = 0, d_ens = 0, d_mom = 0, vstar_max = 0, pv2_max = 0;
  double r_lo_min = INFINITY, r_hi_max = 0;
  bool support_all = true, tail_any = false;
  EnergyRecord rec;
  bool have_rec = false;
  PolarField prevF;
  bool have_prevF = false;
  std::vector<std::pair<double, PolarField>> fsnaps;
  std::string failure;
  int exit_code = 0;
  SimState last_good = s;

  auto record = [&](int i_out) -> bool {
    const double t = s.t;
    const StreamSolution st = solve_stream(s.g, s.rotation());
    const Drift dP = vortex_drift(s.g, s.rotation());
    const Conserved c = conserved_quantities(s);
    const SupportExtent se = support_extent(s);
    const double ut = max_abs_physical(st.u_theta, true), ur = max_abs_physical(st.u_r, false);

    std::array<EnergyTerm, 5> en{};
    double vstar = 0.0, pv2 = 0.0, dist = 0.0;
    PolarField F;
    try {
      const CoordinateMap m = build_map(s);
      if (t > 0.0) vstar = vstar_crosscheck(m);
      pv2 = pv2_residual(m, vg, cfg.vartheta0);
      F = pullback_F(s.omega(), m, vg);
      if (cfg.energies) en = energies_of(s, m, cfg.weights, cfg.vartheta0);
    } catch (const NonMonotoneMap& e) {
      failure = std::string("coordinate map: ") + e.what();
      exit_code = 6;
      return false;
    }
    if (have_prevF) dist = f_distance(F, prevF);
    rec = accumulate_B(have_rec ? &rec : nullptr, t, en, cfg.weights.K_const);
    have_rec = true;

    std::vector<double> row{t, s.vortex.P1, s.vortex.P2, std::hypot(dP.dP1, dP.dP2), c.mass, c.enstrophy,
                            c.moment_x, c.moment_y, ut, ur, se.empty ? 0.0 : se.r_lo, se.empty ? 0.0 : se.r_hi,
                            vstar, pv2};
    for (double x : rec.E) row.push_back(x);
    for (double x : rec.B) row.push_back(x);
    for (double x : rec.Bdot) row.push_back(x);
    row.insert(row.end(), {rec.K_const, rec.tail_warning ? 1.0 : 0.0, dist});
    for (double x : row)
      if (!std::isfinite(x)) {
        failure = "non-finite diagnostic at t = " + fmt17(t);
        exit_code = 4;
        return false;
      }
    for (std::size_t i = 0; i < row.size(); ++i) csv << (i ? "," : "") << fmt17(row[i]);
    csv << '\n' << std::flush;

    ts.push_back(t);
    P1s.push_back(s.vortex.P1);
    P2s.push_back(s.vortex.P2);
    uth.push_back(ut);
    urs.push_back(ur);
    d_mass = std::max(d_mass, mass_scale > 0 ? std::abs(c.mass - c0.mass) / mass_scale : 0.0);
    d_ens = std::max(d_ens, c0.enstrophy > 0 ? std::abs(c.enstrophy - c0.enstrophy) / c0.enstrophy : 0.0);
    d_mom = std::max(d_mom, mom_scale > 0 ? std::hypot(c.moment_x - c0.moment_x, c.moment_y - c0.moment_y) / mom_scale
                                          : 0.0);
    vstar_max = std::max(vstar_max, vstar);
    pv2_max = std::max(pv2_max, pv2);
    if (!se.empty) {
      r_lo_min = std::min(r_lo_min, se.r_lo);
      r_hi_max = std::max(r_hi_max, se.r_hi);
    }
    tail_any = tail_any || rec.tail_warning;

    if (snap_stride && (i_out % snap_stride == 0 || i_out == n_out)) {
      write_field_snap(dir, "omega", t, s.omega());
      write_field_snap(dir, "F_zv", t, F);
      if (t >= cfg.fit_lo) fsnaps.emplace_back(t, F);
    }
    prevF = std::move(F);
    have_prevF = true;

    if (!support_ok(s, cfg.dynamics)) {
      support_all = false;
      failure = "vorticity support left the annulus at t = " + fmt17(t);
      exit_code = 3;
      return false;
    }
    return true;
  };

  bool ok = record(0);
  for (int i = 1; ok && i <= n_out; ++i) {
    try {
      for (int k = 0; k < sub_steps; ++k) {
        SimState nx = step(s, h, cfg.dynamics);
        if (k == sub_steps - 1) nx.t = i * cfg.cadence;  // no clock drift between rows
        const double nrm = nx.g.l2();
        if (!std::isfinite(nrm)) throw std::runtime_error("non-finite field");
        if (norm0 > 0 && nrm > cfg.blowup_factor * norm0) {
          failure = "norm exceeded blow-up guard at t = " + fmt17(nx.t);
          exit_code = 5;
          ok = false;
          break;
        }
        s = std::move(nx);
      }
    } catch (const CflError& e) {
      failure = std::string("CFL: ") + e.what();
      exit_code = 2;
      ok = false;
    } catch (const std::runtime_error& e) {
      failure = e.what();
      exit_code = 4;
      ok = false;
    }
    if (!ok) break;
    ok = record(i);
    if (ok) last_good = s;
  }
  if (!ok) write_field_snap(dir, "omega_last_good", last_good.t, last_good.omega());

  json summary;
  summary["status"] = ok ? "ok" : "failed";
  summary["failure"] = failure;
  summary["exit_code"] = exit_code;
  summary["config"] = cfg.to_json();
  summary["rows"] = ts.size();
  summary["t_final"] = ts.empty() ? 0.0 : ts.back();
  summary["time_step"] = h;
  summary["drifts"] = {{"mass", d_mass},
                       {"enstrophy", d_ens},
                       {"moment", d_mom},
                       {"mass_scale", mass_scale},
                       {"moment_scale", mom_scale}};
  summary["support"] = {{"ok", support_all},
                        {"annulus", {0.5 * cfg.vartheta0, 2.0 / cfg.vartheta0}},
                        {"r_lo_min", std::isfinite(r_lo_min) ? json(r_lo_min) : json(nullptr)},
                        {"r_hi_max", r_hi_max > 0 ? json(r_hi_max) : json(nullptr)}};
  summary["decay"] = {{"window", {cfg.fit_lo, cfg.fit_hi}},
                      {"max_utheta_nonradial", fit_json(ts, uth, cfg.fit_lo, cfg.fit_hi)},
                      {"max_ur", fit_json(ts, urs, cfg.fit_lo, cfg.fit_hi)}};
  const PInfinity late = late_time_average(ts, P1s, P2s, 0.5 * (ts.empty() ? 0.0 : ts.back()));
  const double dfin = ts.empty() ? 0.0 : std::hypot(P1s.back() - Pinf.P1, P2s.back() - Pinf.P2);
  summary["P_infinity"] = {{"estimate", {Pinf.P1, Pinf.P2}},
                           {"late_time_average", {late.P1, late.P2}},
                           {"final", ts.empty() ? json(nullptr) : json({P1s.back(), P2s.back()})},
                           {"final_distance", dfin},
                           {"final_distance_over_eps", cfg.epsilon > 0 ? json(dfin / cfg.epsilon) : json(nullptr)}};
  json pc = {{"times", json::array()}};
  for (const auto& [t, F] : fsnaps) pc["times"].push_back(t);
  if (fsnaps.size() >= 3) {
    try {
      const auto r = profile_convergence(fsnaps);
      pc["slope"] = r.slope;
      pc["prefactor"] = r.prefactor;
      pc["to_last"] = r.to_last;
    } catch (const std::exception& e) {
      pc["slope"] = nullptr;
      pc["error"] = e.what();
    }
  } else {
    pc["slope"] = nullptr;
    pc["error"] = "fewer than 3 snapshots in the fit window";
  }
  summary["coordinates"] = {{"vstar_crosscheck_max", vstar_max}, {"pv2_residual_max", pv2_max}, {"profile_convergence", pc}};
  if (have_rec) {
    json e;
    for (int i = 0; i < 5; ++i) e[energy_names[i]] = {{"E", rec.E[i]}, {"B", rec.B[i]}};
    summary["energies_final"] = e;
  }
  summary["energy_tail_warning"] = tail_any;
  summary["runtime_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock0).count();
  write_json(dir / "summary.json", summary);
  return {exit_code, failure, summary};
}

// ---------------------------------------------------------------- oracle, selftest

json run_oracle(const RunConfig& cfg) {
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  const OracleReport rep = oracle_decay_report(cfg.oracle.spec());
  json j = rep.to_json();
  j["config"] = cfg.to_json()["oracle"];
  j["time_ladder"] = {{"t0", cfg.oracle.t0}, {"t1", cfg.oracle.t1}, {"ratio", cfg.oracle.ratio}};
  write_json(dir / "oracle_report.json", j);
  rep.write_csv((dir / "oracle_series.csv").string());
  return j;
}

json run_weights_selftest(const RunConfig& cfg) {
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  json rep = weight_selftest(cfg.weights, cfg.sweep);
  rep["baseline"] = cfg.weights_baseline;
  rep["baseline_mismatches"] = json::array();
  if (!cfg.weights_baseline.empty()) {
    if (!fs::exists(cfg.weights_baseline)) {
      rep["baseline_mismatches"].push_back("baseline file missing: " + cfg.weights_baseline);
    } else {
      for (const auto& m : compare_to_baseline(rep, read_json(cfg.weights_baseline)))
        rep["baseline_mismatches"].push_back(m);
    }
  }
  write_json(dir / "weights_selftest.json", rep);
  return rep;
}

// ---------------------------------------------------------------- report

std::vector<double> CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) {
      std::vector<double> out;
      out.reserve(rows.size());
      for (const auto& r : rows) out.push_back(r.at(i));
      return out;
    }
  throw std::out_of_range("no column " + name);
}

CsvTable read_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  CsvTable t;
  std::string line;
  if (!std::getline(is, line)) return t;
  {
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) t.header.push_back(c);
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> r;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) r.push_back(std::stod(c));
    if (r.size() != t.header.size()) break;  // truncated last row of an aborted run
    t.rows.push_back(std::move(r));
  }
  return t;
}

json build_report(const std::string& dir_s) {
  const fs::path dir(dir_s);
  if (!fs::is_directory(dir)) throw std::invalid_argument("report: not a directory: " + dir_s);
  const std::vector<std::string> items{"series.csv", "summary.json", "oracle_report.json", "oracle_series.csv",
                                       "weights_selftest.json"};
  json rep;
  rep["schema"] = 1;
  json present = json::array(), missing = json::array();
  for (const auto& f : items) (fs::exists(dir / f) ? present : missing).push_back(f);
  rep["manifest"] = {{"present", present}, {"missing", missing}};
  auto has = [&](const char* f) { return fs::exists(dir / f); };

  json acc = json::object();
  if (has("summary.json")) {
    const json s = read_json(dir / "summary.json");
    rep["run"] = s;
    const json& d = s["drifts"];
    acc["nonlinear_run"] = {{"status", s["status"]},
                            {"mass_drift", d["mass"]},
                            {"enstrophy_drift", d["enstrophy"]},
                            {"moment_drift", d["moment"]},
                            {"support_ok", s["support"]["ok"]},
                            {"slope_max_utheta_nonradial", s["decay"]["max_utheta_nonradial"]["slope"]},
                            {"slope_max_ur", s["decay"]["max_ur"]["slope"]},
                            {"P_final_distance_over_eps", s["P_infinity"]["final_distance_over_eps"]},
                            {"runtime_s", s["runtime_s"]}};
    acc["coordinates"] = {{"vstar_crosscheck_max", s["coordinates"]["vstar_crosscheck_max"]},
                          {"pv2_residual_max", s["coordinates"]["pv2_residual_max"]},
                          {"profile_convergence_slope", s["coordinates"]["profile_convergence"]["slope"]}};
  }
  if (has("oracle_report.json")) {
    const json o = read_json(dir / "oracle_report.json");
    rep["oracle"] = o;
    json sl = json::object();
    for (auto& [k, v] : o["slopes"].items()) sl[k] = v["slope"];
    acc["oracle_slopes"] = sl;
  }
  if (has("weights_selftest.json")) {
    const json w = read_json(dir / "weights_selftest.json");
    json per = json::object();
    for (const auto& sw : w["sweeps"]) {
      json props = json::object();
      for (auto& [k, v] : sw["properties"].items()) props[k] = v["violations"];
      per["delta=" + fmt17(sw["params"]["delta"].get<double>())] = {{"violations", sw["violations"]},
                                                                     {"by_property", props},
                                                                     {"empirical_constants", sw["empirical_constants"]}};
    }
    rep["weights"] = per;
    acc["weights"] = {{"violations_total", w["violations_total"]}, {"baseline_mismatches", w["baseline_mismatches"]}};
  }
  rep["acceptance_metrics"] = acc;

  if (has("series.csv")) {
    const CsvTable t = read_csv((dir / "series.csv").string());
    std::vector<std::string> keep{"t", "P1", "P2", "max_utheta_nonradial", "max_ur", "profile_distance"};
    for (const char* n : energy_names) keep.push_back(std::string("E_") + n);
    std::vector<std::vector<double>> cols;
    std::vector<std::string> names;
    for (const auto& k : keep) try {
        cols.push_back(t.column(k));
        names.push_back(k);
      } catch (const std::out_of_range&) {
      }
    std::ofstream os(dir / "report_series.csv");
    for (std::size_t i = 0; i < names.size(); ++i) os << (i ? "," : "") << names[i];
    os << '\n';
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << fmt17(cols[i][r]);
      os << '\n';
    }
    rep["series_rows"] = t.rows.size();
  }
  write_json(dir / "report.json", rep);
  return rep;
}

}  // namespace vortexlab
