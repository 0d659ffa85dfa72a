#pragma once

// Command-line front end: one subcommand per experiment, a flat config file
// with flag overrides, CSV/JSON emission. Exit code 0 iff all hard checks
// pass, 1 on check or I/O failure, 2 on usage/config errors (in which case
// nothing is written).

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dep/claw.hpp"
#include "dep/config_file.hpp"
#include "dep/experiments.hpp"
#include "dep/report.hpp"

namespace dep {

namespace cli_detail {

inline void apply_common(Settings& s, std::uint64_t* master, int* jobs) {
  *master = static_cast<std::uint64_t>(s.integer("common.master_seed"));
  if (const char* env = std::getenv("DEPHYDRO_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0')
      throw ConfigError("DEPHYDRO_SEED must be an unsigned integer");
    *master = v;
  }
  *jobs = static_cast<int>(s.integer("common.jobs"));
  if (*jobs < 1) throw ConfigError("common.jobs must be >= 1");
}

inline EvolveMode parse_mode(const std::string& v) {
  if (v == "gillespie") return EvolveMode::gillespie;
  if (v == "keyed") return EvolveMode::keyed_field;
  throw ConfigError("mode must be 'gillespie' or 'keyed', got '" + v + "'");
}

inline Report run_riemann_cmd(const Settings& s, std::uint64_t master) {
  Report rep;
  rep.experiment = "riemann";
  rep.master_seed = master;
  const double lambda = s.real("riemann.lambda");
  const double rho = s.real("riemann.rho");
  const double t = s.real("riemann.t");
  const std::int64_t grid = s.integer("riemann.grid");
  const double vmin = s.real("riemann.vmin");
  const double vmax = s.real("riemann.vmax");
  if (grid < 2) throw ConfigError("riemann.grid must be >= 2");
  if (!(t > 0)) throw ConfigError("riemann.t must be > 0");
  const auto sol = claw::riemann_solve(lambda, rho);

  auto& table = rep.table("riemann");
  table.columns = {"v", "u"};
  double max_oracle_diff = 0.0;
  const auto breaks = sol.breakpoints();
  for (std::int64_t i = 0; i < grid; ++i) {
    const double v = vmin + (vmax - vmin) * static_cast<double>(i) /
                                static_cast<double>(grid - 1);
    const double u = sol.eval(v);
    table.rows.push_back({v, u});
    bool near_break = false;
    for (double b : breaks) near_break = near_break || std::fabs(v - b) < 1e-6;
    if (!near_break)
      max_oracle_diff =
          std::max(max_oracle_diff,
                   std::fabs(u - claw::riemann_variational(lambda, rho, v)));
  }
  rep.add_check("solver-matches-oracle", "exact",
                max_oracle_diff <= kRiemannOracleTol, max_oracle_diff,
                kRiemannOracleTol, "case solution vs variational oracle");
  return rep;
}

inline Report run_godunov_cmd(const Settings& s, std::uint64_t master) {
  Report rep;
  rep.experiment = "godunov";
  rep.master_seed = master;
  const double lambda = s.real("godunov.lambda");
  const double rho = s.real("godunov.rho");
  const double dx = s.real("godunov.dx");
  const double t = s.real("godunov.t");
  const double half_width = s.real("godunov.half_width");
  const double cfl = s.real("godunov.cfl");

  const auto u0 = DensityProfile::step(lambda, rho);
  claw::GodunovRun run(claw::make_grid(half_width, dx, u0, cfl));
  const double mass0 = run.grid().mass();
  run.advance(t);
  const auto& g = run.grid();

  const double mass_err =
      std::fabs(g.mass() - mass0 - run.boundary_inflow());
  rep.add_check("discrete-conservation", "exact", mass_err < 1e-9, mass_err,
                1e-9, "mass change equals boundary flux integral");
  bool in_range = true;
  for (double u : g.u) in_range = in_range && u >= -1e-12 && u <= 1 + 1e-12;
  rep.add_check("range-preserved", "exact", in_range, in_range ? 0 : 1, 0,
                "cell means stay within [0,1]");

  const auto sol = claw::riemann_solve(lambda, rho);
  auto& table = rep.table("profile");
  table.columns = {"x_macro", "empirical", "reference", "abs_err"};
  for (std::size_t i = 0; i < g.u.size(); ++i) {
    const double x = g.center(i);
    const double ref = sol.at(x, t);
    table.rows.push_back({x, g.u[i], ref, std::fabs(g.u[i] - ref)});
  }
  std::vector<double> edges(g.u.size() + 1);
  for (std::size_t i = 0; i < edges.size(); ++i) edges[i] = g.edge(i);
  const double l1 = claw::l1_cells_vs_solution(edges, g.u, sol, t, -3.0, 3.0);
  auto& st = rep.table("summary");
  st.columns = {"dx", "t", "l1_vs_exact"};
  st.rows.push_back({dx, t, l1});
  return rep;
}

inline Report run_flux_check_cmd(const Settings& s, std::uint64_t master) {
  Report rep;
  rep.experiment = "flux-check";
  rep.master_seed = master;
  const std::int64_t points = s.integer("flux.points");
  if (points < 2) throw ConfigError("flux.points must be >= 2");
  auto& table = rep.table("flux_check");
  table.columns = {"rho", "nu_rho_j", "G_rho", "abs_diff"};
  double max_diff = 0.0;
  for (std::int64_t i = 0; i < points; ++i) {
    const double rho =
        static_cast<double>(i) / static_cast<double>(points - 1);
    const double ev = expected_micro_flux(rho);
    const double g = claw::flux(rho);
    const double d = std::fabs(ev - g);
    max_diff = std::max(max_diff, d);
    table.rows.push_back({rho, ev, g, d});
  }
  rep.add_check("flux-identity", "exact", max_diff < kFluxIdentityTol, max_diff,
                kFluxIdentityTol,
                "enumerated expectation equals the macroscopic flux");
  return rep;
}

inline Report run_stationarity_cmd(const Settings& s, std::uint64_t master,
                                   int jobs) {
  StationarityConfig cfg;
  cfg.exact_n_lo = static_cast<int>(s.integer("stat.exact_n_lo"));
  cfg.exact_n_hi = static_cast<int>(s.integer("stat.exact_n_hi"));
  cfg.ring_sites = s.integer("stat.ring_sites");
  cfg.ring_rho = s.real("stat.ring_rho");
  cfg.ring_t = s.real("stat.ring_t");
  cfg.ring_replicas = s.integer("stat.ring_replicas");
  cfg.current_sites = s.integer("stat.current_sites");
  cfg.current_rhos = s.real_list("stat.current_rhos");
  cfg.current_t = s.real("stat.current_t");
  cfg.current_replicas = s.integer("stat.current_replicas");
  cfg.master = master;
  cfg.jobs = jobs;
  return run_stationarity(cfg);
}

inline Report run_coupling_cmd(const Settings& s, std::uint64_t master, int jobs) {
  CouplingSuiteConfig cfg;
  cfg.trials = s.integer("coupling.trials");
  cfg.trial_t = s.real("coupling.trial_t");
  cfg.ring_sites = s.integer("coupling.ring_sites");
  cfg.gs_pairs = s.integer("coupling.gs_pairs");
  cfg.gs_sites = s.integer("coupling.gs_sites");
  cfg.annihilation_trials = s.integer("coupling.annihilation_trials");
  cfg.annihilation_h = s.real("coupling.annihilation_h");
  cfg.ensemble_trials = s.integer("coupling.ensemble_trials");
  cfg.ensemble_t = s.real("coupling.ensemble_t");
  cfg.ensemble_sites = s.integer("coupling.ensemble_sites");
  cfg.master = master;
  cfg.jobs = jobs;
  return run_coupling_suite(cfg);
}

inline Report run_finite_prop_cmd(const Settings& s, std::uint64_t master,
                                  int jobs) {
  FinitePropConfig cfg;
  cfg.sites = s.integer("fp.sites");
  cfg.agree_lo = s.integer("fp.agree_lo");
  cfg.agree_hi = s.integer("fp.agree_hi");
  cfg.t = s.real("fp.t");
  cfg.v = s.real("fp.v");
  cfg.trials = s.integer("fp.trials");
  cfg.v_negative = s.real("fp.v_negative");
  cfg.negative_trials = s.integer("fp.negative_trials");
  cfg.rho = s.real("fp.rho");
  cfg.master = master;
  cfg.jobs = jobs;
  return run_finite_prop(cfg);
}

inline Report run_hydro_riemann_cmd(const Settings& s, std::uint64_t master,
                                    int jobs) {
  HydroRiemannConfig cfg;
  cfg.lambda = s.real("hydro.lambda");
  cfg.rho = s.real("hydro.rho");
  cfg.n_list = s.int_list("hydro.n_list");
  cfg.t_end = s.real("hydro.t");
  cfg.seeds = s.integer("hydro.seeds");
  cfg.eval_halfwidth = s.real("hydro.halfwidth");
  cfg.margin = s.real("hydro.margin");
  cfg.block_width = s.real("hydro.block_width");
  cfg.mode = parse_mode(s.str("hydro.mode"));
  cfg.fns = s.str_list("hydro.fns");
  cfg.acceptance_checks = s.flag("hydro.acceptance_checks");
  cfg.window_audit = s.flag("hydro.window_audit");
  cfg.audit_n = s.integer("hydro.audit_n");
  cfg.master = master;
  cfg.jobs = jobs;
  return run_hydro_riemann(cfg);
}

inline Report run_hydro_cauchy_cmd(const Settings& s, std::uint64_t master,
                                   int jobs) {
  HydroCauchyConfig cfg;
  cfg.u0_breaks = s.real_list("cauchy.u0_breaks");
  cfg.u0_values = s.real_list("cauchy.u0_values");
  cfg.n_list = s.int_list("cauchy.n_list");
  cfg.t_end = s.real("cauchy.t");
  cfg.seeds = s.integer("cauchy.seeds");
  cfg.eval_halfwidth = s.real("cauchy.halfwidth");
  cfg.margin = s.real("cauchy.margin");
  cfg.block_width = s.real("cauchy.block_width");
  cfg.l1_max = s.real("cauchy.l1_max");
  cfg.paired_improvement_min = s.real("cauchy.paired_min");
  cfg.master = master;
  cfg.jobs = jobs;
  return run_hydro_cauchy(cfg);
}

inline Report run_strong_hydro_cmd(const Settings& s, std::uint64_t master,
                                   int jobs) {
  StrongHydroConfig cfg;
  cfg.lambda = s.real("strong.lambda");
  cfg.rho = s.real("strong.rho");
  cfg.n_list = s.int_list("strong.n_list");
  cfg.t_end = s.real("strong.t");
  cfg.masters = s.integer("strong.masters");
  cfg.snapshots = static_cast<int>(s.integer("strong.snapshots"));
  cfg.eval_halfwidth = s.real("strong.halfwidth");
  cfg.margin = s.real("strong.margin");
  cfg.fns = s.str_list("strong.fns");
  if (s.str("strong.mode") != "keyed")
    throw ConfigError(
        "strong-hydro requires keyed mode: one clock realization must drive "
        "every scale");
  cfg.master = master;
  cfg.jobs = jobs;
  return run_strong_hydro(cfg);
}

inline Report run_halfline_cmd(const Settings& s, std::uint64_t master, int jobs) {
  HalflineConfig cfg;
  cfg.sites = s.integer("halfline.sites");
  cfg.ells = s.int_list("halfline.ells");
  cfg.rho0 = s.real("halfline.rho0");
  cfg.t_burn = s.real("halfline.t_burn");
  cfg.sample_dt = s.real("halfline.sample_dt");
  cfg.samples = s.integer("halfline.samples");
  cfg.replicas = s.integer("halfline.replicas");
  cfg.batches = static_cast<int>(s.integer("halfline.batches"));
  cfg.wall_window = s.integer("halfline.wall_window");
  cfg.master = master;
  cfg.jobs = jobs;
  return run_halfline(cfg);
}

inline Report run_fluctuations_cmd(const Settings& s, std::uint64_t master,
                                   int jobs) {
  FluctuationConfig cfg;
  cfg.eps_list = s.real_list("fluct.eps_list");
  cfg.t_list = s.real_list("fluct.t_list");
  cfg.fns = s.str_list("fluct.fns");
  cfg.replicas = s.integer("fluct.replicas");
  cfg.replicas_t0 = s.integer("fluct.replicas_t0");
  cfg.speed_margin = s.real("fluct.speed_margin");
  cfg.master = master;
  cfg.jobs = jobs;
  return run_fluctuations(cfg);
}

struct Subcommand {
  std::string name;
  std::string description;
  KeyValues defaults;
  // (flag, config key) pairs exposed as direct options
  std::vector<std::pair<std::string, std::string>> flags;
  Report (*runner)(const Settings&, std::uint64_t, int);
};

inline std::vector<Subcommand> subcommands() {
  const KeyValues common{{"common.master_seed", "20250810"},
                         {"common.jobs", std::to_string(default_jobs())}};
  auto with_common = [&](KeyValues kv) {
    kv.insert(common.begin(), common.end());
    return kv;
  };
  std::vector<Subcommand> subs;
  subs.push_back({"stationarity",
                  "exact generator identity and statistical stationarity",
                  with_common({{"stat.exact_n_lo", "3"},
                               {"stat.exact_n_hi", "12"},
                               {"stat.ring_sites", "512"},
                               {"stat.ring_rho", "0.3"},
                               {"stat.ring_t", "100"},
                               {"stat.ring_replicas", "100"},
                               {"stat.current_sites", "1024"},
                               {"stat.current_rhos", "0.25,0.5,0.75"},
                               {"stat.current_t", "2000"},
                               {"stat.current_replicas", "50"}}),
                  {},
                  [](const Settings& s, std::uint64_t m, int j) {
                    return run_stationarity_cmd(s, m, j);
                  }});
  subs.push_back({"coupling",
                  "audited shared-clock coupling suite",
                  with_common({{"coupling.trials", "1000"},
                               {"coupling.trial_t", "20"},
                               {"coupling.ring_sites", "256"},
                               {"coupling.gs_pairs", "4200"},
                               {"coupling.gs_sites", "24"},
                               {"coupling.annihilation_trials", "100000"},
                               {"coupling.annihilation_h", "0.02"},
                               {"coupling.ensemble_trials", "100"},
                               {"coupling.ensemble_t", "5"},
                               {"coupling.ensemble_sites", "128"}}),
                  {},
                  [](const Settings& s, std::uint64_t m, int j) {
                    return run_coupling_cmd(s, m, j);
                  }});
  subs.push_back({"riemann",
                  "exact two-state entropy solution sampled in v = x/t",
                  with_common({{"riemann.lambda", "1"},
                               {"riemann.rho", "0"},
                               {"riemann.t", "1"},
                               {"riemann.grid", "2001"},
                               {"riemann.vmin", "-3"},
                               {"riemann.vmax", "3"}}),
                  {{"--lambda", "riemann.lambda"},
                   {"--rho", "riemann.rho"},
                   {"--t", "riemann.t"},
                   {"--grid", "riemann.grid"}},
                  [](const Settings& s, std::uint64_t m, int) {
                    return run_riemann_cmd(s, m);
                  }});
  subs.push_back({"godunov",
                  "finite-volume evolution of two-state data",
                  with_common({{"godunov.lambda", "0.5"},
                               {"godunov.rho", "0"},
                               {"godunov.dx", "0.001"},
                               {"godunov.t", "1"},
                               {"godunov.half_width", "4"},
                               {"godunov.cfl", "0.4"}}),
                  {{"--lambda", "godunov.lambda"},
                   {"--rho", "godunov.rho"},
                   {"--dx", "godunov.dx"},
                   {"--t", "godunov.t"}},
                  [](const Settings& s, std::uint64_t m, int) {
                    return run_godunov_cmd(s, m);
                  }});
  subs.push_back({"hydro-riemann",
                  "particle hydrodynamics against the exact solution",
                  with_common({{"hydro.lambda", "0.5"},
                               {"hydro.rho", "0"},
                               {"hydro.n_list", "200,800,3200"},
                               {"hydro.t", "1"},
                               {"hydro.seeds", "20"},
                               {"hydro.halfwidth", "3"},
                               {"hydro.margin", "1"},
                               {"hydro.block_width", "0.05"},
                               {"hydro.mode", "gillespie"},
                               {"hydro.fns", "hat,gauss,bump"},
                               {"hydro.acceptance_checks", "1"},
                               {"hydro.window_audit", "1"},
                               {"hydro.audit_n", "800"}}),
                  {{"--lambda", "hydro.lambda"},
                   {"--rho", "hydro.rho"},
                   {"--n", "hydro.n_list"},
                   {"--t", "hydro.t"},
                   {"--seeds", "hydro.seeds"}},
                  [](const Settings& s, std::uint64_t m, int j) {
                    return run_hydro_riemann_cmd(s, m, j);
                  }});
  subs.push_back({"hydro-cauchy",
                  "particle hydrodynamics against the finite-volume reference",
                  with_common({{"cauchy.u0_breaks", "-1,0"},
                               {"cauchy.u0_values", "0.2,0.8,0.2"},
                               {"cauchy.n_list", "200,800,3200"},
                               {"cauchy.t", "1"},
                               {"cauchy.seeds", "20"},
                               {"cauchy.halfwidth", "3"},
                               {"cauchy.margin", "1"},
                               {"cauchy.block_width", "0.05"},
                               {"cauchy.l1_max", "0.07"},
                               {"cauchy.paired_min", "0.8"}}),
                  {{"--n", "cauchy.n_list"},
                   {"--t", "cauchy.t"},
                   {"--seeds", "cauchy.seeds"}},
                  [](const Settings& s, std::uint64_t m, int j) {
                    return run_hydro_cauchy_cmd(s, m, j);
                  }});
  subs.push_back({"strong-hydro",
                  "one clock realization driving every scale",
                  with_common({{"strong.lambda", "0.5"},
                               {"strong.rho", "0"},
                               {"strong.n_list", "200,800,3200"},
                               {"strong.t", "1"},
                               {"strong.masters", "10"},
                               {"strong.snapshots", "9"},
                               {"strong.halfwidth", "1.5"},
                               {"strong.margin", "1"},
                               {"strong.fns", "hat,gauss,bump"},
                               {"strong.mode", "keyed"}}),
                  {{"--n", "strong.n_list"}, {"--masters", "strong.masters"}},
                  [](const Settings& s, std::uint64_t m, int j) {
                    return run_strong_hydro_cmd(s, m, j);
                  }});
  subs.push_back({"finite-prop",
                  "empirical information propagation bound",
                  with_common({{"fp.sites", "641"},
                               {"fp.agree_lo", "201"},
                               {"fp.agree_hi", "441"},
                               {"fp.t", "20"},
                               {"fp.v", "5"},
                               {"fp.trials", "1000"},
                               {"fp.v_negative", "0.1"},
                               {"fp.negative_trials", "200"},
                               {"fp.rho", "0.5"}}),
                  {{"--v", "fp.v"}, {"--t", "fp.t"}, {"--trials", "fp.trials"}},
                  [](const Settings& s, std::uint64_t m, int j) {
                    return run_finite_prop_cmd(s, m, j);
                  }});
  subs.push_back({"halfline",
                  "blocked half-line relaxation scan (exploratory)",
                  with_common({{"halfline.sites", "20480"},
                               {"halfline.ells", "64,256,1024"},
                               {"halfline.rho0", "0.5"},
                               {"halfline.t_burn", "500"},
                               {"halfline.sample_dt", "2"},
                               {"halfline.samples", "256"},
                               {"halfline.replicas", "4"},
                               {"halfline.batches", "8"},
                               {"halfline.wall_window", "64"}}),
                  {{"--rho0", "halfline.rho0"}},
                  [](const Settings& s, std::uint64_t m, int j) {
                    return run_halfline_cmd(s, m, j);
                  }});
  subs.push_back({"fluctuations",
                  "critical fluctuation variance scan (exploratory)",
                  with_common({{"fluct.eps_list", "0.01,0.005"},
                               {"fluct.t_list", "0,0.05"},
                               {"fluct.fns", "hat"},
                               {"fluct.replicas", "64"},
                               {"fluct.replicas_t0", "10000"},
                               {"fluct.speed_margin", "3"}}),
                  {},
                  [](const Settings& s, std::uint64_t m, int j) {
                    return run_fluctuations_cmd(s, m, j);
                  }});
  subs.push_back({"flux-check",
                  "enumerated flux expectation vs the macroscopic flux",
                  with_common({{"flux.points", "101"}}),
                  {{"--points", "flux.points"}},
                  [](const Settings& s, std::uint64_t m, int) {
                    return run_flux_check_cmd(s, m);
                  }});
  return subs;
}

}  // namespace cli_detail

inline int run_cli(int argc, const char* const* argv) {
  CLI::App app{"dephydro: directed exclusion process simulation and "
               "verification suite"};
  app.require_subcommand(1);

  struct Invocation {
    std::string config_path;
    std::string out_dir;
    KeyValues overrides;
    std::vector<std::string> sets;
    const cli_detail::Subcommand* sub = nullptr;
  };
  auto subs = cli_detail::subcommands();
  std::vector<Invocation> inv(subs.size());

  for (std::size_t i = 0; i < subs.size(); ++i) {
    auto* sc = app.add_subcommand(subs[i].name, subs[i].description);
    inv[i].sub = &subs[i];
    inv[i].out_dir = "out/" + subs[i].name;
    sc->add_option("--config", inv[i].config_path, "config file (section.key = value lines)");
    sc->add_option("--out", inv[i].out_dir, "output directory");
    sc->add_option("--set", inv[i].sets, "override: key=value")->take_all();
    sc->add_option_function<std::string>(
        "--seed",
        [&inv, i](const std::string& v) {
          inv[i].overrides["common.master_seed"] = v;
        },
        "master seed");
    sc->add_option_function<std::string>(
        "--jobs",
        [&inv, i](const std::string& v) { inv[i].overrides["common.jobs"] = v; },
        "replica concurrency cap");
    for (const auto& [flag, key] : subs[i].flags) {
      sc->add_option_function<std::string>(
          flag,
          [&inv, i, key = key](const std::string& v) {
            inv[i].overrides[key] = v;
          },
          "sets " + key);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const Invocation* chosen = nullptr;
  for (std::size_t i = 0; i < subs.size(); ++i)
    if (app.get_subcommand(subs[i].name)->parsed()) chosen = &inv[i];
  if (!chosen) return 2;

  const auto started = std::chrono::steady_clock::now();
  try {
    Settings settings(chosen->sub->defaults);
    if (!chosen->config_path.empty())
      settings.merge(parse_config_file(chosen->config_path));
    settings.merge(chosen->overrides);
    KeyValues set_kv;
    for (const auto& kv : chosen->sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos)
        throw ConfigError("--set expects key=value, got '" + kv + "'");
      set_kv[detail::trim(kv.substr(0, eq))] = detail::trim(kv.substr(eq + 1));
    }
    settings.merge(set_kv);

    std::uint64_t master = 0;
    int jobs = 1;
    cli_detail::apply_common(settings, &master, &jobs);

    Report rep = chosen->sub->runner(settings, master, jobs);
    rep.config = settings.effective();

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
            .count();
    try {
      write_report_files(rep, chosen->out_dir, wall);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
    for (const auto& c : rep.checks)
      std::cout << (c.pass ? "[PASS] " : (c.kind == "exploratory" ? "[INFO] " : "[FAIL] "))
                << rep.experiment << ": " << c.name << " (measured "
                << c.measured << ", threshold " << c.threshold << ")\n";
    std::cout << (rep.all_pass() ? "OK" : "FAILED") << ": " << rep.experiment
              << " -> " << chosen->out_dir << "\n";
    return rep.all_pass() ? 0 : 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace dep
