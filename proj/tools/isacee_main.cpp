// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: oracle validation runs, single solves and
// experiment sweeps over seeded channel drops. All outputs are CSV.

#include <CLI11.hpp>
#include <iostream>

#include "isacee/sweep.hpp"

using namespace isacee;

namespace {

SystemConfig load_or_default(const std::string& path) {
  if (path.empty()) return desk_scale_config();
  return load_config(path);
}

int cmd_validate(const std::string& config_path, const std::string& tol_path,
                 const std::string& out_path) {
  SystemConfig cfg;
  try {
    cfg = load_or_default(config_path);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  OracleTolerances tol;
  if (!tol_path.empty()) {
    try {
      tol = load_tolerances(tol_path);
    } catch (const std::invalid_argument& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
  }
  const auto reports = run_validation_suite(cfg, tol);
  if (!out_path.empty()) write_validation_csv(out_path, reports);
  bool all_pass = true;
  for (const auto& r : reports) {
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.quantity << "  rel_error=" << r.relative_error
              << "  tolerance=" << r.tolerance;
    if (r.samples > 0) std::cout << "  samples=" << r.samples;
    std::cout << "\n";
    all_pass = all_pass && r.pass;
  }
  return all_pass ? 0 : 1;
}

int cmd_solve(const std::string& config_path, const std::string& scheme, std::uint64_t seed,
              const std::string& out_prefix) {
  SystemConfig cfg;
  try {
    cfg = load_or_default(config_path);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::mt19937_64 rng(derive_seed(seed, 0));
  const auto users = cfg.user_positions.empty() ? draw_user_positions(cfg, rng) : cfg.user_positions;
  const auto ch = gen_channels(cfg, users, rng);
  const auto geo = build_geometry(cfg);

  RunOptions opts;
  opts.seed = derive_seed(seed, 1);
  SolveResult result;
  try {
    if (scheme == "proposed") result = run(cfg, ch, geo, opts);
    else if (scheme == "equalcom") result = run_equalcom(cfg, ch, geo, opts);
    else if (scheme == "equalcs") result = run_equalcs(cfg, ch, geo, opts);
    else {
      std::cerr << "error: unknown scheme " << scheme << "\n";
      return 2;
    }
  } catch (const infeasible_scenario_error& e) {
    std::cerr << "infeasible scenario: " << e.what() << "\n";
    return 3;
  } catch (const solver_error& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 1;
  }

  write_trace_csv(out_prefix + "_trace.csv", result);
  write_metrics_csv(out_prefix + "_metrics.csv", scheme, seed, result, cfg);
  std::cout << "status=" << to_string(result.status) << " iterations=" << result.iterations
            << " objective=" << result.report.objective << " ee_c=" << result.report.ee_c
            << " omega_ee_s=" << cfg.omega * result.report.ee_s
            << " se_sum=" << result.report.se_sum << " p_tot_mw=" << result.report.p_tot
            << " crb_theta_db=" << linear_to_db(result.report.crb_theta)
            << " crb_phi_db=" << linear_to_db(result.report.crb_phi) << "\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& parameter,
              const std::vector<double>& values, const std::vector<std::string>& schemes,
              int drops, int workers, const std::string& out_path) {
  SweepSpec spec;
  try {
    spec.base = load_or_default(config_path);
    spec.parameter = parameter;
    spec.values = values;
    if (!schemes.empty()) spec.schemes = schemes;
    spec.n_drops = drops;
    spec.workers = workers;
    spec.validate();
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  const auto rows = run_sweep(spec);
  write_sweep_csv(out_path, rows);
  int failures = 0;
  for (const auto& r : rows)
    if (r.drop >= 0 && r.status != "converged") ++failures;
  std::cout << "sweep complete: " << rows.size() << " rows written to " << out_path << " ("
            << failures << " non-converged drop rows)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"massive-MIMO ISAC energy-efficiency simulator"};
  app.require_subcommand(1);

  std::string config_path, tol_path, out_path = "validation.csv";
  auto* validate = app.add_subcommand("validate", "run the oracle validation suite");
  validate->add_option("--config", config_path, "scenario config file");
  validate->add_option("--tolerances", tol_path, "tolerance override file");
  validate->add_option("--out", out_path, "validation CSV path");

  std::string s_config, s_scheme = "proposed", s_prefix = "solve";
  std::uint64_t s_seed = 1;
  auto* solve = app.add_subcommand("solve", "solve one scenario drop");
  solve->add_option("--config", s_config, "scenario config file");
  solve->add_option("--scheme", s_scheme, "proposed | equalcom | equalcs");
  solve->add_option("--seed", s_seed, "channel drop seed");
  solve->add_option("--out", s_prefix, "output prefix (writes <prefix>_trace.csv, <prefix>_metrics.csv)");

  std::string w_config, w_param = "omega", w_out = "sweep.csv";
  std::vector<double> w_values;
  std::vector<std::string> w_schemes;
  int w_drops = 10, w_workers = 1;
  auto* sweep = app.add_subcommand("sweep", "run an experiment sweep");
  sweep->add_option("--config", w_config, "scenario config file");
  sweep->add_option("--param", w_param,
                    "omega | p_max_dbm | crb0_db | se_threshold | n_antennas | q_subcarriers");
  sweep->add_option("--values", w_values, "swept values")->required();
  sweep->add_option("--scheme", w_schemes, "subset of proposed/equalcom/equalcs");
  sweep->add_option("--drops", w_drops, "channel realizations per point");
  sweep->add_option("--workers", w_workers, "concurrent drop workers");
  sweep->add_option("--out", w_out, "sweep CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (validate->parsed()) return cmd_validate(config_path, tol_path, out_path);
    if (solve->parsed()) return cmd_solve(s_config, s_scheme, s_seed, s_prefix);
    if (sweep->parsed())
      return cmd_sweep(w_config, w_param, w_values, w_schemes, w_drops, w_workers, w_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
