// SPDX-License-Identifier: Apache-2.0
#include "isacee/sweep.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <thread>

namespace isacee {

void SweepSpec::validate() const {
  if (values.empty()) throw std::invalid_argument("sweep: empty value list");
  if (n_drops < 1) throw std::invalid_argument("sweep: n_drops must be >= 1");
  if (schemes.empty()) throw std::invalid_argument("sweep: no schemes selected");
  for (const auto& s : schemes)
    if (s != "proposed" && s != "equalcom" && s != "equalcs")
      throw std::invalid_argument("sweep: unknown scheme " + s);
  static const char* known[] = {"omega",        "p_max_dbm",  "crb0_db",
                                "se_threshold", "n_antennas", "q_subcarriers"};
  bool ok = false;
  for (const char* k : known) ok = ok || parameter == k;
  if (!ok) throw std::invalid_argument("sweep: unknown parameter " + parameter);
  base.validate();
}

SystemConfig apply_sweep_parameter(const SystemConfig& base, const std::string& name,
                                   double value) {
  SystemConfig cfg = base;
  if (name == "omega") {
    cfg.omega = value;
  } else if (name == "p_max_dbm") {
    cfg.p_max = dbm_to_mw(value);
  } else if (name == "crb0_db") {
    cfg.crb0_theta = cfg.crb0_phi = db_to_linear(value);
  } else if (name == "se_threshold") {
    cfg.se_threshold = value;
  } else if (name == "n_antennas") {
    const int side = static_cast<int>(std::lround(std::sqrt(value)));
    if (side * side != static_cast<int>(std::lround(value)))
      throw std::invalid_argument("sweep: n_antennas must be a perfect square");
    cfg.n_th = cfg.n_tv = side;
  } else if (name == "q_subcarriers") {
    cfg.q_subcarriers = static_cast<int>(std::lround(value));
  } else {
    throw std::invalid_argument("sweep: unknown parameter " + name);
  }
  cfg.validate();
  return cfg;
}

namespace {

SweepRow row_from_result(const SweepSpec& spec, double value, const std::string& scheme, int drop,
                         const SolveResult& res, const SystemConfig& cfg) {
  SweepRow row;
  row.parameter = spec.parameter;
  row.value = value;
  row.scheme = scheme;
  row.drop = drop;
  row.status = to_string(res.status);
  row.feasible = res.report.feasible();
  row.iterations = res.iterations;
  row.ee_overall = res.report.objective;
  row.ee_c = res.report.ee_c;
  row.ee_s = res.report.ee_s;
  row.omega_ee_s = cfg.omega * res.report.ee_s;
  row.se_sum = res.report.se_sum;
  row.se_min = res.report.se_per_user.size() ? res.report.se_per_user.minCoeff() : 0.0;
  row.crb_theta_db = linear_to_db(res.report.crb_theta);
  row.crb_phi_db = linear_to_db(res.report.crb_phi);
  row.p_tx_mw = res.report.p_tx;
  row.p_tot_mw = res.report.p_tot;
  return row;
}

SweepRow failed_row(const SweepSpec& spec, double value, const std::string& scheme, int drop,
                    const std::string& status) {
  SweepRow row;
  row.parameter = spec.parameter;
  row.value = value;
  row.scheme = scheme;
  row.drop = drop;
  row.status = status;
  row.feasible = false;
  return row;
}

bool wants(const SweepSpec& spec, const std::string& scheme) {
  for (const auto& s : spec.schemes)
    if (s == scheme) return true;
  return false;
}

// Rows for one (value, drop) cell; schemes share the drop's channels and the
// dominance warm-start chain.
std::vector<SweepRow> run_cell(const SweepSpec& spec, double value, int drop) {
  std::vector<SweepRow> rows;
  SystemConfig cfg;
  try {
    cfg = apply_sweep_parameter(spec.base, spec.parameter, value);
  } catch (const std::exception&) {
    for (const auto& s : spec.schemes) rows.push_back(failed_row(spec, value, s, drop, "bad_config"));
    return rows;
  }
  std::mt19937_64 rng(derive_seed(cfg.rng_seed, 1000 + static_cast<std::uint64_t>(drop)));
  const auto users =
      cfg.user_positions.empty() ? draw_user_positions(cfg, rng) : cfg.user_positions;
  ChannelSet ch;
  SensingGeometry geo;
  try {
    ch = gen_channels(cfg, users, rng);
    geo = build_geometry(cfg);
  } catch (const std::exception&) {
    for (const auto& s : spec.schemes) rows.push_back(failed_row(spec, value, s, drop, "bad_drop"));
    return rows;
  }

  RunOptions base_opts;
  base_opts.seed = derive_seed(cfg.rng_seed, 7000 + static_cast<std::uint64_t>(drop));

  SolveResult equalcs_res;
  bool have_equalcs = false;
  try {
    equalcs_res = run_equalcs(cfg, ch, geo, base_opts);
    have_equalcs = true;
  } catch (const std::exception&) {
  }
  if (wants(spec, "equalcs")) {
    if (have_equalcs)
      rows.push_back(row_from_result(spec, value, "equalcs", drop, equalcs_res, cfg));
    else
      rows.push_back(failed_row(spec, value, "equalcs", drop, "solver_failure"));
  }

  SolveResult equalcom_res;
  bool have_equalcom = false;
  const bool need_equalcom = wants(spec, "equalcom") || wants(spec, "proposed");
  if (need_equalcom) {
    RunOptions opts = base_opts;
    if (have_equalcs) opts.warm_starts.push_back(equalcs_res.allocation);
    try {
      equalcom_res = run_equalcom(cfg, ch, geo, opts);
      have_equalcom = true;
      if (wants(spec, "equalcom"))
        rows.push_back(row_from_result(spec, value, "equalcom", drop, equalcom_res, cfg));
    } catch (const infeasible_scenario_error&) {
      if (wants(spec, "equalcom"))
        rows.push_back(failed_row(spec, value, "equalcom", drop, "infeasible"));
    } catch (const std::exception&) {
      if (wants(spec, "equalcom"))
        rows.push_back(failed_row(spec, value, "equalcom", drop, "solver_failure"));
    }
  }

  if (wants(spec, "proposed")) {
    RunOptions opts = base_opts;
    if (have_equalcom) opts.warm_starts.push_back(equalcom_res.allocation);
    if (have_equalcs) opts.warm_starts.push_back(equalcs_res.allocation);
    try {
      const SolveResult res = run(cfg, ch, geo, opts);
      rows.push_back(row_from_result(spec, value, "proposed", drop, res, cfg));
    } catch (const infeasible_scenario_error&) {
      rows.push_back(failed_row(spec, value, "proposed", drop, "infeasible"));
    } catch (const std::exception&) {
      rows.push_back(failed_row(spec, value, "proposed", drop, "solver_failure"));
    }
  }
  return rows;
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  spec.validate();
  const int n_cells = static_cast<int>(spec.values.size()) * spec.n_drops;
  std::vector<std::vector<SweepRow>> cell_rows(n_cells);

  const int workers = std::max(1, spec.workers);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int cell = next.fetch_add(1);
      if (cell >= n_cells) return;
      const int vi = cell / spec.n_drops;
      const int drop = cell % spec.n_drops;
      cell_rows[cell] = run_cell(spec, spec.values[vi], drop);
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<SweepRow> rows;
  for (auto& cr : cell_rows)
    for (auto& r : cr) rows.push_back(std::move(r));

  // aggregate rows per (value, scheme) over converged drops
  std::vector<SweepRow> aggregates;
  for (double value : spec.values) {
    for (const auto& scheme : spec.schemes) {
      SweepRow agg;
      agg.parameter = spec.parameter;
      agg.value = value;
      agg.scheme = scheme;
      agg.drop = -1;
      int n = 0;
      double it_sum = 0.0;
      for (const auto& r : rows) {
        if (r.drop < 0 || r.value != value || r.scheme != scheme) continue;
        if (r.status != "converged") continue;
        ++n;
        agg.ee_overall += r.ee_overall;
        agg.ee_c += r.ee_c;
        agg.omega_ee_s += r.omega_ee_s;
        agg.ee_s += r.ee_s;
        agg.se_sum += r.se_sum;
        agg.se_min += r.se_min;
        agg.crb_theta_db += r.crb_theta_db;
        agg.crb_phi_db += r.crb_phi_db;
        agg.p_tx_mw += r.p_tx_mw;
        agg.p_tot_mw += r.p_tot_mw;
        it_sum += r.iterations;
      }
      agg.converged_drops = n;
      agg.status = n > 0 ? "mean" : "no_converged_drops";
      agg.feasible = n > 0;
      if (n > 0) {
        const double inv = 1.0 / n;
        agg.ee_overall *= inv;
        agg.ee_c *= inv;
        agg.omega_ee_s *= inv;
        agg.ee_s *= inv;
        agg.se_sum *= inv;
        agg.se_min *= inv;
        agg.crb_theta_db *= inv;
        agg.crb_phi_db *= inv;
        agg.p_tx_mw *= inv;
        agg.p_tot_mw *= inv;
        agg.iterations = static_cast<int>(std::lround(it_sum * inv));
      }
      aggregates.push_back(agg);
    }
  }
  // sensing-EE normalization to the per-scheme sweep maximum
  for (const auto& scheme : spec.schemes) {
    double max_ee_s = 0.0;
    for (const auto& a : aggregates)
      if (a.scheme == scheme && a.converged_drops > 0) max_ee_s = std::max(max_ee_s, a.ee_s);
    for (auto& a : aggregates)
      if (a.scheme == scheme && max_ee_s > 0) a.nor_ee_s = a.ee_s / max_ee_s;
  }
  rows.insert(rows.end(), aggregates.begin(), aggregates.end());
  return rows;
}

namespace {
std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file " + path);
  out << std::setprecision(12);
  return out;
}
}  // namespace

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
  auto out = open_out(path);
  out << "# isacee sweep csv v1\n";
  out << "param,value,scheme,drop,status,feasible,converged_drops,iterations,ee_overall,ee_c,"
         "omega_ee_s,ee_s,nor_ee_s,se_sum,se_min,crb_theta_db,crb_phi_db,p_tx_mw,p_tot_mw\n";
  for (const auto& r : rows) {
    out << r.parameter << ',' << r.value << ',' << r.scheme << ','
        << (r.drop < 0 ? std::string("mean") : std::to_string(r.drop)) << ',' << r.status << ','
        << (r.feasible ? 1 : 0) << ',' << r.converged_drops << ',' << r.iterations << ','
        << r.ee_overall << ',' << r.ee_c << ',' << r.omega_ee_s << ',' << r.ee_s << ','
        << r.nor_ee_s << ',' << r.se_sum << ',' << r.se_min << ',' << r.crb_theta_db << ','
        << r.crb_phi_db << ',' << r.p_tx_mw << ',' << r.p_tot_mw << '\n';
  }
}

void write_trace_csv(const std::string& path, const SolveResult& result) {
  auto out = open_out(path);
  out << "# isacee trace csv v1\n";
  out << "iteration,objective,tau,max_residual,solve_ms\n";
  for (const auto& t : result.trace)
    out << t.iteration << ',' << t.objective << ',' << t.tau << ',' << t.max_residual << ','
        << t.solve_ms << '\n';
}

void write_metrics_csv(const std::string& path, const std::string& scheme, std::uint64_t seed,
                       const SolveResult& result, const SystemConfig& cfg) {
  auto out = open_out(path);
  const MetricsReport& r = result.report;
  out << "# isacee metrics csv v1\n";
  out << "scheme,seed,status,iterations,objective,ee_c,ee_s,omega_ee_s,se_sum,se_min,p_tx_mw,"
         "p_tot_mw,crb_theta_db,crb_phi_db,feas_se,feas_crb_theta,feas_crb_phi,feas_power\n";
  out << scheme << ',' << seed << ',' << to_string(result.status) << ',' << result.iterations
      << ',' << r.objective << ',' << r.ee_c << ',' << r.ee_s << ',' << cfg.omega * r.ee_s << ','
      << r.se_sum << ',' << (r.se_per_user.size() ? r.se_per_user.minCoeff() : 0.0) << ','
      << r.p_tx << ',' << r.p_tot << ',' << linear_to_db(r.crb_theta) << ','
      << linear_to_db(r.crb_phi) << ',' << r.feas_se << ',' << r.feas_crb_theta << ','
      << r.feas_crb_phi << ',' << r.feas_power << '\n';
}

void write_validation_csv(const std::string& path, const std::vector<OracleReport>& reports) {
  auto out = open_out(path);
  out << "# isacee validation csv v1\n";
  out << "quantity,closed_form,oracle,rel_error,samples,tolerance,pass\n";
  for (const auto& r : reports)
    out << r.quantity << ',' << r.closed_form << ',' << r.oracle << ',' << r.relative_error << ','
        << r.samples << ',' << r.tolerance << ',' << (r.pass ? 1 : 0) << '\n';
}

}  // namespace isacee
