// SPDX-License-Identifier: Apache-2.0
#include "isacee/algorithm.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace isacee {

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::initializing: return "initializing";
    case RunStatus::running: return "running";
    case RunStatus::converged: return "converged";
    case RunStatus::infeasible: return "infeasible";
    case RunStatus::iteration_limit: return "iteration_limit";
    case RunStatus::solver_failure: return "solver_failure";
  }
  return "unknown";
}

namespace {

double now_ms() {
  using namespace std::chrono;
  return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
}

PowerAllocation random_start(const SystemConfig& cfg, const ChannelSet& ch,
                             const RunOptions& opts, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const int K = cfg.k_users;
  const int Q = cfg.q_subcarriers;
  PowerAllocation a(K, Q);
  const double base = 0.5 * cfg.p_max / (K * Q);
  for (int q = 0; q < Q; ++q) {
    const double shared_gamma = opts.fix_half_split ? 0.5 : 0.4 + 0.2 * u01(rng);
    for (int k = 0; k < K; ++k) {
      a.xi(k, q) = base * (0.8 + 0.4 * u01(rng));
      double g = shared_gamma;
      if (!opts.equal_gamma && !opts.fix_half_split) g = 0.4 + 0.2 * u01(rng);
      a.gamma(k, q) = g;
      a.eta(k, q) = 1.0 - g;
    }
  }
  // keep the incumbent inside the power budget so the feasibility surrogate
  // retains a strictly feasible point
  const double ptx = transmit_power(a, ch);
  if (ptx > 0.9 * cfg.p_max) a.xi *= 0.9 * cfg.p_max / ptx;
  return a;
}

ConicSolution solve_with_retry(const ConicProgram& prog, const RunOptions& opts) {
  try {
    return solve_conic(prog, opts.solver_accuracy);
  } catch (const solver_error&) {
    return solve_conic(prog, opts.relaxed_accuracy);
  }
}

std::string worst_threshold_name(const MetricsReport& rep, const SystemConfig& cfg) {
  double worst = rep.p_tx - cfg.p_max;
  std::string name = "transmit power cap";
  if (cfg.se_threshold > 0 && cfg.se_threshold - rep.se_per_user.minCoeff() > worst) {
    worst = cfg.se_threshold - rep.se_per_user.minCoeff();
    name = "per-user rate threshold";
  }
  if (std::isfinite(cfg.crb0_theta) && rep.crb_theta - cfg.crb0_theta > worst) {
    worst = rep.crb_theta - cfg.crb0_theta;
    name = "azimuth CRB ceiling";
  }
  if (std::isfinite(cfg.crb0_phi) && rep.crb_phi - cfg.crb0_phi > worst) {
    worst = rep.crb_phi - cfg.crb0_phi;
    name = "elevation CRB ceiling";
  }
  return name;
}

}  // namespace

PowerAllocation initialize(const SystemConfig& cfg, const ChannelSet& ch,
                           const SensingGeometry& geo, std::mt19937_64& rng,
                           const RunOptions& opts) {
  PowerAllocation alloc = random_start(cfg, ch, opts, rng);

  BuildOptions bopts;
  bopts.equal_gamma = opts.equal_gamma;
  bopts.fix_half_split = opts.fix_half_split;

  double prev_obj = -std::numeric_limits<double>::infinity();
  int stalled = 0;
  MetricsReport rep;
  for (int iter = 0; iter < opts.max_init_iterations; ++iter) {
    rep = evaluate(alloc, ch, geo, cfg);
    if (rep.feasible()) return alloc;

    const ExpansionPoint point = ExpansionPoint::from(alloc, ch, geo, cfg);
    const BuiltProgram built = build_feasibility_program(point, ch, geo, cfg, bopts);
    const ConicSolution sol = solve_with_retry(built.prog, opts);
    if (sol.status != SolveStatus::optimal && sol.status != SolveStatus::max_iter)
      throw solver_error("initialization subproblem reported " +
                         std::string(to_string(sol.status)));
    alloc = built.extract_allocation(sol.values);

    const double obj = sol.objective;
    if (obj < 0 && obj - prev_obj < 1e-9) {
      if (++stalled >= 10) break;
    } else {
      stalled = 0;
    }
    prev_obj = std::max(prev_obj, obj);
  }

  rep = evaluate(alloc, ch, geo, cfg);
  if (rep.feasible()) return alloc;
  throw infeasible_scenario_error(
      "initialization cannot satisfy the " + worst_threshold_name(rep, cfg) +
      " under the power budget (best residual objective " + std::to_string(prev_obj) + ")");
}

namespace {

SolveResult run_sca(const SystemConfig& cfg, const ChannelSet& ch, const SensingGeometry& geo,
                    const RunOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  SolveResult result;
  result.status = RunStatus::initializing;

  PowerAllocation alloc = initialize(cfg, ch, geo, rng, opts);
  MetricsReport report = evaluate(alloc, ch, geo, cfg);
  for (const auto& cand : opts.warm_starts) {
    if (cand.k_users() != cfg.k_users || cand.q_subcarriers() != cfg.q_subcarriers) continue;
    try {
      const MetricsReport r = evaluate(cand, ch, geo, cfg);
      if (r.feasible() && r.objective > report.objective) {
        alloc = cand;
        report = r;
      }
    } catch (const degenerate_fim_error&) {
    }
  }

  double tau = report.objective;  // overall EE is the Dinkelbach ratio
  result.trace.push_back({0, report.objective, tau,
                          std::max(0.0, report.max_violation(cfg)), 0.0});

  BuildOptions bopts;
  bopts.equal_gamma = opts.equal_gamma;
  bopts.fix_half_split = opts.fix_half_split;

  result.status = RunStatus::running;
  for (int iter = 1; iter <= opts.max_iterations; ++iter) {
    const ExpansionPoint point = ExpansionPoint::from(alloc, ch, geo, cfg);
    bopts.tau = tau;
    const BuiltProgram built = build_main_program(point, ch, geo, cfg, bopts);

    const double t0 = now_ms();
    ConicSolution sol;
    try {
      sol = solve_with_retry(built.prog, opts);
    } catch (const solver_error&) {
      result.status = RunStatus::solver_failure;
      break;
    }
    const double ms = now_ms() - t0;
    if (sol.status == SolveStatus::primal_infeasible ||
        sol.status == SolveStatus::dual_infeasible) {
      // prior iterates remain feasible; keep the best one
      result.status = RunStatus::solver_failure;
      break;
    }
    if (sol.status == SolveStatus::max_iter &&
        built.prog.max_violation(sol.values) > 1e-6) {
      result.status = RunStatus::solver_failure;
      break;
    }

    const PowerAllocation new_alloc = built.extract_allocation(sol.values);
    MetricsReport new_report;
    try {
      new_report = evaluate(new_alloc, ch, geo, cfg);
    } catch (const degenerate_fim_error&) {
      result.status = RunStatus::solver_failure;
      break;
    }

    result.trace.push_back({iter, new_report.objective, tau,
                            std::max(0.0, new_report.max_violation(cfg)), ms});
    const double delta = new_report.objective - report.objective;
    alloc = new_alloc;
    report = new_report;
    tau = new_report.objective;
    result.iterations = iter;
    if (std::abs(delta) < opts.convergence_tol) {
      result.status = RunStatus::converged;
      break;
    }
    if (iter == opts.max_iterations) result.status = RunStatus::iteration_limit;
  }

  result.allocation = alloc;
  result.report = report;
  return result;
}

}  // namespace

SolveResult run(const SystemConfig& cfg, const ChannelSet& ch, const SensingGeometry& geo,
                const RunOptions& opts) {
  return run_sca(cfg, ch, geo, opts);
}

SolveResult run_equalcom(const SystemConfig& cfg, const ChannelSet& ch, const SensingGeometry& geo,
                         const RunOptions& opts) {
  RunOptions o = opts;
  o.equal_gamma = true;
  return run_sca(cfg, ch, geo, o);
}

SolveResult run_equalcs(const SystemConfig& cfg, const ChannelSet& ch, const SensingGeometry& geo,
                        const RunOptions& opts) {
  const PowerAllocation alloc = equal_cs_allocation(cfg);
  if (cfg.equalcs_optimize_xi) {
    RunOptions o = opts;
    o.fix_half_split = true;
    o.warm_starts.push_back(alloc);
    return run_sca(cfg, ch, geo, o);
  }
  SolveResult result;
  result.allocation = alloc;
  result.report = evaluate(alloc, ch, geo, cfg);
  result.iterations = 0;
  result.status = RunStatus::converged;
  result.trace.push_back({0, result.report.objective, result.report.objective,
                          std::max(0.0, result.report.max_violation(cfg)), 0.0});
  return result;
}

}  // namespace isacee
