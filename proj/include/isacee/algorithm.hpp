// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>

#include "isacee/builder.hpp"
#include "isacee/socp.hpp"

namespace isacee {

enum class RunStatus {
  initializing,
  running,
  converged,
  infeasible,
  iteration_limit,
  solver_failure
};

const char* to_string(RunStatus s);

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;        // true overall EE at the iterate
  double tau = 0.0;              // ratio used to build this iteration's subproblem
  double max_residual = 0.0;     // true-metric constraint violation of the iterate
  double solve_ms = 0.0;
};

struct SolveResult {
  PowerAllocation allocation;
  MetricsReport report;
  int iterations = 0;
  RunStatus status = RunStatus::initializing;
  std::vector<IterationRecord> trace;
};

struct RunOptions {
  bool equal_gamma = false;
  bool fix_half_split = false;
  double convergence_tol = 1e-4;
  int max_iterations = 300;
  double solver_accuracy = 1e-8;
  double relaxed_accuracy = 1e-6;
  int max_init_iterations = 100;
  std::uint64_t seed = 1;
  /// Additional feasible starting candidates; the best (by true objective)
  /// feasible point among {initialization result, candidates} seeds the loop.
  std::vector<PowerAllocation> warm_starts;
};

/// Random split plus iterated feasibility solves until every threshold is met.
/// Throws infeasible_scenario_error when the residual objective stalls below 0.
PowerAllocation initialize(const SystemConfig& cfg, const ChannelSet& ch,
                           const SensingGeometry& geo, std::mt19937_64& rng,
                           const RunOptions& opts = {});

/// The full iterative scheme: initialization, then alternating surrogate
/// construction, conic solves and ratio updates until the true overall EE
/// change drops below the tolerance.
SolveResult run(const SystemConfig& cfg, const ChannelSet& ch, const SensingGeometry& geo,
                const RunOptions& opts = {});

/// Equal communication fractions across users (one gamma per subcarrier).
SolveResult run_equalcom(const SystemConfig& cfg, const ChannelSet& ch, const SensingGeometry& geo,
                         const RunOptions& opts = {});

/// Fixed 50/50 split with uniform xi exhausting the power budget; evaluation
/// only, unless cfg.equalcs_optimize_xi requests the xi-only optimization.
SolveResult run_equalcs(const SystemConfig& cfg, const ChannelSet& ch, const SensingGeometry& geo,
                        const RunOptions& opts = {});

}  // namespace isacee
