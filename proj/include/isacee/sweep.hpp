// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "isacee/algorithm.hpp"
#include "isacee/oracle.hpp"

namespace isacee {

/// One experiment family: a swept scenario parameter, the schemes to run and
/// the number of channel realizations per point.
struct SweepSpec {
  std::string parameter;  // omega | p_max_dbm | crb0_db | se_threshold | n_antennas | q_subcarriers
  std::vector<double> values;
  std::vector<std::string> schemes{"proposed", "equalcom", "equalcs"};
  int n_drops = 10;
  SystemConfig base;
  int workers = 1;

  void validate() const;
};

struct SweepRow {
  std::string parameter;
  double value = 0.0;
  std::string scheme;
  int drop = -1;  // -1 marks the aggregate row
  std::string status;
  bool feasible = false;
  int converged_drops = 0;  // aggregate rows only
  int iterations = 0;
  double ee_overall = 0.0;
  double ee_c = 0.0;
  double omega_ee_s = 0.0;
  double ee_s = 0.0;
  double nor_ee_s = 0.0;  // aggregate rows only; EE_s relative to the sweep max
  double se_sum = 0.0;
  double se_min = 0.0;
  double crb_theta_db = 0.0;
  double crb_phi_db = 0.0;
  double p_tx_mw = 0.0;
  double p_tot_mw = 0.0;
};

/// Returns cfg with the named parameter applied (n_antennas expects a perfect
/// square and resizes the transmit UPA only).
SystemConfig apply_sweep_parameter(const SystemConfig& base, const std::string& name,
                                   double value);

/// Runs every (value, drop, scheme) cell: per-drop fresh seeded channels, the
/// scheme pipeline with the dominance warm-start chain (equalcs point ->
/// equalcom -> proposed), per-drop rows plus one aggregate row per (value,
/// scheme) averaged over converged drops. Failures are recorded per row and
/// never abort the sweep.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);
void write_trace_csv(const std::string& path, const SolveResult& result);
void write_metrics_csv(const std::string& path, const std::string& scheme, std::uint64_t seed,
                       const SolveResult& result, const SystemConfig& cfg);
void write_validation_csv(const std::string& path, const std::vector<OracleReport>& reports);

}  // namespace isacee
