// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "isacee/metrics.hpp"

namespace isacee {

/// One closed-form-vs-oracle comparison for the validation CSV.
struct OracleReport {
  std::string quantity;
  double closed_form = 0.0;
  double oracle = 0.0;
  double relative_error = 0.0;
  long samples = 0;  // 0 for deterministic oracles
  double tolerance = 0.0;
  bool pass = false;
};

inline OracleReport make_report(std::string name, double closed, double orc, double tol,
                                long samples = 0) {
  OracleReport r;
  r.quantity = std::move(name);
  r.closed_form = closed;
  r.oracle = orc;
  r.relative_error = rel_error(closed, orc);
  r.samples = samples;
  r.tolerance = tol;
  r.pass = r.relative_error <= tol;
  return r;
}

/// SINRs from explicit precoder columns and raw inner products; no ZF shortcuts.
VectorXd direct_se(const PowerAllocation& alloc, const ChannelSet& ch, const SensingGeometry& geo,
                   const SystemConfig& cfg);

/// CRBs via dense matrix traces: the analytic waveform covariance, the six FIM
/// blocks as traces of dG/G products, aggregation over subcarriers and a numeric
/// 2x2 inversion of the equivalent FIM.
CrbPair numeric_fim(const PowerAllocation& alloc, const ChannelSet& ch, const SensingGeometry& geo,
                    const SystemConfig& cfg);

/// Analytic per-subcarrier waveform covariance (1/Nt)(xi^T bar_D_beta gamma I + a xi^T eta a^H).
std::vector<MatrixXcd> analytic_covariance(const PowerAllocation& alloc, const ChannelSet& ch,
                                           const SensingGeometry& geo);

/// Monte-Carlo waveform covariance: (1/L) X X^H averaged over independent draws of
/// small-scale fading and unit-variance Gaussian symbol matrices.
std::vector<MatrixXcd> mc_covariance(const PowerAllocation& alloc, const VectorXd& beta,
                                     const SensingGeometry& geo, const SystemConfig& cfg,
                                     long n_samples, std::mt19937_64& rng);

/// Monte-Carlo transmit power. Per-symbol convention: the symbol expectation is
/// exact (tr(F D_xi^2 F^H) per draw), Monte Carlo runs over fading only.
double mc_transmit_power(const PowerAllocation& alloc, const VectorXd& beta,
                         const SensingGeometry& geo, const SystemConfig& cfg, long n_samples,
                         std::mt19937_64& rng);

struct GridSpec {
  std::vector<double> xi_levels;     // absolute mW values
  std::vector<double> gamma_levels;  // in (0,1); eta = 1 - gamma
};

struct GridSearchResult {
  bool found = false;  // false when no grid point is feasible
  PowerAllocation best;
  double objective = 0.0;
  long evaluated = 0;
  long feasible_count = 0;
};

/// Exhaustive true-objective evaluation over the Cartesian (xi, gamma) grid per
/// (k, q), filtered by the rate/CRB/power constraints. Intended for K*Q <= 4.
GridSearchResult grid_search(const SystemConfig& cfg, const ChannelSet& ch,
                             const SensingGeometry& geo, const GridSpec& grid);

/// Tolerances for the validation suite; overridable from a key=value file.
struct OracleTolerances {
  double se_identity = 1e-10;
  double crb_identity = 1e-8;
  double crb_homogeneity = 1e-9;
  double mc_relative = 0.05;
  double bound_slack = 1e-12;
  long mc_samples = 10000;
  int identity_instances = 50;
};

OracleTolerances load_tolerances(const std::string& path);

/// Runs every oracle/closed-form pair at desk scale; one report row per check.
std::vector<OracleReport> run_validation_suite(const SystemConfig& cfg,
                                               const OracleTolerances& tol);

}  // namespace isacee
