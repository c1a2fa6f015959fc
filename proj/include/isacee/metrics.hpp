// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "isacee/power.hpp"

namespace isacee {

/// Closed-form equivalent-FIM pieces for (theta, phi). All entries are linear in
/// xi for fixed (gamma, eta); kappa_bar = 2L/(sigma_s^2 * Nt).
struct FimElements {
  double tau_tt = 0.0;
  double tau_tp = 0.0;
  double tau_pp = 0.0;
  Eigen::Vector2d t_ta = Eigen::Vector2d::Zero();
  Eigen::Vector2d t_pa = Eigen::Vector2d::Zero();
  double t_aa_scalar = 0.0;  // the scalar multiplying I_2
  double kappa_bar = 0.0;
};

struct CrbPair {
  double theta = 0.0;  // rad^2
  double phi = 0.0;    // rad^2
};

/// Everything the experiments record for one allocation.
struct MetricsReport {
  VectorXd se_per_user;  // bps/Hz
  double se_sum = 0.0;
  double p_tx = 0.0;     // mW
  double p_tot = 0.0;    // mW
  double crb_theta = 0.0;
  double crb_phi = 0.0;
  double ee_c = 0.0;      // bits/J/Hz (per mW in normalized units)
  double ee_s = 0.0;      // 1/rad^2/W (normalized)
  double objective = 0.0; // ee_c + omega * ee_s
  bool feas_se = false;
  bool feas_crb_theta = false;
  bool feas_crb_phi = false;
  bool feas_power = false;

  bool feasible() const { return feas_se && feas_crb_theta && feas_crb_phi && feas_power; }
  /// Signed worst violation of (25b)-(25e); <= 0 when feasible.
  double max_violation(const SystemConfig& cfg) const;
};

/// |h_k^H f_i[q]|^2 via the ZF identities: for i==k the coherent combination of the
/// ZF gain and the sensing beam; for i!=k only the sensing leakage term survives.
double effective_gain(int k, int i, int q, const PowerAllocation& alloc, const ChannelSet& ch,
                      const SensingGeometry& geo);

/// Per-user spectral efficiency, closed form.
VectorXd se_per_user(const PowerAllocation& alloc, const ChannelSet& ch, const SensingGeometry& geo,
                     const SystemConfig& cfg);

FimElements fim_elements(const PowerAllocation& alloc, const ChannelSet& ch,
                         const SensingGeometry& geo, const SystemConfig& cfg);

/// Closed-form CRBs from the equivalent 2x2 FIM. Throws degenerate_fim_error when a
/// Schur complement or diagonal entry is nonpositive.
CrbPair crb(const FimElements& fim);

/// Assembles SE, powers, CRBs, both EE terms and the weighted objective, plus
/// feasibility flags at 1e-6 absolute tolerance.
MetricsReport evaluate(const PowerAllocation& alloc, const ChannelSet& ch,
                       const SensingGeometry& geo, const SystemConfig& cfg);

}  // namespace isacee
