// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "isacee/common.hpp"

namespace isacee {

/// Polar user position relative to the BS at the origin.
struct UserPosition {
  double r_m = 0.0;        // distance from BS, meters
  double azimuth_rad = 0.0;
};

/// All scenario constants. Powers in mW, noise normalized to 1, angles in radians,
/// CRB ceilings in rad^2. See configs/*.cfg for the file schema.
struct SystemConfig {
  // UPA dimensions (Nt = n_th*n_tv transmit, Nr = n_rh*n_rv receive).
  int n_th = 3;
  int n_tv = 3;
  int n_rh = 3;
  int n_rv = 3;
  int k_users = 3;
  int q_subcarriers = 4;
  double f_c = 2.0e9;        // Hz
  double bandwidth = 10.0e6; // Hz
  int frame_len = 30;        // L

  double sigma_c_sq = 1.0;
  double sigma_s_sq = 1.0;

  double p_max = 100.0;          // mW (20 dBm)
  double p_0 = 5.6;              // mW
  double epsilon_dyn = 2.51188643150958e-3; // mW per bps/Hz (-26 dBm per unit rate)
  double rho_amp = 0.35;         // amplifier efficiency, (0,1]

  double omega = 1.0e-3;         // EE trade-off weight
  double se_threshold = 4.0;     // bps/Hz per user (0 disables)
  double crb0_theta = 1.0e-3;    // rad^2 (-30 dB; +inf disables)
  double crb0_phi = 1.0e-3;      // rad^2

  double target_theta = kPi / 8.0; // azimuth in [-pi, pi]
  double target_phi = kPi / 4.0;   // elevation in [-pi/2, pi/2]
  cplx alpha_refl = {1.0, 0.0};    // reflection coefficient

  double cell_radius = 220.0;   // m
  double r_h = 100.0;           // m, minimum BS-user distance
  double nu_pathloss = 3.2;
  double sigma_shadow_db = 7.0;

  std::uint64_t rng_seed = 1;

  // Optional fixed user placement (otherwise drawn uniformly in the annulus).
  std::vector<UserPosition> user_positions;

  // EqualC&S variant: optimize xi under the fixed 50/50 split instead of the
  // uniform closed-form point.
  bool equalcs_optimize_xi = false;

  int nt() const { return n_th * n_tv; }
  int nr() const { return n_rh * n_rv; }

  /// Throws std::invalid_argument on violated invariants (Nt>K, positive powers, ...).
  void validate() const;
};

/// Scenario used by the unit/acceptance suites: 3x3 UPAs, K=3, Q=4, thresholds
/// scaled so that typical drops are feasible at 20 dBm.
SystemConfig desk_scale_config();

/// The published large-scale scenario: 5x5 UPAs, K=6, Q=16, 1000 m cell.
SystemConfig paper_scale_config();

/// Structured-text config loader. Keys mirror SystemConfig fields; values accept
/// unit suffixes (dBm/mW for powers, dB/rad2 for CRB ceilings, deg/rad for angles,
/// GHz/MHz/kHz/Hz for frequencies). Throws std::invalid_argument with the offending
/// line on parse errors.
SystemConfig load_config(const std::string& path);

/// q-th subcarrier frequency, q in 1..Q. Throws std::domain_error out of range.
double subcarrier_freq(int q, const SystemConfig& cfg);

}  // namespace isacee
