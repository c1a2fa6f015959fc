// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "isacee/config.hpp"

namespace isacee {

/// Per-drop downlink channels: per-subcarrier Nt x K channel matrices, their ZF
/// pseudo-inverses H (H^H H)^-1, the large-scale gains and the ZF normalization.
struct ChannelSet {
  std::vector<MatrixXcd> h;       // columns h_k[q]
  std::vector<MatrixXcd> h_pinv;  // columns of H^dagger[q]
  VectorXd beta;                  // K large-scale gains
  VectorXd bar_d_beta;            // diag of (K / sum_j 1/beta_j) * D_beta^-1; sums to K
  VectorXd alpha_zf;              // per subcarrier (identical: beta is frequency flat)

  int k_users() const { return static_cast<int>(beta.size()); }
  int q_subcarriers() const { return static_cast<int>(h.size()); }
};

/// Uniform draw in the annulus [r_h, cell_radius] (area-uniform radius).
std::vector<UserPosition> draw_user_positions(const SystemConfig& cfg, std::mt19937_64& rng);

/// Large-scale gains beta_k = z_k / (r_k/r_h)^nu with log-normal shadowing z_k,
/// i.i.d. unit-variance Rayleigh small-scale entries independent across users and
/// subcarriers, ZF pseudo-inverse columns and the normalization factor
/// sqrt(K(Nt-K)/sum_k 1/beta_k). Ill-conditioned draws (smallest singular value
/// below 1e-10 of the largest) are redrawn and logged to stderr.
ChannelSet gen_channels(const SystemConfig& cfg, const std::vector<UserPosition>& users,
                        std::mt19937_64& rng);

/// Convenience: positions from cfg.user_positions when given, otherwise drawn.
ChannelSet gen_channels(const SystemConfig& cfg, std::mt19937_64& rng);

}  // namespace isacee
