// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "isacee/allocation.hpp"
#include "isacee/channel.hpp"
#include "isacee/geometry.hpp"

namespace isacee {

/// The dual-function precoder column for user k at subcarrier q:
/// alpha_zf * sqrt(gamma) * pinv-column + sqrt(eta/Nt) * a. Indices 0-based.
VectorXcd dual_precoder_column(int k, int q, const PowerAllocation& alloc, const ChannelSet& ch,
                               const SensingGeometry& geo);

/// Closed-form BS transmit power sum_q xi[q]^T (bar_D_beta gamma[q] + eta[q]) in mW.
double transmit_power(const PowerAllocation& alloc, const ChannelSet& ch);

/// Total consumption rho^-1 P_TX + P_0 + epsilon * se_sum (se_sum in bps/Hz).
double total_power(const PowerAllocation& alloc, double se_sum, const SystemConfig& cfg,
                   const ChannelSet& ch);

}  // namespace isacee
