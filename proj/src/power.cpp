// SPDX-License-Identifier: Apache-2.0
#include "isacee/power.hpp"

namespace isacee {

VectorXcd dual_precoder_column(int k, int q, const PowerAllocation& alloc, const ChannelSet& ch,
                               const SensingGeometry& geo) {
  const double nt = static_cast<double>(geo.nt);
  return ch.alpha_zf(q) * std::sqrt(alloc.gamma(k, q)) * ch.h_pinv[q].col(k) +
         std::sqrt(alloc.eta(k, q) / nt) * geo.a_tx[q];
}

double transmit_power(const PowerAllocation& alloc, const ChannelSet& ch) {
  double total = 0.0;
  for (int q = 0; q < alloc.q_subcarriers(); ++q)
    total += (alloc.xi.col(q) * (ch.bar_d_beta.array() * alloc.gamma.col(q) + alloc.eta.col(q))).sum();
  return total;
}

double total_power(const PowerAllocation& alloc, double se_sum, const SystemConfig& cfg,
                   const ChannelSet& ch) {
  if (se_sum < 0) throw std::invalid_argument("total_power: negative sum rate");
  return transmit_power(alloc, ch) / cfg.rho_amp + cfg.p_0 + cfg.epsilon_dyn * se_sum;
}

}  // namespace isacee
