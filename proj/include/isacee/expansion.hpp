// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "isacee/bounds.hpp"
#include "isacee/metrics.hpp"

namespace isacee {

/// A feasible allocation with every per-(k,q) quantity the surrogate builders
/// expand around: SINR numerators/denominators and the logarithmic bound
/// coefficients. Entries of the reference allocation are clamped to 1e-8 so the
/// product-bound references stay strictly positive.
struct ExpansionPoint {
  PowerAllocation omega;  // clamped reference allocation
  ArrayXXd num, den;      // SINR numerator/denominator at the reference (K x Q)
  ArrayXXd lb_a, lb_b, lb_c;
  ArrayXXd ub_a, ub_b, ub_c;

  static ExpansionPoint from(const PowerAllocation& alloc, const ChannelSet& ch,
                             const SensingGeometry& geo, const SystemConfig& cfg);
};

/// |h_k^H a[q]|^2 and Re{h_k^T a*[q]} for every (k, q); shared by the closed
/// forms and the builders.
struct ChannelGeometryCache {
  ArrayXXd gain_sq;  // K x Q
  ArrayXXd cross;    // K x Q

  static ChannelGeometryCache from(const ChannelSet& ch, const SensingGeometry& geo);
};

}  // namespace isacee
