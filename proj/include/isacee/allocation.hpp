// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "isacee/common.hpp"
#include "isacee/config.hpp"

namespace isacee {

/// The decision variables: per-user per-subcarrier transmit power xi (mW) and the
/// communication/sensing split fractions gamma/eta with gamma + eta = 1.
/// Arrays are K x Q (row k, column q).
struct PowerAllocation {
  ArrayXXd xi;
  ArrayXXd gamma;
  ArrayXXd eta;

  PowerAllocation() = default;
  PowerAllocation(int k, int q)
      : xi(ArrayXXd::Zero(k, q)), gamma(ArrayXXd::Zero(k, q)), eta(ArrayXXd::Ones(k, q)) {}

  int k_users() const { return static_cast<int>(xi.rows()); }
  int q_subcarriers() const { return static_cast<int>(xi.cols()); }

  /// gamma+eta=1 within tol, all entries finite and nonnegative.
  bool valid(double tol = 1e-9) const {
    if (!xi.isFinite().all() || !gamma.isFinite().all() || !eta.isFinite().all()) return false;
    if ((xi < 0).any() || (gamma < 0).any() || (eta < 0).any()) return false;
    return ((gamma + eta - 1.0).abs() <= tol).all();
  }
};

/// Uniform xi = p for every (k, q) with a common split gamma.
inline PowerAllocation uniform_allocation(int k, int q, double p, double gamma_frac) {
  PowerAllocation a(k, q);
  a.xi.setConstant(p);
  a.gamma.setConstant(gamma_frac);
  a.eta.setConstant(1.0 - gamma_frac);
  return a;
}

/// The 50/50 fixed-split baseline point: gamma = eta = 0.5 and uniform
/// xi = p_max/(K*Q), which meets the power budget with equality.
inline PowerAllocation equal_cs_allocation(const SystemConfig& cfg) {
  return uniform_allocation(cfg.k_users, cfg.q_subcarriers,
                            cfg.p_max / (cfg.k_users * cfg.q_subcarriers), 0.5);
}

}  // namespace isacee
