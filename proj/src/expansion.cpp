// SPDX-License-Identifier: Apache-2.0
#include "isacee/expansion.hpp"

namespace isacee {

ChannelGeometryCache ChannelGeometryCache::from(const ChannelSet& ch, const SensingGeometry& geo) {
  const int K = ch.k_users();
  const int Q = ch.q_subcarriers();
  ChannelGeometryCache cache;
  cache.gain_sq.resize(K, Q);
  cache.cross.resize(K, Q);
  for (int q = 0; q < Q; ++q)
    for (int k = 0; k < K; ++k) {
      const cplx hka = (ch.h[q].col(k).adjoint() * geo.a_tx[q])(0);
      cache.gain_sq(k, q) = std::norm(hka);
      cache.cross(k, q) = hka.real();  // Re{h^T a*} = Re{h^H a}
    }
  return cache;
}

ExpansionPoint ExpansionPoint::from(const PowerAllocation& alloc, const ChannelSet& ch,
                                    const SensingGeometry& geo, const SystemConfig& cfg) {
  constexpr double kClamp = 1e-8;
  const int K = alloc.k_users();
  const int Q = alloc.q_subcarriers();

  ExpansionPoint pt;
  pt.omega = alloc;
  pt.omega.xi = pt.omega.xi.max(kClamp);
  pt.omega.gamma = pt.omega.gamma.max(kClamp);
  pt.omega.eta = pt.omega.eta.max(kClamp);

  const auto cache = ChannelGeometryCache::from(ch, geo);
  const double nt = static_cast<double>(geo.nt);

  pt.num.resize(K, Q);
  pt.den.resize(K, Q);
  pt.lb_a.resize(K, Q);
  pt.lb_b.resize(K, Q);
  pt.lb_c.resize(K, Q);
  pt.ub_a.resize(K, Q);
  pt.ub_b.resize(K, Q);
  pt.ub_c.resize(K, Q);

  for (int q = 0; q < Q; ++q) {
    const double azf = ch.alpha_zf(q);
    for (int k = 0; k < K; ++k) {
      const double xi = pt.omega.xi(k, q);
      const double ga = pt.omega.gamma(k, q);
      const double et = pt.omega.eta(k, q);
      double n = xi * (azf * azf * ga + cache.gain_sq(k, q) * et / nt +
                       2.0 * (azf / std::sqrt(nt)) * std::sqrt(ga * et) * cache.cross(k, q));
      n = std::max(n, 1e-12 * cfg.sigma_c_sq);  // exact cancellation guard
      double d = cfg.sigma_c_sq;
      for (int j = 0; j < K; ++j)
        if (j != k) d += pt.omega.xi(j, q) * pt.omega.eta(j, q) * cache.gain_sq(k, q) / nt;
      pt.num(k, q) = n;
      pt.den(k, q) = d;
      const RateLbCoeffs lb = rate_lb_coeffs(n, d);
      const RateUbCoeffs ub = rate_ub_coeffs(n, d);
      pt.lb_a(k, q) = lb.a;
      pt.lb_b(k, q) = lb.b;
      pt.lb_c(k, q) = lb.c;
      pt.ub_a(k, q) = ub.a;
      pt.ub_b(k, q) = ub.b;
      pt.ub_c(k, q) = ub.c;
    }
  }
  return pt;
}

}  // namespace isacee
