// SPDX-License-Identifier: Apache-2.0
#include "isacee/metrics.hpp"

#include <cmath>

namespace isacee {

double MetricsReport::max_violation(const SystemConfig& cfg) const {
  double v = p_tx - cfg.p_max;
  if (cfg.se_threshold > 0)
    v = std::max(v, cfg.se_threshold - se_per_user.minCoeff());
  if (std::isfinite(cfg.crb0_theta)) v = std::max(v, crb_theta - cfg.crb0_theta);
  if (std::isfinite(cfg.crb0_phi)) v = std::max(v, crb_phi - cfg.crb0_phi);
  return v;
}

double effective_gain(int k, int i, int q, const PowerAllocation& alloc, const ChannelSet& ch,
                      const SensingGeometry& geo) {
  const double nt = static_cast<double>(geo.nt);
  const cplx hka = (ch.h[q].col(k).adjoint() * geo.a_tx[q])(0);
  const double g2 = std::norm(hka);
  if (i != k) return alloc.eta(i, q) * g2 / nt;
  const double azf = ch.alpha_zf(q);
  // Re{h_k^T a*} equals Re{h_k^H a}.
  const double cross = hka.real();
  return azf * azf * alloc.gamma(k, q) + alloc.eta(k, q) * g2 / nt +
         2.0 * (azf / std::sqrt(nt)) * std::sqrt(alloc.gamma(k, q) * alloc.eta(k, q)) * cross;
}

VectorXd se_per_user(const PowerAllocation& alloc, const ChannelSet& ch, const SensingGeometry& geo,
                     const SystemConfig& cfg) {
  const int K = alloc.k_users();
  const int Q = alloc.q_subcarriers();
  VectorXd se = VectorXd::Zero(K);
  for (int q = 0; q < Q; ++q) {
    for (int k = 0; k < K; ++k) {
      const double num = alloc.xi(k, q) * effective_gain(k, k, q, alloc, ch, geo);
      double den = cfg.sigma_c_sq;
      for (int j = 0; j < K; ++j)
        if (j != k) den += alloc.xi(j, q) * effective_gain(k, j, q, alloc, ch, geo);
      se(k) += std::log2(1.0 + num / den);
    }
  }
  return se;
}

FimElements fim_elements(const PowerAllocation& alloc, const ChannelSet& ch,
                         const SensingGeometry& geo, const SystemConfig& cfg) {
  const int K = alloc.k_users();
  const int Q = alloc.q_subcarriers();
  FimElements f;
  f.kappa_bar = 2.0 * cfg.frame_len / (cfg.sigma_s_sq * geo.nt);
  const double a2 = std::norm(cfg.alpha_refl);
  const cplx ac = std::conj(cfg.alpha_refl);

  double s_tt = 0.0, s_tp = 0.0, s_pp = 0.0, s_den = 0.0;
  cplx s_t = 0.0, s_p = 0.0;
  for (int q = 0; q < Q; ++q) {
    double pc = 0.0, ps = 0.0;  // xi^T bar_D_beta gamma and xi^T eta at subcarrier q
    for (int k = 0; k < K; ++k) {
      pc += alloc.xi(k, q) * ch.bar_d_beta(k) * alloc.gamma(k, q);
      ps += alloc.xi(k, q) * alloc.eta(k, q);
    }
    s_tt += geo.tr_tt(q) * pc + geo.c_tt(q) * ps;
    s_tp += geo.tr_tp(q) * pc + geo.c_tp(q) * ps;
    s_pp += geo.tr_pp(q) * pc + geo.c_pp(q) * ps;
    s_t += geo.tr_t(q) * pc + geo.c_t(q) * ps;
    s_p += geo.tr_p(q) * pc + geo.c_p(q) * ps;
    s_den += geo.tr_gg(q) * pc + geo.c2(q) * ps;
  }

  f.tau_tt = f.kappa_bar * a2 * s_tt;
  f.tau_tp = f.kappa_bar * a2 * s_tp;
  f.tau_pp = f.kappa_bar * a2 * s_pp;
  const cplx at = ac * s_t;
  const cplx ap = ac * s_p;
  f.t_ta = f.kappa_bar * Eigen::Vector2d(at.real(), -at.imag());
  f.t_pa = f.kappa_bar * Eigen::Vector2d(ap.real(), -ap.imag());
  f.t_aa_scalar = f.kappa_bar * s_den;
  return f;
}

CrbPair crb(const FimElements& fim) {
  if (fim.t_aa_scalar <= 0)
    throw degenerate_fim_error("crb: nonpositive reflection-coefficient information",
                               fim.t_aa_scalar);
  const double t_paap = fim.t_pa.squaredNorm() / fim.t_aa_scalar;
  const double phi_core = fim.tau_pp - t_paap;
  if (phi_core <= 0)
    throw degenerate_fim_error("crb: nonpositive elevation Schur complement", phi_core);
  if (fim.tau_tt <= 0)
    throw degenerate_fim_error("crb: nonpositive azimuth information", fim.tau_tt);

  const double den_theta = fim.tau_tt - fim.tau_tp * fim.tau_tp / phi_core;
  const double den_phi = phi_core - fim.tau_tp * fim.tau_tp / fim.tau_tt;
  if (den_theta <= 0)
    throw degenerate_fim_error("crb: degenerate azimuth FIM", den_theta);
  if (den_phi <= 0)
    throw degenerate_fim_error("crb: degenerate elevation FIM", den_phi);
  return {1.0 / den_theta, 1.0 / den_phi};
}

MetricsReport evaluate(const PowerAllocation& alloc, const ChannelSet& ch,
                       const SensingGeometry& geo, const SystemConfig& cfg) {
  constexpr double kFeasTol = 1e-6;
  MetricsReport r;
  r.se_per_user = se_per_user(alloc, ch, geo, cfg);
  r.se_sum = r.se_per_user.sum();
  r.p_tx = transmit_power(alloc, ch);
  r.p_tot = total_power(alloc, r.se_sum, cfg, ch);
  const CrbPair c = crb(fim_elements(alloc, ch, geo, cfg));
  r.crb_theta = c.theta;
  r.crb_phi = c.phi;
  r.ee_c = r.se_sum / r.p_tot;
  r.ee_s = (1.0 / r.crb_theta + 1.0 / r.crb_phi) / r.p_tot;
  r.objective = r.ee_c + cfg.omega * r.ee_s;
  r.feas_se = cfg.se_threshold <= 0 || r.se_per_user.minCoeff() >= cfg.se_threshold - kFeasTol;
  r.feas_crb_theta = !std::isfinite(cfg.crb0_theta) || r.crb_theta <= cfg.crb0_theta + kFeasTol;
  r.feas_crb_phi = !std::isfinite(cfg.crb0_phi) || r.crb_phi <= cfg.crb0_phi + kFeasTol;
  r.feas_power = r.p_tx <= cfg.p_max + kFeasTol;
  return r;
}

}  // namespace isacee
