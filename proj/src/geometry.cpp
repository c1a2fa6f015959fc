// SPDX-License-Identifier: Apache-2.0
#include "isacee/geometry.hpp"

#include <cmath>

namespace isacee {

namespace {

// Horizontal/vertical phase-progression factors and their angle derivatives.
// Each factor entry is exp(j*c*(n-1)) with c the per-element phase increment;
// the derivative multiplies entry n by j*(n-1)*dc.
VectorXcd phase_vector(double c, int n) {
  VectorXcd v(n);
  for (int i = 0; i < n; ++i) v(i) = std::polar(1.0, c * i);
  return v;
}

VectorXcd phase_vector_derivative(double c, double dc, int n) {
  VectorXcd v(n);
  for (int i = 0; i < n; ++i) v(i) = cplx(0.0, dc * i) * std::polar(1.0, c * i);
  return v;
}

VectorXcd kron(const VectorXcd& a, const VectorXcd& b) {
  VectorXcd out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

double require_real(const cplx& v, const char* what) {
  if (std::abs(v.imag()) > 1e-8 * std::max(1.0, std::abs(v.real())))
    throw std::runtime_error(std::string("geometry: expected real-valued ") + what);
  return v.real();
}

}  // namespace

VectorXcd steering_vector(double theta, double phi, double f_q, double f_c, int n_h, int n_v) {
  const double scale = kPi * f_q / f_c;
  const double ch = scale * std::sin(theta) * std::sin(phi);
  const double cv = scale * std::cos(phi);
  return kron(phase_vector(ch, n_h), phase_vector(cv, n_v));
}

VectorXcd steering_derivative(double theta, double phi, double f_q, double f_c, int n_h, int n_v,
                              AngleVar wrt) {
  const double scale = kPi * f_q / f_c;
  const double ch = scale * std::sin(theta) * std::sin(phi);
  const double cv = scale * std::cos(phi);
  const VectorXcd ah = phase_vector(ch, n_h);
  const VectorXcd av = phase_vector(cv, n_v);
  if (wrt == AngleVar::Theta) {
    const double dch = scale * std::cos(theta) * std::sin(phi);
    return kron(phase_vector_derivative(ch, dch, n_h), av);
  }
  const double dch = scale * std::sin(theta) * std::cos(phi);
  const double dcv = -scale * std::sin(phi);
  return kron(phase_vector_derivative(ch, dch, n_h), av) +
         kron(ah, phase_vector_derivative(cv, dcv, n_v));
}

SensingGeometry build_geometry(const SystemConfig& cfg) {
  if (cfg.n_th < 1 || cfg.n_tv < 1 || cfg.n_rh < 1 || cfg.n_rv < 1)
    throw std::invalid_argument("build_geometry: UPA dimensions must be >= 1");
  if (cfg.q_subcarriers < 1 || cfg.f_c <= 0 || cfg.bandwidth <= 0)
    throw std::invalid_argument("build_geometry: invalid subcarrier grid");
  const int Q = cfg.q_subcarriers;
  SensingGeometry geo;
  geo.nt = cfg.nt();
  geo.nr = cfg.nr();
  geo.a_tx.resize(Q);
  geo.b_rx.resize(Q);
  geo.da_theta.resize(Q);
  geo.da_phi.resize(Q);
  geo.db_theta.resize(Q);
  geo.db_phi.resize(Q);
  geo.g.resize(Q);
  geo.dg_theta.resize(Q);
  geo.dg_phi.resize(Q);
  geo.c_tt.resize(Q);
  geo.c_tp.resize(Q);
  geo.c_pp.resize(Q);
  geo.c_t.resize(Q);
  geo.c_p.resize(Q);
  geo.c2.resize(Q);
  geo.tr_tt.resize(Q);
  geo.tr_tp.resize(Q);
  geo.tr_pp.resize(Q);
  geo.tr_t.resize(Q);
  geo.tr_p.resize(Q);
  geo.tr_gg.resize(Q);

  const double th = cfg.target_theta;
  const double ph = cfg.target_phi;
  for (int qi = 0; qi < Q; ++qi) {
    const double fq = subcarrier_freq(qi + 1, cfg);
    const VectorXcd a = steering_vector(th, ph, fq, cfg.f_c, cfg.n_th, cfg.n_tv);
    const VectorXcd b = steering_vector(th, ph, fq, cfg.f_c, cfg.n_rh, cfg.n_rv);
    const VectorXcd dat = steering_derivative(th, ph, fq, cfg.f_c, cfg.n_th, cfg.n_tv, AngleVar::Theta);
    const VectorXcd dap = steering_derivative(th, ph, fq, cfg.f_c, cfg.n_th, cfg.n_tv, AngleVar::Phi);
    const VectorXcd dbt = steering_derivative(th, ph, fq, cfg.f_c, cfg.n_rh, cfg.n_rv, AngleVar::Theta);
    const VectorXcd dbp = steering_derivative(th, ph, fq, cfg.f_c, cfg.n_rh, cfg.n_rv, AngleVar::Phi);

    geo.a_tx[qi] = a;
    geo.b_rx[qi] = b;
    geo.da_theta[qi] = dat;
    geo.da_phi[qi] = dap;
    geo.db_theta[qi] = dbt;
    geo.db_phi[qi] = dbp;

    const MatrixXcd G = b * a.adjoint();
    const MatrixXcd Gt = dbt * a.adjoint() + b * dat.adjoint();
    const MatrixXcd Gp = dbp * a.adjoint() + b * dap.adjoint();
    geo.g[qi] = G;
    geo.dg_theta[qi] = Gt;
    geo.dg_phi[qi] = Gp;

    auto quad = [&](const MatrixXcd& X, const MatrixXcd& Y) -> cplx {
      return (a.adjoint() * (X.adjoint() * (Y * a)))(0);
    };
    geo.c_tt(qi) = require_real(quad(Gt, Gt), "c_tt");
    geo.c_tp(qi) = require_real(quad(Gt, Gp), "c_tp");
    geo.c_pp(qi) = require_real(quad(Gp, Gp), "c_pp");
    geo.c_t(qi) = quad(Gt, G);
    geo.c_p(qi) = quad(Gp, G);
    geo.c2(qi) = require_real(quad(G, G), "c2");

    geo.tr_tt(qi) = require_real((Gt.adjoint() * Gt).trace(), "tr_tt");
    geo.tr_tp(qi) = require_real((Gt.adjoint() * Gp).trace(), "tr_tp");
    geo.tr_pp(qi) = require_real((Gp.adjoint() * Gp).trace(), "tr_pp");
    geo.tr_t(qi) = (Gt.adjoint() * G).trace();
    geo.tr_p(qi) = (Gp.adjoint() * G).trace();
    geo.tr_gg(qi) = require_real((G.adjoint() * G).trace(), "tr_gg");
  }
  return geo;
}

}  // namespace isacee
