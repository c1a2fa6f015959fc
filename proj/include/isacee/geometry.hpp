// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "isacee/config.hpp"

namespace isacee {

enum class AngleVar { Theta, Phi };

/// UPA response toward (theta, phi) at subcarrier frequency f_q: the Kronecker
/// product of the horizontal factor exp(j*pi*(f_q/f_c)*(n-1)*sin(theta)sin(phi))
/// and the vertical factor exp(j*pi*(f_q/f_c)*(n-1)*cos(phi)). First entry 1,
/// all entries unit modulus, squared norm n_h*n_v.
VectorXcd steering_vector(double theta, double phi, double f_q, double f_c, int n_h, int n_v);

/// Elementwise analytic derivative of steering_vector with respect to the named
/// angle. Only the horizontal factor depends on theta; both factors depend on
/// phi (product rule across the Kronecker structure).
VectorXcd steering_derivative(double theta, double phi, double f_q, double f_c, int n_h, int n_v,
                              AngleVar wrt);

/// Per-subcarrier steering vectors, their derivatives, two-way channel matrices
/// and every scalar constant of the closed-form FIM, all evaluated at the
/// target angles. Index 0..Q-1 maps to subcarriers 1..Q.
struct SensingGeometry {
  int nt = 0;
  int nr = 0;
  std::vector<VectorXcd> a_tx, b_rx;
  std::vector<VectorXcd> da_theta, da_phi, db_theta, db_phi;
  std::vector<MatrixXcd> g, dg_theta, dg_phi;   // G = b a^H and its angle derivatives

  // a^H dG_x^H dG_y a (real for the UPA geometry), a^H dG_x^H G a (complex),
  // a^H G^H G a, and the corresponding matrix traces.
  VectorXd c_tt, c_tp, c_pp;
  VectorXcd c_t, c_p;
  VectorXd c2;
  VectorXd tr_tt, tr_tp, tr_pp;
  VectorXcd tr_t, tr_p;
  VectorXd tr_gg;
};

SensingGeometry build_geometry(const SystemConfig& cfg);

}  // namespace isacee
