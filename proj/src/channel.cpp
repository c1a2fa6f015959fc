// SPDX-License-Identifier: Apache-2.0
#include "isacee/channel.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <iostream>

namespace isacee {

std::vector<UserPosition> draw_user_positions(const SystemConfig& cfg, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<UserPosition> users(cfg.k_users);
  const double r0sq = cfg.r_h * cfg.r_h;
  const double r1sq = cfg.cell_radius * cfg.cell_radius;
  for (auto& u : users) {
    u.r_m = std::sqrt(r0sq + unif(rng) * (r1sq - r0sq));
    u.azimuth_rad = 2.0 * kPi * unif(rng) - kPi;
  }
  return users;
}

namespace {

MatrixXcd draw_small_scale(int nt, int k, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  MatrixXcd m(nt, k);
  const double s = 1.0 / std::sqrt(2.0);
  for (int c = 0; c < k; ++c)
    for (int r = 0; r < nt; ++r) m(r, c) = cplx(gauss(rng) * s, gauss(rng) * s);
  return m;
}

}  // namespace

ChannelSet gen_channels(const SystemConfig& cfg, const std::vector<UserPosition>& users,
                        std::mt19937_64& rng) {
  cfg.validate();
  if (static_cast<int>(users.size()) != cfg.k_users)
    throw std::invalid_argument("gen_channels: need exactly k_users positions");
  for (const auto& u : users)
    if (u.r_m < cfg.r_h) throw std::invalid_argument("gen_channels: user inside r_h");

  const int K = cfg.k_users;
  const int Nt = cfg.nt();
  const int Q = cfg.q_subcarriers;

  ChannelSet ch;
  ch.beta.resize(K);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int k = 0; k < K; ++k) {
    const double shadow_db = cfg.sigma_shadow_db * gauss(rng);
    const double z = std::pow(10.0, shadow_db / 10.0);
    ch.beta(k) = z / std::pow(users[k].r_m / cfg.r_h, cfg.nu_pathloss);
  }

  const double inv_beta_sum = (1.0 / ch.beta.array()).sum();
  ch.bar_d_beta = (static_cast<double>(K) / inv_beta_sum) * (1.0 / ch.beta.array());
  const double azf = std::sqrt(static_cast<double>(K) * (Nt - K) / inv_beta_sum);
  ch.alpha_zf = VectorXd::Constant(Q, azf);

  ch.h.resize(Q);
  ch.h_pinv.resize(Q);
  for (int qi = 0; qi < Q; ++qi) {
    MatrixXcd H;
    for (int attempt = 0;; ++attempt) {
      H = draw_small_scale(Nt, K, rng);
      for (int k = 0; k < K; ++k) H.col(k) *= std::sqrt(ch.beta(k));
      Eigen::JacobiSVD<MatrixXcd> svd(H);
      const double smin = svd.singularValues().minCoeff();
      const double smax = svd.singularValues().maxCoeff();
      if (smin > 1e-10 * smax) break;
      std::cerr << "gen_channels: ill-conditioned draw at subcarrier " << (qi + 1)
                << " (attempt " << attempt + 1 << "), regenerating\n";
    }
    ch.h[qi] = H;
    // H (H^H H)^{-1} via a Hermitian solve; K x K Gram is small.
    const MatrixXcd gram = H.adjoint() * H;
    ch.h_pinv[qi] = H * gram.ldlt().solve(MatrixXcd::Identity(K, K));
  }
  return ch;
}

ChannelSet gen_channels(const SystemConfig& cfg, std::mt19937_64& rng) {
  if (!cfg.user_positions.empty()) return gen_channels(cfg, cfg.user_positions, rng);
  const auto users = draw_user_positions(cfg, rng);
  return gen_channels(cfg, users, rng);
}

}  // namespace isacee
