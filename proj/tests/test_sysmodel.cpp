// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "isacee/channel.hpp"
#include "isacee/geometry.hpp"
#include "isacee/metrics.hpp"
#include "isacee/power.hpp"

using namespace isacee;

namespace {

SystemConfig small_cfg(int k, int q, int n_th, int n_tv) {
  SystemConfig cfg = desk_scale_config();
  cfg.k_users = k;
  cfg.q_subcarriers = q;
  cfg.n_th = n_th;
  cfg.n_tv = n_tv;
  cfg.n_rh = n_th;
  cfg.n_rv = n_tv;
  cfg.user_positions.clear();
  cfg.validate();
  return cfg;
}

PowerAllocation random_alloc(int k, int q, double xi_hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PowerAllocation a(k, q);
  for (int qq = 0; qq < q; ++qq)
    for (int kk = 0; kk < k; ++kk) {
      a.xi(kk, qq) = xi_hi * (0.05 + 0.95 * u(rng));
      a.gamma(kk, qq) = 0.05 + 0.9 * u(rng);
      a.eta(kk, qq) = 1.0 - a.gamma(kk, qq);
    }
  return a;
}

}  // namespace

TEST_CASE("subcarrier frequencies") {
  SystemConfig cfg = desk_scale_config();
  cfg.f_c = 2e9;
  cfg.bandwidth = 10e6;
  cfg.q_subcarriers = 16;

  CHECK(subcarrier_freq(16, cfg) == doctest::Approx(2e9).epsilon(1e-15));
  CHECK(subcarrier_freq(8, cfg) == doctest::Approx(2e9 - 2.5e6).epsilon(1e-15));
  CHECK(subcarrier_freq(1, cfg) == doctest::Approx(2e9 - 4.6875e6).epsilon(1e-15));
  CHECK_THROWS_AS(subcarrier_freq(0, cfg), std::domain_error);
  CHECK_THROWS_AS(subcarrier_freq(17, cfg), std::domain_error);
}

TEST_CASE("config validation rejects Nt == K") {
  SystemConfig cfg = desk_scale_config();
  cfg.k_users = cfg.nt();
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("steering vector basics") {
  const VectorXcd one = steering_vector(0.3, 0.7, 2e9, 2e9, 1, 1);
  REQUIRE(one.size() == 1);
  CHECK(std::abs(one(0) - cplx(1, 0)) < 1e-15);

  // sin(theta)=0 kills the horizontal phase progression
  const VectorXcd flat = steering_vector(0.0, 0.9, 2e9, 2e9, 4, 1);
  for (int i = 0; i < 4; ++i) CHECK(std::abs(flat(i) - cplx(1, 0)) < 1e-14);

  const VectorXcd v = steering_vector(kPi / 8, kPi / 4, 2e9, 2e9, 2, 2);
  REQUIRE(v.size() == 4);
  CHECK(v.squaredNorm() == doctest::Approx(4.0).epsilon(1e-14));
  // direct elementwise evaluation
  const double ch = kPi * std::sin(kPi / 8) * std::sin(kPi / 4);
  const double cv = kPi * std::cos(kPi / 4);
  const cplx expected[] = {cplx(1, 0), std::polar(1.0, cv), std::polar(1.0, ch),
                           std::polar(1.0, ch + cv)};
  for (int i = 0; i < 4; ++i) CHECK(std::abs(v(i) - expected[i]) < 1e-14);
  CHECK(std::abs(v(0) - cplx(1, 0)) < 1e-15);
}

TEST_CASE("steering derivative matches finite differences") {
  const VectorXcd z = steering_derivative(0.4, 0.2, 2e9, 2e9, 1, 1, AngleVar::Theta);
  CHECK(z.norm() == 0.0);

  // cos(theta) factor vanishes at theta = pi/2
  const VectorXcd zt = steering_derivative(kPi / 2, 0.3, 2e9, 2e9, 3, 2, AngleVar::Theta);
  CHECK(zt.norm() < 1e-12);

  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> ua(-1.3, 1.3);
  std::uniform_int_distribution<int> ud(1, 4);
  const double h = 1e-6;
  for (int i = 0; i < 100; ++i) {
    const double th = ua(rng), ph = ua(rng);
    const int nh = ud(rng), nv = ud(rng);
    const double fq = 2e9 * (1.0 + 0.001 * ua(rng));
    for (AngleVar wrt : {AngleVar::Theta, AngleVar::Phi}) {
      const VectorXcd d = steering_derivative(th, ph, fq, 2e9, nh, nv, wrt);
      const double t1 = wrt == AngleVar::Theta ? th + h : th;
      const double t0 = wrt == AngleVar::Theta ? th - h : th;
      const double p1 = wrt == AngleVar::Phi ? ph + h : ph;
      const double p0 = wrt == AngleVar::Phi ? ph - h : ph;
      const VectorXcd fd = (steering_vector(t1, p1, fq, 2e9, nh, nv) -
                            steering_vector(t0, p0, fq, 2e9, nh, nv)) /
                           (2 * h);
      const double scale = std::max(1.0, d.norm());
      CHECK((d - fd).norm() / scale < 1e-6);
    }
  }
}

TEST_CASE("geometry constants") {
  SUBCASE("single-antenna arrays") {
    SystemConfig cfg = desk_scale_config();
    cfg.n_th = cfg.n_tv = cfg.n_rh = cfg.n_rv = 1;
    cfg.q_subcarriers = 2;
    const auto geo = build_geometry(cfg);
    for (int q = 0; q < cfg.q_subcarriers; ++q) {
      CHECK(geo.g[q].rows() == 1);
      CHECK(std::abs(std::abs(geo.g[q](0, 0)) - 1.0) < 1e-14);
      CHECK(geo.dg_theta[q].norm() == 0.0);
      CHECK(geo.dg_phi[q].norm() == 0.0);
      CHECK(geo.tr_gg(q) == doctest::Approx(1.0).epsilon(1e-14));
    }
  }

  SUBCASE("unit-norm steering and rank-1 two-way channel") {
    const SystemConfig cfg = small_cfg(3, 3, 3, 3);
    const auto geo = build_geometry(cfg);
    for (int q = 0; q < cfg.q_subcarriers; ++q) {
      CHECK(geo.a_tx[q].squaredNorm() == doctest::Approx(geo.nt).epsilon(1e-14));
      CHECK(geo.b_rx[q].squaredNorm() == doctest::Approx(geo.nr).epsilon(1e-14));
      CHECK(geo.tr_gg(q) == doctest::Approx(geo.nt * geo.nr).epsilon(1e-12));
      const MatrixXcd recon = geo.b_rx[q] * geo.a_tx[q].adjoint();
      CHECK((geo.g[q] - recon).norm() < 1e-12);
      const MatrixXcd prod = geo.db_theta[q] * geo.a_tx[q].adjoint() +
                             geo.b_rx[q] * geo.da_theta[q].adjoint();
      CHECK((geo.dg_theta[q] - prod).norm() < 1e-12);
    }
  }

  SUBCASE("dense-matrix oracle for the quadratic constants, Nt=Nr=16") {
    SystemConfig cfg = small_cfg(4, 2, 4, 4);
    const auto geo = build_geometry(cfg);
    for (int q = 0; q < cfg.q_subcarriers; ++q) {
      const double nt = geo.nt, nr = geo.nr;
      CHECK(geo.c2(q) == doctest::Approx(nt * nt * nr).epsilon(1e-10));
      // independent dense evaluation
      const VectorXcd& a = geo.a_tx[q];
      const MatrixXcd gtg = geo.dg_theta[q].adjoint() * geo.dg_phi[q];
      const cplx ctp = (a.adjoint() * gtg * a)(0);
      CHECK(geo.c_tp(q) == doctest::Approx(ctp.real()).epsilon(1e-10));
      CHECK(std::abs(ctp.imag()) < 1e-6 * std::abs(ctp.real()) + 1e-9);
      const cplx ct = (a.adjoint() * geo.dg_theta[q].adjoint() * geo.g[q] * a)(0);
      CHECK(std::abs(ct - geo.c_t(q)) < 1e-9 * std::max(1.0, std::abs(ct)));
    }
  }
}

TEST_CASE("channel generation and ZF structure") {
  SUBCASE("pseudo-inverse identity and alpha_zf") {
    const SystemConfig cfg = small_cfg(3, 4, 3, 3);
    std::mt19937_64 rng(7);
    const auto ch = gen_channels(cfg, rng);
    for (int q = 0; q < cfg.q_subcarriers; ++q) {
      const MatrixXcd prod = ch.h[q].adjoint() * ch.h_pinv[q];
      CHECK((prod - MatrixXcd::Identity(3, 3)).norm() < 1e-10);
    }
    const double expected = std::sqrt(3.0 * (9 - 3) / (1.0 / ch.beta.array()).sum());
    for (int q = 0; q < cfg.q_subcarriers; ++q)
      CHECK(ch.alpha_zf(q) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(ch.bar_d_beta.sum() == doctest::Approx(3.0).epsilon(1e-12));
  }

  SUBCASE("K=1 pinv column is h/(h^H h)") {
    const SystemConfig cfg = small_cfg(1, 2, 3, 3);
    std::mt19937_64 rng(9);
    const auto ch = gen_channels(cfg, rng);
    for (int q = 0; q < 2; ++q) {
      const VectorXcd expect = ch.h[q].col(0) / ch.h[q].col(0).squaredNorm();
      CHECK((ch.h_pinv[q].col(0) - expect).norm() < 1e-12);
      const cplx g = (ch.h[q].col(0).adjoint() * ch.h_pinv[q].col(0))(0);
      CHECK(std::abs(g - cplx(1, 0)) < 1e-12);
    }
  }

  SUBCASE("equal beta yields alpha_zf = sqrt(beta (Nt-K))") {
    SystemConfig cfg = small_cfg(3, 1, 3, 3);
    cfg.sigma_shadow_db = 0.0;
    cfg.user_positions.assign(3, UserPosition{cfg.r_h, 0.0});  // all at r_h => beta = 1
    std::mt19937_64 rng(11);
    const auto ch = gen_channels(cfg, rng);
    CHECK(ch.alpha_zf(0) == doctest::Approx(std::sqrt(1.0 * (9 - 3))).epsilon(1e-12));
  }

  SUBCASE("ZF normalization matches the Wishart identity (Monte Carlo)") {
    SystemConfig cfg = small_cfg(4, 1, 4, 4);
    std::mt19937_64 rng(13);
    auto users = draw_user_positions(cfg, rng);
    const auto ch0 = gen_channels(cfg, users, rng);
    const int n = 10000;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto ch = gen_channels(cfg, users, rng);  // fresh small-scale, fresh shadowing
      const MatrixXcd w = ch.alpha_zf(0) * ch.h_pinv[0];
      acc += (w * w.adjoint()).trace().real();
    }
    acc /= n;
    CHECK(acc > 0.98 * cfg.k_users);
    CHECK(acc < 1.02 * cfg.k_users);
    (void)ch0;
  }
}

TEST_CASE("dual precoder column") {
  const SystemConfig cfg = small_cfg(1, 1, 2, 2);
  std::mt19937_64 rng(21);
  const auto geo = build_geometry(cfg);
  const auto ch = gen_channels(cfg, rng);

  PowerAllocation a(1, 1);
  a.xi(0, 0) = 1.0;

  a.gamma(0, 0) = 1.0;
  a.eta(0, 0) = 0.0;
  VectorXcd f = dual_precoder_column(0, 0, a, ch, geo);
  CHECK((f - ch.alpha_zf(0) * ch.h_pinv[0].col(0)).norm() < 1e-14);

  a.gamma(0, 0) = 0.0;
  a.eta(0, 0) = 1.0;
  f = dual_precoder_column(0, 0, a, ch, geo);
  CHECK((f - geo.a_tx[0] / 2.0).norm() < 1e-14);  // a/sqrt(Nt), Nt=4
  CHECK(f.norm() == doctest::Approx(1.0).epsilon(1e-14));

  a.gamma(0, 0) = 0.5;
  a.eta(0, 0) = 0.5;
  f = dual_precoder_column(0, 0, a, ch, geo);
  const VectorXcd expect = ch.alpha_zf(0) * std::sqrt(0.5) * ch.h_pinv[0].col(0) +
                           std::sqrt(0.5) * geo.a_tx[0] / 2.0;
  CHECK((f - expect).norm() < 1e-14);
}

TEST_CASE("transmit power closed form") {
  const SystemConfig cfg = small_cfg(3, 4, 3, 3);
  std::mt19937_64 rng(31);
  const auto ch = gen_channels(cfg, rng);

  SUBCASE("uniform corner cases") {
    const double p = 2.5;
    auto a = uniform_allocation(3, 4, p, 1.0);
    CHECK(transmit_power(a, ch) == doctest::Approx(p * 3 * 4).epsilon(1e-12));
    a = uniform_allocation(3, 4, p, 0.0);
    CHECK(transmit_power(a, ch) == doctest::Approx(p * 3 * 4).epsilon(1e-12));
  }

  SUBCASE("permutation invariance and scaling") {
    auto a = random_alloc(3, 4, 5.0, rng);
    const double base = transmit_power(a, ch);

    PowerAllocation b = a;
    ChannelSet chp = ch;
    const int perm[3] = {2, 0, 1};
    for (int k = 0; k < 3; ++k) {
      b.xi.row(k) = a.xi.row(perm[k]);
      b.gamma.row(k) = a.gamma.row(perm[k]);
      b.eta.row(k) = a.eta.row(perm[k]);
      chp.beta(k) = ch.beta(perm[k]);
      chp.bar_d_beta(k) = ch.bar_d_beta(perm[k]);
    }
    CHECK(transmit_power(b, chp) == doctest::Approx(base).epsilon(1e-12));

    PowerAllocation c = a;
    c.xi *= 3.7;
    CHECK(transmit_power(c, ch) == doctest::Approx(3.7 * base).epsilon(1e-12));
  }
}

TEST_CASE("total power model") {
  SystemConfig cfg = small_cfg(3, 2, 3, 3);
  std::mt19937_64 rng(33);
  const auto ch = gen_channels(cfg, rng);

  PowerAllocation zero(3, 2);
  CHECK(total_power(zero, 0.0, cfg, ch) == doctest::Approx(5.6).epsilon(1e-12));

  cfg.rho_amp = 1.0;
  cfg.epsilon_dyn = 0.0;
  auto a = random_alloc(3, 2, 4.0, rng);
  CHECK(total_power(a, 12.0, cfg, ch) ==
        doctest::Approx(transmit_power(a, ch) + 5.6).epsilon(1e-12));

  cfg.rho_amp = 0.35;
  cfg.epsilon_dyn = 2.512e-3;
  PowerAllocation u = uniform_allocation(3, 2, 100.0 / 6.0, 1.0);  // P_TX = 100 mW
  CHECK(total_power(u, 30.0, cfg, ch) ==
        doctest::Approx(100.0 / 0.35 + 5.6 + 2.512e-3 * 30).epsilon(1e-9));
}

TEST_CASE("config file round trip") {
  const char* path = "test_config_tmp.cfg";
  {
    std::ofstream out(path);
    out << "# sample scenario\n"
        << "n_th = 3\nn_tv = 3\nn_rh = 3\nn_rv = 3\n"
        << "k_users = 3\nq_subcarriers = 4\n"
        << "f_c = 2 GHz\nbandwidth = 10 MHz\nframe_len = 30\n"
        << "p_max = 20 dBm\np_0 = 5.6 mW\nepsilon_dyn = -26 dBm\n"
        << "rho_amp = 0.35\nomega = 1e-3\nse_threshold = 4\n"
        << "crb0 = -30 dB\n"
        << "target_theta = 22.5 deg\ntarget_phi = 45 deg\n"
        << "cell_radius = 220\nr_h = 100\nnu_pathloss = 3.2\n"
        << "sigma_shadow_db = 7\nrng_seed = 12\n";
  }
  const SystemConfig cfg = load_config(path);
  CHECK(cfg.p_max == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(cfg.epsilon_dyn == doctest::Approx(std::pow(10.0, -2.6)).epsilon(1e-12));
  CHECK(cfg.crb0_theta == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(cfg.target_theta == doctest::Approx(kPi / 8).epsilon(1e-12));
  CHECK(cfg.target_phi == doctest::Approx(kPi / 4).epsilon(1e-12));
  CHECK(cfg.rng_seed == 12);
  std::remove(path);

  {
    std::ofstream out(path);
    out << "target_theta = 0.5\n";  // angle without unit
  }
  CHECK_THROWS_AS(load_config(path), std::invalid_argument);
  std::remove(path);
}
