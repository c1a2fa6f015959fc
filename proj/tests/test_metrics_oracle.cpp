// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "isacee/oracle.hpp"

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

struct Instance {
  SystemConfig cfg;
  ChannelSet ch;
  SensingGeometry geo;
  PowerAllocation alloc;
};

Instance make_instance(int k, int q, int n_th, int n_tv, std::uint64_t seed) {
  Instance inst;
  inst.cfg = small_cfg(k, q, n_th, n_tv);
  std::mt19937_64 rng(seed);
  inst.ch = gen_channels(inst.cfg, rng);
  inst.geo = build_geometry(inst.cfg);
  inst.alloc = random_alloc(k, q, inst.cfg.p_max / (k * q), rng);
  return inst;
}

}  // namespace

TEST_CASE("effective gain matches the explicit precoder inner product") {
  auto inst = make_instance(3, 2, 3, 3, 51);

  SUBCASE("sensing-free cross gain vanishes") {
    inst.alloc.eta.setZero();
    inst.alloc.gamma.setOnes();
    CHECK(effective_gain(0, 1, 0, inst.alloc, inst.ch, inst.geo) == 0.0);
    const double azf = inst.ch.alpha_zf(0);
    CHECK(effective_gain(1, 1, 0, inst.alloc, inst.ch, inst.geo) ==
          doctest::Approx(azf * azf).epsilon(1e-12));
  }

  SUBCASE("random allocation equals |h^H f|^2") {
    for (int q = 0; q < 2; ++q)
      for (int k = 0; k < 3; ++k)
        for (int i = 0; i < 3; ++i) {
          const VectorXcd f = dual_precoder_column(i, q, inst.alloc, inst.ch, inst.geo);
          const double direct = std::norm((inst.ch.h[q].col(k).adjoint() * f)(0));
          const double gain = effective_gain(k, i, q, inst.alloc, inst.ch, inst.geo);
          CHECK(rel_error(gain, direct) < 1e-10);
        }
  }
}

TEST_CASE("closed-form SE equals the direct evaluation on 50 seeded instances") {
  const int shapes[4][4] = {{3, 4, 3, 3}, {2, 2, 3, 3}, {4, 3, 4, 4}, {1, 4, 4, 2}};
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const auto* sh = shapes[i % 4];
    auto inst = make_instance(sh[0], sh[1], sh[2], sh[3], 100 + i);
    const VectorXd cf = se_per_user(inst.alloc, inst.ch, inst.geo, inst.cfg);
    const VectorXd orc = direct_se(inst.alloc, inst.ch, inst.geo, inst.cfg);
    for (int k = 0; k < sh[0]; ++k) worst = std::max(worst, rel_error(cf(k), orc(k)));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("SE corner cases") {
  auto inst = make_instance(3, 2, 3, 3, 61);

  SUBCASE("zero power gives zero rate") {
    inst.alloc.xi.setZero();
    CHECK(se_per_user(inst.alloc, inst.ch, inst.geo, inst.cfg).norm() == 0.0);
    CHECK(direct_se(inst.alloc, inst.ch, inst.geo, inst.cfg).norm() == 0.0);
  }

  SUBCASE("communication-only allocation is interference-free") {
    inst.alloc.eta.setZero();
    inst.alloc.gamma.setOnes();
    const VectorXd se = se_per_user(inst.alloc, inst.ch, inst.geo, inst.cfg);
    const double azf2 = inst.ch.alpha_zf(0) * inst.ch.alpha_zf(0);
    for (int k = 0; k < 3; ++k) {
      double expect = 0.0;
      for (int q = 0; q < 2; ++q)
        expect += std::log2(1.0 + inst.alloc.xi(k, q) * azf2 / inst.cfg.sigma_c_sq);
      CHECK(se(k) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("FIM elements") {
  auto inst = make_instance(3, 2, 3, 3, 71);

  SUBCASE("linear in xi: zero power kills every element") {
    inst.alloc.xi.setZero();
    const FimElements f = fim_elements(inst.alloc, inst.ch, inst.geo, inst.cfg);
    CHECK(f.tau_tt == 0.0);
    CHECK(f.tau_tp == 0.0);
    CHECK(f.tau_pp == 0.0);
    CHECK(f.t_ta.norm() == 0.0);
    CHECK(f.t_pa.norm() == 0.0);
    CHECK(f.t_aa_scalar == 0.0);
  }

  SUBCASE("sensing-only uniform allocation reduces to the quadratic constants") {
    const double p = 2.0;
    inst.alloc = uniform_allocation(3, 2, p, 0.0);  // gamma = 0
    const FimElements f = fim_elements(inst.alloc, inst.ch, inst.geo, inst.cfg);
    const double kb = 2.0 * inst.cfg.frame_len / (inst.cfg.sigma_s_sq * inst.geo.nt);
    const double expect = kb * std::norm(inst.cfg.alpha_refl) * p * 3 * inst.geo.c_tt.sum();
    CHECK(f.tau_tt == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("closed-form CRBs match the dense-trace FIM oracle on 50 seeded instances") {
  const int shapes[4][4] = {{3, 4, 3, 3}, {2, 2, 3, 3}, {4, 2, 4, 4}, {2, 3, 4, 2}};
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const auto* sh = shapes[i % 4];
    auto inst = make_instance(sh[0], sh[1], sh[2], sh[3], 300 + i);
    const CrbPair cf = crb(fim_elements(inst.alloc, inst.ch, inst.geo, inst.cfg));
    const CrbPair orc = numeric_fim(inst.alloc, inst.ch, inst.geo, inst.cfg);
    worst = std::max({worst, rel_error(cf.theta, orc.theta), rel_error(cf.phi, orc.phi)});
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("CRB power homogeneity and degeneracy") {
  auto inst = make_instance(2, 2, 4, 4, 81);
  const CrbPair base = crb(fim_elements(inst.alloc, inst.ch, inst.geo, inst.cfg));

  for (double c : {0.1, 10.0}) {
    PowerAllocation scaled = inst.alloc;
    scaled.xi *= c;
    const CrbPair s = crb(fim_elements(scaled, inst.ch, inst.geo, inst.cfg));
    CHECK(rel_error(s.theta, base.theta / c) < 1e-9);
    CHECK(rel_error(s.phi, base.phi / c) < 1e-9);
    const CrbPair so = numeric_fim(scaled, inst.ch, inst.geo, inst.cfg);
    const CrbPair bo = numeric_fim(inst.alloc, inst.ch, inst.geo, inst.cfg);
    CHECK(rel_error(so.theta, bo.theta / c) < 1e-9);
  }

  PowerAllocation zero(2, 2);
  CHECK_THROWS_AS(crb(fim_elements(zero, inst.ch, inst.geo, inst.cfg)), degenerate_fim_error);
  CHECK_THROWS_AS(numeric_fim(zero, inst.ch, inst.geo, inst.cfg), degenerate_fim_error);
}

TEST_CASE("metrics report") {
  auto inst = make_instance(3, 2, 3, 3, 91);

  SUBCASE("objective reduces to the communication term at omega = 0") {
    inst.cfg.omega = 0.0;
    const MetricsReport r = evaluate(inst.alloc, inst.ch, inst.geo, inst.cfg);
    CHECK(r.objective == doctest::Approx(r.ee_c).epsilon(1e-15));
    CHECK(r.ee_c == doctest::Approx(r.se_sum / r.p_tot).epsilon(1e-15));
  }

  SUBCASE("raising the circuit power lowers both efficiencies") {
    const MetricsReport a = evaluate(inst.alloc, inst.ch, inst.geo, inst.cfg);
    inst.cfg.p_0 *= 2.0;
    const MetricsReport b = evaluate(inst.alloc, inst.ch, inst.geo, inst.cfg);
    CHECK(b.ee_c < a.ee_c);
    CHECK(b.ee_s < a.ee_s);
    CHECK(b.crb_theta == doctest::Approx(a.crb_theta).epsilon(1e-15));
  }

  SUBCASE("sensing noise rescales the CRBs through kappa") {
    const MetricsReport a = evaluate(inst.alloc, inst.ch, inst.geo, inst.cfg);
    inst.cfg.sigma_s_sq *= 4.0;
    const MetricsReport b = evaluate(inst.alloc, inst.ch, inst.geo, inst.cfg);
    CHECK(rel_error(b.crb_theta, 4.0 * a.crb_theta) < 1e-12);
    CHECK(rel_error(b.crb_phi, 4.0 * a.crb_phi) < 1e-12);
  }

  SUBCASE("growing any single power entry never worsens the CRBs") {
    const CrbPair base = crb(fim_elements(inst.alloc, inst.ch, inst.geo, inst.cfg));
    for (int q = 0; q < 2; ++q)
      for (int k = 0; k < 3; ++k) {
        PowerAllocation bumped = inst.alloc;
        bumped.xi(k, q) += 1.0;
        const CrbPair b = crb(fim_elements(bumped, inst.ch, inst.geo, inst.cfg));
        CHECK(b.theta <= base.theta * (1 + 1e-12));
        CHECK(b.phi <= base.phi * (1 + 1e-12));
      }
  }
}

TEST_CASE("waveform covariance Monte Carlo") {
  auto inst = make_instance(4, 2, 4, 4, 111);
  std::mt19937_64 rng(7);

  SUBCASE("zero power gives the zero matrix exactly") {
    inst.alloc.xi.setZero();
    const auto mc = mc_covariance(inst.alloc, inst.ch.beta, inst.geo, inst.cfg, 10, rng);
    for (const auto& m : mc) CHECK(m.norm() == 0.0);
  }

  SUBCASE("sensing-only covariance is the rank-one beam") {
    inst.alloc = uniform_allocation(4, 2, 1.5, 0.0);
    const auto cf = analytic_covariance(inst.alloc, inst.ch, inst.geo);
    const MatrixXcd expect =
        (1.5 * 4 / 16.0) * inst.geo.a_tx[0] * inst.geo.a_tx[0].adjoint();
    CHECK((cf[0] - expect).norm() < 1e-12);
    const auto mc = mc_covariance(inst.alloc, inst.ch.beta, inst.geo, inst.cfg, 10000, rng);
    CHECK((mc[0] - cf[0]).norm() / cf[0].norm() < 0.05);
  }

  SUBCASE("mixed allocation within 5% Frobenius at 1e4 samples") {
    const auto cf = analytic_covariance(inst.alloc, inst.ch, inst.geo);
    const auto mc = mc_covariance(inst.alloc, inst.ch.beta, inst.geo, inst.cfg, 10000, rng);
    for (size_t q = 0; q < cf.size(); ++q)
      CHECK((mc[q] - cf[q]).norm() / cf[q].norm() < 0.05);
  }
}

TEST_CASE("transmit power Monte Carlo") {
  std::mt19937_64 rng(13);

  SUBCASE("sensing-only allocation is exact per sample") {
    auto inst = make_instance(3, 2, 3, 3, 121);
    inst.alloc = uniform_allocation(3, 2, 2.0, 0.0);
    const double mc = mc_transmit_power(inst.alloc, inst.ch.beta, inst.geo, inst.cfg, 3, rng);
    CHECK(mc == doctest::Approx(2.0 * 3 * 2).epsilon(1e-12));
  }

  SUBCASE("single-user closed form") {
    auto inst = make_instance(1, 2, 3, 3, 131);
    const double cf = transmit_power(inst.alloc, inst.ch);
    double expect = 0.0;
    for (int q = 0; q < 2; ++q)
      expect += inst.alloc.xi(0, q) * (inst.alloc.gamma(0, q) + inst.alloc.eta(0, q));
    CHECK(cf == doctest::Approx(expect).epsilon(1e-12));  // bar_D_beta = 1 for K = 1
    const double mc = mc_transmit_power(inst.alloc, inst.ch.beta, inst.geo, inst.cfg, 4000, rng);
    CHECK(rel_error(cf, mc) < 0.05);
  }

  SUBCASE("Nt=16, K=4 mixed allocation within 5% at 1e4 samples") {
    auto inst = make_instance(4, 2, 4, 4, 141);
    const double cf = transmit_power(inst.alloc, inst.ch);
    const double mc = mc_transmit_power(inst.alloc, inst.ch.beta, inst.geo, inst.cfg, 10000, rng);
    CHECK(rel_error(cf, mc) < 0.05);
  }

  SUBCASE("Monte-Carlo error shrinks roughly as 1/sqrt(n)") {
    auto inst = make_instance(4, 2, 4, 4, 151);
    const double cf = transmit_power(inst.alloc, inst.ch);
    double err_small = 0.0, err_large = 0.0;
    for (int rep = 0; rep < 3; ++rep) {
      err_small +=
          std::abs(mc_transmit_power(inst.alloc, inst.ch.beta, inst.geo, inst.cfg, 10000, rng) - cf);
      err_large +=
          std::abs(mc_transmit_power(inst.alloc, inst.ch.beta, inst.geo, inst.cfg, 40000, rng) - cf);
    }
    CHECK(err_large <= 0.6 * err_small);
  }
}

TEST_CASE("grid search") {
  SystemConfig cfg = small_cfg(2, 1, 3, 3);
  cfg.se_threshold = 0.0;
  cfg.crb0_theta = cfg.crb0_phi = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(161);
  const auto ch = gen_channels(cfg, rng);
  const auto geo = build_geometry(cfg);

  GridSpec grid;
  for (int i = 1; i <= 5; ++i) grid.xi_levels.push_back(cfg.p_max / 2 * i / 5.0);
  for (int i = 1; i <= 9; ++i) grid.gamma_levels.push_back(i / 10.0);

  SUBCASE("grid containing the fixed-split point dominates it") {
    GridSpec g2 = grid;
    g2.xi_levels.push_back(cfg.p_max / 2);  // the equal-split uniform level, K*Q = 2
    g2.gamma_levels.push_back(0.5);
    const auto res = grid_search(cfg, ch, geo, g2);
    REQUIRE(res.found);
    const auto eq = evaluate(equal_cs_allocation(cfg), ch, geo, cfg);
    CHECK(res.objective >= eq.objective - 1e-12);
  }

  SUBCASE("matches an independent nested-loop scan for K=1") {
    SystemConfig c1 = small_cfg(1, 1, 3, 3);
    c1.se_threshold = 0.0;
    c1.crb0_theta = c1.crb0_phi = std::numeric_limits<double>::infinity();
    std::mt19937_64 r1(171);
    const auto ch1 = gen_channels(c1, r1);
    const auto geo1 = build_geometry(c1);
    GridSpec g1;
    for (int i = 1; i <= 9; ++i) {
      g1.xi_levels.push_back(c1.p_max * i / 9.0);
      g1.gamma_levels.push_back(i / 10.0);
    }
    const auto res = grid_search(c1, ch1, geo1, g1);
    REQUIRE(res.found);

    double best = -1e300;
    PowerAllocation a(1, 1);
    for (double xi : g1.xi_levels)
      for (double ga : g1.gamma_levels) {
        a.xi(0, 0) = xi;
        a.gamma(0, 0) = ga;
        a.eta(0, 0) = 1.0 - ga;
        const auto rep = evaluate(a, ch1, geo1, c1);
        if (rep.feasible()) best = std::max(best, rep.objective);
      }
    CHECK(res.objective == doctest::Approx(best).epsilon(1e-12));
  }

  SUBCASE("empty feasible grid is reported") {
    SystemConfig strict = cfg;
    strict.se_threshold = 1e6;
    const auto res = grid_search(strict, ch, geo, grid);
    CHECK_FALSE(res.found);
    CHECK(res.feasible_count == 0);
    CHECK(res.evaluated == 45 * 45);
  }
}

TEST_CASE("validation suite passes at default tolerances") {
  const auto reports = run_validation_suite(desk_scale_config(), OracleTolerances{});
  for (const auto& r : reports) {
    INFO(r.quantity, " rel_error=", r.relative_error, " tol=", r.tolerance);
    CHECK(r.pass);
  }
}
