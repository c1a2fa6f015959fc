// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "isacee/builder.hpp"
#include "isacee/oracle.hpp"
#include "isacee/socp.hpp"

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
      a.xi(kk, qq) = xi_hi * (0.1 + 0.9 * u(rng));
      a.gamma(kk, qq) = 0.1 + 0.8 * u(rng);
      a.eta(kk, qq) = 1.0 - a.gamma(kk, qq);
    }
  return a;
}

double true_dinkelbach_value(const PowerAllocation& a, const ChannelSet& ch,
                             const SensingGeometry& geo, const SystemConfig& cfg, double tau) {
  const MetricsReport r = evaluate(a, ch, geo, cfg);
  return r.se_sum + cfg.omega * (1.0 / r.crb_theta + 1.0 / r.crb_phi) - tau * r.p_tot;
}

}  // namespace

TEST_CASE("bilinear bounds") {
  CHECK(bilinear_lower(2, 2, 2, 2) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(bilinear_lower(1, 4, 2, 2) == doctest::Approx(3.5).epsilon(1e-15));
  CHECK(bilinear_upper(3, 3, 3, 3) == doctest::Approx(9.0).epsilon(1e-15));
  CHECK(bilinear_upper(1, 4, 2, 2) == doctest::Approx(8.5).epsilon(1e-15));
  CHECK_THROWS_AS(bilinear_lower(1, 1, 0, 1), std::domain_error);
  CHECK_THROWS_AS(bilinear_upper(1, 1, 1, -2), std::domain_error);

  // first-order tangency: gradient at the reference equals the product's
  const double h = 1e-6;
  const double gx = (bilinear_upper(2 + h, 3, 2, 3) - bilinear_upper(2 - h, 3, 2, 3)) / (2 * h);
  const double gy = (bilinear_upper(2, 3 + h, 2, 3) - bilinear_upper(2, 3 - h, 2, 3)) / (2 * h);
  CHECK(gx == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(gy == doctest::Approx(2.0).epsilon(1e-8));
  const double lx = (bilinear_lower(2 + h, 3, 2, 3) - bilinear_lower(2 - h, 3, 2, 3)) / (2 * h);
  CHECK(lx == doctest::Approx(3.0).epsilon(1e-8));
}

TEST_CASE("triple product bounds") {
  CHECK(triple_lower(2, 3, 5, 2, 3, 5) == doctest::Approx(2 * std::sqrt(15.0)).epsilon(1e-14));
  CHECK(triple_upper(2, 3, 5, 2, 3, 5) == doctest::Approx(2 * std::sqrt(15.0)).epsilon(1e-14));
  // symmetric references collapse the upper bound to the plain average
  CHECK(triple_upper(1.7, 2.0, 3.0, 1.3, 2.5, 2.5) ==
        doctest::Approx(0.5 * bilinear_upper(1.7, 2.0, 1.3, 2.5) +
                        0.5 * bilinear_upper(1.7, 3.0, 1.3, 2.5))
            .epsilon(1e-14));
  CHECK_THROWS_AS(triple_lower(1, 1, 1, 1, 0, 1), std::domain_error);
}

TEST_CASE("sandwich property on 1e5 random samples") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> pos(0.02, 5.0);
  int violations = 0;
  for (int i = 0; i < 100000; ++i) {
    const double x = pos(rng), y = pos(rng), t = pos(rng);
    const double xr = pos(rng), yr = pos(rng), tr = pos(rng);
    if (bilinear_lower(x, y, xr, yr) > x * y + 1e-12) ++violations;
    if (bilinear_upper(x, y, xr, yr) < x * y - 1e-12) ++violations;
    const double f = t * std::sqrt(x * y);
    if (triple_lower(t, x, y, tr, xr, yr) > f + 1e-12) ++violations;
    if (triple_upper(t, x, y, tr, xr, yr) < f - 1e-12) ++violations;
    // tangency at the reference
    if (std::abs(bilinear_lower(xr, yr, xr, yr) - xr * yr) > 1e-12) ++violations;
    if (std::abs(triple_upper(tr, xr, yr, tr, xr, yr) - tr * std::sqrt(xr * yr)) > 1e-11)
      ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("midpoint curvature of the bounds") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> pos(0.05, 4.0);
  for (int i = 0; i < 2000; ++i) {
    const double xr = pos(rng), yr = pos(rng), tr = pos(rng);
    const double x1 = pos(rng), y1 = pos(rng), t1 = pos(rng);
    const double x2 = pos(rng), y2 = pos(rng), t2 = pos(rng);
    const double xm = 0.5 * (x1 + x2), ym = 0.5 * (y1 + y2), tm = 0.5 * (t1 + t2);
    CHECK(bilinear_lower(xm, ym, xr, yr) >=
          0.5 * (bilinear_lower(x1, y1, xr, yr) + bilinear_lower(x2, y2, xr, yr)) - 1e-10);
    CHECK(bilinear_upper(xm, ym, xr, yr) <=
          0.5 * (bilinear_upper(x1, y1, xr, yr) + bilinear_upper(x2, y2, xr, yr)) + 1e-10);
    CHECK(triple_lower(tm, xm, ym, tr, xr, yr) >=
          0.5 * (triple_lower(t1, x1, y1, tr, xr, yr) + triple_lower(t2, x2, y2, tr, xr, yr)) -
              1e-10);
    CHECK(triple_upper(tm, xm, ym, tr, xr, yr) <=
          0.5 * (triple_upper(t1, x1, y1, tr, xr, yr) + triple_upper(t2, x2, y2, tr, xr, yr)) +
              1e-10);
  }
}

TEST_CASE("logarithmic bound coefficients") {
  {
    const auto c = rate_lb_coeffs(5.0, 5.0);
    CHECK(c.a == doctest::Approx(std::log(2.0) + 1.0).epsilon(1e-15));
    CHECK(c.b == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(c.c == doctest::Approx(0.1).epsilon(1e-15));
  }
  {
    const auto c = rate_lb_coeffs(3.0, 1.0);
    CHECK(c.a == doctest::Approx(std::log(4.0) + 1.5).epsilon(1e-15));
    CHECK(c.b == doctest::Approx(2.25).epsilon(1e-15));
    CHECK(c.c == doctest::Approx(0.75).epsilon(1e-15));
  }
  {
    // vanishing-signal limit
    const auto c = rate_lb_coeffs(1e-14, 1.0);
    CHECK(c.a < 1e-13);
    CHECK(c.b < 1e-13);
    CHECK(c.c < 1e-13);
  }
  {
    const auto c = rate_ub_coeffs(5.0, 5.0);
    CHECK(c.a == doctest::Approx(std::log(2.0) - 0.5).epsilon(1e-15));
    CHECK(c.b == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(c.c == doctest::Approx(0.2).epsilon(1e-15));
  }
  {
    const auto c = rate_ub_coeffs(3.0, 1.0);
    CHECK(c.a == doctest::Approx(std::log(4.0) - 0.75).epsilon(1e-15));
    CHECK(c.b == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(c.c == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }
  CHECK_THROWS_AS(rate_lb_coeffs(0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(rate_ub_coeffs(1.0, 0.0), std::domain_error);
}

TEST_CASE("second-order-cone membership is equivalent to x^2 <= y z") {
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 10000; ++i) {
    const double x = u(rng);
    double y = u(rng), z = u(rng);
    if (y + z <= 0) {
      y = std::abs(y) + 0.1;
      z = std::abs(z) + 0.1;
    }
    const double lhs = std::hypot(2 * x, y - z);
    const bool in_cone = lhs <= y + z;
    const bool product_ok = (x * x <= y * z) && y >= 0 && z >= 0;
    CHECK(in_cone == product_ok);
  }
}

TEST_CASE("expansion point clamps and caches") {
  SystemConfig cfg = small_cfg(2, 2, 3, 3);
  std::mt19937_64 rng(7);
  const auto ch = gen_channels(cfg, rng);
  const auto geo = build_geometry(cfg);
  PowerAllocation a(2, 2);  // xi = 0, gamma = 0, eta = 1 everywhere
  const ExpansionPoint pt = ExpansionPoint::from(a, ch, geo, cfg);
  CHECK((pt.omega.xi >= 1e-8).all());
  CHECK((pt.omega.gamma >= 1e-8).all());
  CHECK((pt.num > 0).all());
  CHECK((pt.den >= cfg.sigma_c_sq).all());
  CHECK((pt.lb_b > 0).all());
  CHECK((pt.ub_c > 0).all());
}

TEST_CASE("emitted objective is tangent at the expansion point") {
  const int shapes[3][4] = {{3, 4, 3, 3}, {2, 2, 3, 3}, {4, 2, 4, 4}};
  for (int i = 0; i < 9; ++i) {
    const auto* sh = shapes[i % 3];
    SystemConfig cfg = small_cfg(sh[0], sh[1], sh[2], sh[3]);
    std::mt19937_64 rng(500 + i);
    const auto ch = gen_channels(cfg, rng);
    const auto geo = build_geometry(cfg);
    const auto alloc = random_alloc(sh[0], sh[1], cfg.p_max / (sh[0] * sh[1]), rng);
    const ExpansionPoint pt = ExpansionPoint::from(alloc, ch, geo, cfg);

    BuildOptions opts;
    opts.tau = 1.7;
    const BuiltProgram built = build_main_program(pt, ch, geo, cfg, opts);

    const double surrogate = built.objective_at(pt.omega);
    const double truth = true_dinkelbach_value(pt.omega, ch, geo, cfg, opts.tau);
    CHECK(rel_error(surrogate, truth) < 1e-8);

    // the tight assignment satisfies every structural constraint (threshold
    // rows reflect the point's own feasibility and are not checked here)
    const VectorXd x = built.tight_assignment(pt.omega);
    auto is_threshold = [](const std::string& tag) {
      return tag == "rate_floor" || tag == "crb_theta_cap" || tag == "crb_phi_cap" ||
             tag == "tx_power_cap";
    };
    double structural = 0.0;
    for (const auto& c : built.prog.equalities())
      structural = std::max(structural, std::abs(c.lhs_minus_rhs.value_at(x)));
    for (const auto& c : built.prog.inequalities())
      if (!is_threshold(c.tag)) structural = std::max(structural, -c.expr.value_at(x));
    for (const auto& c : built.prog.cones()) {
      double norm2 = 0.0;
      for (size_t e = 1; e < c.entries.size(); ++e) {
        const double u = c.entries[e].value_at(x);
        norm2 += u * u;
      }
      structural = std::max(structural, std::sqrt(norm2) - c.entries[0].value_at(x));
    }
    CHECK(structural < 1e-9);

    // numerator/power split is consistent with the objective
    CHECK(rel_error(built.numerator_at(pt.omega) - opts.tau * built.power_at(pt.omega),
                    surrogate) < 1e-10);
  }
}

TEST_CASE("surrogate dominance near the expansion point") {
  SystemConfig cfg = small_cfg(3, 3, 3, 3);
  std::mt19937_64 rng(600);
  const auto ch = gen_channels(cfg, rng);
  const auto geo = build_geometry(cfg);
  const auto center = random_alloc(3, 3, cfg.p_max / 9, rng);
  const ExpansionPoint pt = ExpansionPoint::from(center, ch, geo, cfg);
  BuildOptions opts;
  opts.tau = 1.0;
  const BuiltProgram built = build_main_program(pt, ch, geo, cfg, opts);

  std::uniform_real_distribution<double> jitter(-0.3, 0.3);
  for (int i = 0; i < 50; ++i) {
    PowerAllocation a = pt.omega;
    for (int q = 0; q < 3; ++q)
      for (int k = 0; k < 3; ++k) {
        a.xi(k, q) *= 1.0 + jitter(rng);
        const double g = std::clamp(a.gamma(k, q) * (1.0 + jitter(rng)), 0.02, 0.98);
        a.gamma(k, q) = g;
        a.eta(k, q) = 1.0 - g;
      }
    const MetricsReport truth = evaluate(a, ch, geo, cfg);
    const VectorXd se_lb = built.se_lower_bound_at(a);
    for (int k = 0; k < 3; ++k) CHECK(se_lb(k) <= truth.se_per_user(k) + 1e-9);
    CHECK(built.ptx_upper_bound_at(a) >= truth.p_tx - 1e-9);
    CHECK(built.power_at(a) >= truth.p_tot - 1e-9);
  }
}

TEST_CASE("variable and constraint accounting matches the published counts") {
  SystemConfig cfg = paper_scale_config();  // K = 6, Q = 16
  std::mt19937_64 rng(700);
  const auto ch = gen_channels(cfg, rng);
  const auto geo = build_geometry(cfg);
  PowerAllocation a = equal_cs_allocation(cfg);
  const ExpansionPoint pt = ExpansionPoint::from(a, ch, geo, cfg);

  SUBCASE("full problem: n = 6KQ + 12, m = 15 + 7KQ + K") {
    const BuiltProgram built = build_main_program(pt, ch, geo, cfg, {});
    const int kq = 6 * 16;
    CHECK(built.prog.core_variable_count() == 6 * kq + 12);
    CHECK(built.prog.cited_constraint_count() == 15 + 7 * kq + 6);
  }

  SUBCASE("equal communication fractions: n = 5KQ + Q + 12, m = 15 + 6KQ + K + Q") {
    BuildOptions opts;
    opts.equal_gamma = true;
    const BuiltProgram built = build_main_program(pt, ch, geo, cfg, opts);
    const int kq = 6 * 16;
    CHECK(built.prog.core_variable_count() == 5 * kq + 16 + 12);
    CHECK(built.prog.cited_constraint_count() == 15 + 6 * kq + 6 + 16);
  }
}

TEST_CASE("feasibility program carries exactly the three residual families") {
  SystemConfig cfg = small_cfg(1, 1, 2, 2);
  std::mt19937_64 rng(800);
  const auto ch = gen_channels(cfg, rng);
  const auto geo = build_geometry(cfg);
  const ExpansionPoint pt = ExpansionPoint::from(equal_cs_allocation(cfg), ch, geo, cfg);
  const BuiltProgram built = build_feasibility_program(pt, ch, geo, cfg, {});

  int residual_rows = 0;
  for (const auto& ineq : built.prog.inequalities())
    if (ineq.tag.rfind("feas_", 0) == 0) ++residual_rows;
  CHECK(residual_rows == 3);  // one rate user + two CRB residuals
  CHECK(built.t_epi >= 0);
  // the epigraph value at a tight assignment equals the smallest residual
  const VectorXd x = built.tight_assignment(pt.omega);
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& ineq : built.prog.inequalities())
    if (ineq.tag.rfind("feas_", 0) == 0) {
      LinExpr shifted = ineq.expr;  // residual - t >= 0
      worst = std::min(worst, shifted.value_at(x) + x(built.t_epi));
    }
  CHECK(x(built.t_epi) == doctest::Approx(worst).epsilon(1e-12));
}

TEST_CASE("solving the surrogate improves the true objective and stays feasible") {
  SystemConfig cfg = small_cfg(2, 2, 3, 3);
  for (int inst = 0; inst < 6; ++inst) {
    std::mt19937_64 rng(900 + inst);
    const auto ch = gen_channels(cfg, rng);
    const auto geo = build_geometry(cfg);

    // a feasible-ish expansion point: the fixed-split allocation
    PowerAllocation start = equal_cs_allocation(cfg);
    MetricsReport rep0 = evaluate(start, ch, geo, cfg);
    if (!rep0.feasible()) continue;  // skip infeasible drops here

    const double tau = rep0.objective;
    const ExpansionPoint pt = ExpansionPoint::from(start, ch, geo, cfg);
    BuildOptions opts;
    opts.tau = tau;
    const BuiltProgram built = build_main_program(pt, ch, geo, cfg, opts);
    const auto sol = solve_conic(built.prog, 1e-8);
    REQUIRE(sol.status == SolveStatus::optimal);

    const PowerAllocation next = built.extract_allocation(sol.values);
    const MetricsReport rep1 = evaluate(next, ch, geo, cfg);
    // conservative surrogates: the solution satisfies the original constraints
    CHECK(rep1.max_violation(cfg) <= 1e-6);
    // ascent step of the subtractive objective
    const double before = true_dinkelbach_value(start, ch, geo, cfg, tau);
    const double after = true_dinkelbach_value(next, ch, geo, cfg, tau);
    CHECK(after >= before - 1e-7);
  }
}

TEST_CASE("diagnostic dump lists tagged constraints") {
  SystemConfig cfg = small_cfg(1, 1, 2, 2);
  std::mt19937_64 rng(1000);
  const auto ch = gen_channels(cfg, rng);
  const auto geo = build_geometry(cfg);
  const ExpansionPoint pt = ExpansionPoint::from(equal_cs_allocation(cfg), ch, geo, cfg);
  const BuiltProgram built = build_main_program(pt, ch, geo, cfg, {});
  std::ostringstream os;
  built.prog.dump(os);
  const std::string text = os.str();
  for (const char* tag : {"split_sum", "nonneg", "crb_theta_ratio_cone", "taa_den_lb_re",
                          "rate_quad_cone", "tx_power_cap", "rate_floor"})
    CHECK(text.find(tag) != std::string::npos);
}
