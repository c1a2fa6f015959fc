// SPDX-License-Identifier: Apache-2.0
#include "isacee/builder.hpp"

#include <cmath>
#include <limits>

namespace isacee {

namespace {
constexpr double kLn2 = 0.6931471805599453;

struct ProductBounds {
  // affine (in the extended catalog) bounds of xi*gamma, xi*eta and
  // xi*sqrt(gamma*eta) around the expansion point
  LinExpr lb_pg, ub_pg, lb_pe, ub_pe, lb3, ub3;
};

}  // namespace

class ProgramAssembler {
 public:
  ProgramAssembler(const ExpansionPoint& point, const ChannelSet& ch, const SensingGeometry& geo,
                   const SystemConfig& cfg, const BuildOptions& opts, bool feasibility)
      : pt_(point), ch_(ch), geo_(geo), cfg_(cfg), opts_(opts), feas_(feasibility) {
    K_ = pt_.omega.k_users();
    Q_ = pt_.omega.q_subcarriers();
    cache_ = ChannelGeometryCache::from(ch, geo);
    kappa_bar_ = 2.0 * cfg.frame_len / (cfg.sigma_s_sq * geo.nt);
    alpha_sq_ = std::norm(cfg.alpha_refl);
    alpha_conj_ = std::conj(cfg.alpha_refl);
    crb_theta_capped_ = std::isfinite(cfg.crb0_theta);
    crb_phi_capped_ = std::isfinite(cfg.crb0_phi);
  }

  BuiltProgram assemble() {
    BuiltProgram out;
    b_ = &out;
    out.k_users = K_;
    out.q_subcarriers = Q_;
    out.equal_gamma = opts_.equal_gamma;
    out.feasibility = feas_;
    out.has_crb = (cfg_.omega > 0) || crb_theta_capped_ || crb_phi_capped_;
    out.has_rate_lb = !feas_ || cfg_.se_threshold > 0;
    out.has_rate_ub = !feas_ && cfg_.epsilon_dyn > 0;

    create_variables();
    build_product_bounds();
    emit_split_and_nonneg();
    emit_square_and_sqrt_cones();
    if (out.has_rate_lb) emit_rate_lower_bound();
    if (out.has_rate_ub) emit_rate_upper_bound();
    if (out.has_crb) emit_crb_machinery();
    emit_power_cap();
    if (opts_.fix_half_split) emit_fixed_split();
    if (feas_) {
      emit_feasibility_objective();
    } else {
      emit_main_objective();
    }
    out.se_lb_exprs_ = se_lb_exprs_;
    out.ptx_ub_expr_ = ptx_ub_;
    store_audit_data(out);
    return out;
  }

 private:
  // -- catalog ---------------------------------------------------------------

  void create_variables() {
    ConicProgram& p = b_->prog;
    auto name_kq = [&](const char* base, int k, int q) {
      return std::string(base) + "_" + std::to_string(k + 1) + "_" + std::to_string(q + 1);
    };
    auto name_q = [&](const char* base, int q) {
      return std::string(base) + "_" + std::to_string(q + 1);
    };

    b_->xi.resize(K_ * Q_);
    b_->eta.resize(K_ * Q_);
    for (int q = 0; q < Q_; ++q)
      for (int k = 0; k < K_; ++k) b_->xi[k + q * K_] = p.add_variable(name_kq("xi", k, q), true);
    if (opts_.equal_gamma) {
      b_->gamma_idx.resize(Q_);
      for (int q = 0; q < Q_; ++q) b_->gamma_idx[q] = p.add_variable(name_q("gamma", q), true);
    } else {
      b_->gamma_idx.resize(K_ * Q_);
      for (int q = 0; q < Q_; ++q)
        for (int k = 0; k < K_; ++k)
          b_->gamma_idx[k + q * K_] = p.add_variable(name_kq("gamma", k, q), true);
    }
    for (int q = 0; q < Q_; ++q)
      for (int k = 0; k < K_; ++k) b_->eta[k + q * K_] = p.add_variable(name_kq("eta", k, q), true);

    if (b_->has_crb) {
      b_->ax = p.add_variable("crb_theta_num", true);
      b_->ay = p.add_variable("crb_theta_den", true);
      b_->az = p.add_variable("crb_theta_ratio", true);
      b_->ix_re = p.add_variable("taa_num_re", true);
      b_->ix_im = p.add_variable("taa_num_im", true);
      b_->iy_re = p.add_variable("taa_den_re", true);
      b_->iy_im = p.add_variable("taa_den_im", true);
      b_->iz_re = p.add_variable("taa_ratio_re", true);
      b_->iz_im = p.add_variable("taa_ratio_im", true);
      b_->bx = p.add_variable("crb_phi_num", true);
      b_->by = p.add_variable("crb_phi_den", true);
      b_->bz = p.add_variable("crb_phi_ratio", true);
    }
    if (b_->has_rate_ub) {
      b_->cx.resize(K_ * Q_);
      b_->cy.resize(K_ * Q_);
      b_->cz.resize(K_ * Q_);
      for (int q = 0; q < Q_; ++q)
        for (int k = 0; k < K_; ++k) {
          b_->cx[k + q * K_] = p.add_variable(name_kq("rate_num", k, q), true);
          b_->cy[k + q * K_] = p.add_variable(name_kq("rate_den", k, q), true);
          b_->cz[k + q * K_] = p.add_variable(name_kq("rate_ratio", k, q), true);
        }
    }

    // epigraph extras
    b_->w_xi.resize(K_ * Q_);
    b_->w_eta.resize(K_ * Q_);
    for (int q = 0; q < Q_; ++q)
      for (int k = 0; k < K_; ++k) {
        b_->w_xi[k + q * K_] = p.add_variable(name_kq("sq_xi", k, q), false);
        b_->w_eta[k + q * K_] = p.add_variable(name_kq("sq_eta", k, q), false);
      }
    if (opts_.equal_gamma) {
      b_->w_gamma.resize(Q_);
      b_->s_gamma.resize(Q_);
      for (int q = 0; q < Q_; ++q) {
        b_->w_gamma[q] = p.add_variable(name_q("sq_gamma", q), false);
        b_->s_gamma[q] = p.add_variable(name_q("sqrt_gamma", q), false);
      }
    } else {
      b_->w_gamma.resize(K_ * Q_);
      b_->s_gamma.resize(K_ * Q_);
      for (int q = 0; q < Q_; ++q)
        for (int k = 0; k < K_; ++k) {
          b_->w_gamma[k + q * K_] = p.add_variable(name_kq("sq_gamma", k, q), false);
          b_->s_gamma[k + q * K_] = p.add_variable(name_kq("sqrt_gamma", k, q), false);
        }
    }
    b_->s_eta.resize(K_ * Q_);
    for (int q = 0; q < Q_; ++q)
      for (int k = 0; k < K_; ++k)
        b_->s_eta[k + q * K_] = p.add_variable(name_kq("sqrt_eta", k, q), false);
    if (b_->has_rate_lb) {
      b_->u_rate.resize(K_ * Q_);
      for (int q = 0; q < Q_; ++q)
        for (int k = 0; k < K_; ++k)
          b_->u_rate[k + q * K_] = p.add_variable(name_kq("rate_hypo", k, q), false);
    }
    if (b_->has_rate_ub) {
      b_->v_rate.resize(K_ * Q_);
      for (int q = 0; q < Q_; ++q)
        for (int k = 0; k < K_; ++k)
          b_->v_rate[k + q * K_] = p.add_variable(name_kq("power_rate_hypo", k, q), false);
    }
    if (feas_) b_->t_epi = p.add_variable("worst_residual", false);
  }

  // -- product bounds ---------------------------------------------------------

  void build_product_bounds() {
    bounds_.resize(K_ * Q_);
    for (int q = 0; q < Q_; ++q)
      for (int k = 0; k < K_; ++k) {
        const int i = k + q * K_;
        const double xr = pt_.omega.xi(k, q);
        const double gr = ref_gamma(k, q);
        const double er = pt_.omega.eta(k, q);
        const int X = b_->xi[i];
        const int G = b_->gamma_index(k, q);
        const int E = b_->eta[i];
        const int WX = b_->w_xi[i];
        const int WG = b_->sq_gamma_index(k, q);
        const int WE = b_->w_eta[i];
        const int SG = b_->sqrt_gamma_index(k, q);
        const int SE = b_->s_eta[i];
        ProductBounds& pb = bounds_[i];

        pb.lb_pg = bilinear_lb_expr(X, G, WX, WG, xr, gr);
        pb.ub_pg = bilinear_ub_expr(X, G, WX, WG, xr, gr);
        pb.lb_pe = bilinear_lb_expr(X, E, WX, WE, xr, er);
        pb.ub_pe = bilinear_ub_expr(X, E, WX, WE, xr, er);

        const double rg = std::sqrt(gr), re = std::sqrt(er);
        const double s = rg + re;
        // inner bounds around (xi, sqrt(gamma)) and (xi, sqrt(eta)); the squared
        // square-root terms reduce to the fraction itself
        LinExpr l_tg;
        l_tg.add(X, xr + rg);
        l_tg.add(SG, xr + rg);
        l_tg.add(WX, -0.5);
        l_tg.add(G, -0.5);
        l_tg.constant -= 0.5 * (xr + rg) * (xr + rg);
        LinExpr l_te;
        l_te.add(X, xr + re);
        l_te.add(SE, xr + re);
        l_te.add(WX, -0.5);
        l_te.add(E, -0.5);
        l_te.constant -= 0.5 * (xr + re) * (xr + re);

        pb.lb3 = LinExpr();
        pb.lb3.add(l_tg, s);
        pb.lb3.add(l_te, s);
        pb.lb3.add(X, -0.5 * s * s);
        pb.lb3.add(pb.ub_pg, -0.5);
        pb.lb3.add(pb.ub_pe, -0.5);
        pb.lb3.compact();

        pb.ub3 = LinExpr();
        pb.ub3.add(pb.ub_pg, 0.5 * re / rg);
        pb.ub3.add(pb.ub_pe, 0.5 * rg / re);
        pb.ub3.compact();
      }
  }

  static LinExpr bilinear_lb_expr(int x, int y, int wx, int wy, double xr, double yr) {
    LinExpr e;
    const double s = xr + yr;
    e.add(x, s);
    e.add(y, s);
    e.add(wx, -0.5);
    e.add(wy, -0.5);
    e.constant -= 0.5 * s * s;
    return e;
  }

  static LinExpr bilinear_ub_expr(int x, int y, int wx, int wy, double xr, double yr) {
    LinExpr e;
    e.add(wx, 0.5 * yr / xr);
    e.add(wy, 0.5 * xr / yr);
    (void)x;
    (void)y;
    return e;
  }

  double ref_gamma(int k, int q) const {
    return opts_.equal_gamma ? pt_.omega.gamma(0, q) : pt_.omega.gamma(k, q);
  }

  // coefficient-sign-aware selections
  void add_scaled_lb_pg(LinExpr& e, int i, double c) const {
    e.add(c >= 0 ? bounds_[i].lb_pg : bounds_[i].ub_pg, c);
  }
  void add_scaled_ub_pg(LinExpr& e, int i, double c) const {
    e.add(c >= 0 ? bounds_[i].ub_pg : bounds_[i].lb_pg, c);
  }
  void add_scaled_lb_pe(LinExpr& e, int i, double c) const {
    e.add(c >= 0 ? bounds_[i].lb_pe : bounds_[i].ub_pe, c);
  }
  void add_scaled_ub_pe(LinExpr& e, int i, double c) const {
    e.add(c >= 0 ? bounds_[i].ub_pe : bounds_[i].lb_pe, c);
  }

  // -- shared constraint families ----------------------------------------------

  void emit_split_and_nonneg() {
    ConicProgram& p = b_->prog;
    for (int q = 0; q < Q_; ++q)
      for (int k = 0; k < K_; ++k) {
        LinExpr e;
        e.add(b_->gamma_index(k, q), 1.0);
        e.add(b_->eta[k + q * K_], 1.0);
        e.constant = -1.0;
        p.add_equality(e, "split_sum", true);
      }
    for (int i : b_->xi) p.add_inequality(var_expr(i), "nonneg", true);
    for (int i : b_->gamma_idx) p.add_inequality(var_expr(i), "nonneg", true);
    for (int i : b_->eta) p.add_inequality(var_expr(i), "nonneg", true);
  }

  void emit_square_and_sqrt_cones() {
    ConicProgram& p = b_->prog;
    auto square_cone = [&](int var, int w) {
      LinExpr t(1.0), u2(1.0);
      t.add(w, 1.0);
      u2.add(w, -1.0);
      p.add_cone({t, var_expr(var, 2.0), u2}, "square_epi", false);
    };
    auto sqrt_cone = [&](int var, int s) {
      LinExpr t(1.0), u2(-1.0);
      t.add(var, 1.0);
      u2.add(var, 1.0);
      p.add_cone({t, var_expr(s, 2.0), u2}, "sqrt_hypo", false);
    };
    for (int i = 0; i < K_ * Q_; ++i) {
      square_cone(b_->xi[i], b_->w_xi[i]);
      square_cone(b_->eta[i], b_->w_eta[i]);
    }
    for (size_t i = 0; i < b_->gamma_idx.size(); ++i) {
      square_cone(b_->gamma_idx[i], b_->w_gamma[i]);
      sqrt_cone(b_->gamma_idx[i], b_->s_gamma[i]);
    }
    for (int i = 0; i < K_ * Q_; ++i) sqrt_cone(b_->eta[i], b_->s_eta[i]);
  }

  LinExpr rnu_lb_expr(int k, int q) const {
    const int i = k + q * K_;
    const double azf = ch_.alpha_zf(q);
    const double c3 = 2.0 * (azf / std::sqrt(static_cast<double>(geo_.nt))) * cache_.cross(k, q);
    LinExpr e;
    e.add(bounds_[i].lb_pg, azf * azf);
    e.add(bounds_[i].lb_pe, cache_.gain_sq(k, q) / geo_.nt);
    e.add(c3 >= 0 ? bounds_[i].lb3 : bounds_[i].ub3, c3);
    e.compact();
    return e;
  }

  LinExpr rnu_ub_expr(int k, int q) const {
    const int i = k + q * K_;
    const double azf = ch_.alpha_zf(q);
    const double c3 = 2.0 * (azf / std::sqrt(static_cast<double>(geo_.nt))) * cache_.cross(k, q);
    LinExpr e;
    e.add(bounds_[i].ub_pg, azf * azf);
    e.add(bounds_[i].ub_pe, cache_.gain_sq(k, q) / geo_.nt);
    e.add(c3 >= 0 ? bounds_[i].ub3 : bounds_[i].lb3, c3);
    e.compact();
    return e;
  }

  // upper bound of the interference denominator (used in the SE lower bound)
  LinExpr rde_ub_expr(int k, int q) const {
    LinExpr e(cfg_.sigma_c_sq);
    const double c = cache_.gain_sq(k, q) / geo_.nt;
    for (int j = 0; j < K_; ++j)
      if (j != k) add_scaled_ub_pe(e, j + q * K_, c);
    e.compact();
    return e;
  }

  // lower bound of the denominator (used in the SE upper bound)
  LinExpr rde_lb_expr(int k, int q) const {
    LinExpr e(cfg_.sigma_c_sq);
    const double c = cache_.gain_sq(k, q) / geo_.nt;
    for (int j = 0; j < K_; ++j)
      if (j != k) add_scaled_lb_pe(e, j + q * K_, c);
    e.compact();
    return e;
  }

  void emit_rate_lower_bound() {
    ConicProgram& p = b_->prog;
    se_lb_exprs_.assign(K_, LinExpr());
    rnu_lb_store_.resize(K_ * Q_);
    rde_ub_store_.resize(K_ * Q_);
    for (int k = 0; k < K_; ++k) {
      LinExpr se;
      for (int q = 0; q < Q_; ++q) {
        const int i = k + q * K_;
        const LinExpr rnu = rnu_lb_expr(k, q);
        const LinExpr rde = rde_ub_expr(k, q);
        rnu_lb_store_[i] = rnu;
        rde_ub_store_[i] = rde;
        // u >= B / rnu as a cone on [rnu+u; 2 sqrt(B); rnu-u]
        LinExpr t = rnu, m = rnu;
        t.add(b_->u_rate[i], 1.0);
        m.add(b_->u_rate[i], -1.0);
        p.add_cone({t, LinExpr(2.0 * std::sqrt(pt_.lb_b(k, q))), m}, "rate_hypo_cone", false);

        se.constant += pt_.lb_a(k, q);
        se.add(b_->u_rate[i], -1.0);
        se.add(rde, -pt_.lb_c(k, q));
      }
      se *= 1.0 / kLn2;
      se.compact();
      se_lb_exprs_[k] = se;
      if (!feas_ && cfg_.se_threshold > 0) {
        LinExpr row = se;
        row.constant -= cfg_.se_threshold;
        p.add_inequality(row, "rate_floor", true);
      }
    }
  }

  void emit_rate_upper_bound() {
    ConicProgram& p = b_->prog;
    se_ub_exprs_.assign(K_, LinExpr());
    rnu_ub_store_.resize(K_ * Q_);
    rde_lb_store_.resize(K_ * Q_);
    for (int k = 0; k < K_; ++k) {
      LinExpr se;
      for (int q = 0; q < Q_; ++q) {
        const int i = k + q * K_;
        const LinExpr rnu = rnu_ub_expr(k, q);
        const LinExpr rde = rde_lb_expr(k, q);
        rnu_ub_store_[i] = rnu;
        rde_lb_store_[i] = rde;

        LinExpr row = var_expr(b_->cx[i]);
        row.add(rnu, -1.0);
        p.add_inequality(row, "rate_num_ub", true);
        row = rde;
        row.add(b_->cy[i], -1.0);
        p.add_inequality(row, "rate_den_lb", true);
        LinExpr t = var_expr(b_->cy[i]);
        t.add(b_->cz[i], 1.0);
        LinExpr m = var_expr(b_->cy[i]);
        m.add(b_->cz[i], -1.0);
        p.add_cone({t, var_expr(b_->cx[i], 2.0), m}, "rate_quad_cone", true);

        // v >= (1/C^)/rde_lb
        LinExpr tv = rde, mv = rde;
        tv.add(b_->v_rate[i], 1.0);
        mv.add(b_->v_rate[i], -1.0);
        p.add_cone({tv, LinExpr(2.0 * std::sqrt(1.0 / pt_.ub_c(k, q))), mv}, "power_rate_cone",
                   false);

        se.constant += pt_.ub_a(k, q);
        se.add(b_->cz[i], 0.5 * pt_.ub_b(k, q) * pt_.ub_c(k, q));
        se.add(b_->v_rate[i], 0.5 * pt_.ub_b(k, q));
      }
      se *= 1.0 / kLn2;
      se.compact();
      se_ub_exprs_[k] = se;
    }
  }

  // FIM linear-form bounds: scale * sum_kq (coef_g(k,q) * xi*gamma + coef_e(q) * xi*eta)
  LinExpr fim_bound(const VectorXd& trace_part, const VectorXd& quad_part, double scale,
                    bool lower) const {
    LinExpr e;
    for (int q = 0; q < Q_; ++q)
      for (int k = 0; k < K_; ++k) {
        const int i = k + q * K_;
        const double cg = scale * trace_part(q) * ch_.bar_d_beta(k);
        const double ce = scale * quad_part(q);
        if (lower) {
          add_scaled_lb_pg(e, i, cg);
          add_scaled_lb_pe(e, i, ce);
        } else {
          add_scaled_ub_pg(e, i, cg);
          add_scaled_ub_pe(e, i, ce);
        }
      }
    e.compact();
    return e;
  }

  void emit_crb_machinery() {
    ConicProgram& p = b_->prog;
    const double scale = kappa_bar_ * alpha_sq_;

    tau_tt_lb_ = fim_bound(geo_.tr_tt, geo_.c_tt, scale, true);
    tau_pp_lb_ = fim_bound(geo_.tr_pp, geo_.c_pp, scale, true);
    tau_tp_ub_ = fim_bound(geo_.tr_tp, geo_.c_tp, scale, false);
    tau_tp_lb_ = fim_bound(geo_.tr_tp, geo_.c_tp, scale, true);

    VectorXd sr_g(Q_), sr_e(Q_), si_g(Q_), si_e(Q_);
    for (int q = 0; q < Q_; ++q) {
      sr_g(q) = (alpha_conj_ * geo_.tr_p(q)).real();
      sr_e(q) = (alpha_conj_ * geo_.c_p(q)).real();
      si_g(q) = (alpha_conj_ * geo_.tr_p(q)).imag();
      si_e(q) = (alpha_conj_ * geo_.c_p(q)).imag();
    }
    s_re_ub_ = fim_bound(sr_g, sr_e, 1.0, false);
    s_re_lb_ = fim_bound(sr_g, sr_e, 1.0, true);
    s_im_ub_ = fim_bound(si_g, si_e, 1.0, false);
    s_im_lb_ = fim_bound(si_g, si_e, 1.0, true);
    s_den_lb_ = fim_bound(geo_.tr_gg, geo_.c2, 1.0, true);

    auto ratio_cone = [&](int x, int y, int z, const char* tag) {
      LinExpr t = var_expr(y);
      t.add(z, 1.0);
      LinExpr m = var_expr(y);
      m.add(z, -1.0);
      p.add_cone({t, var_expr(x, 2.0), m}, tag, true);
    };

    // azimuth branch
    {
      LinExpr row = var_expr(b_->ax);
      row.add(tau_tp_ub_, -1.0);
      p.add_inequality(row, "crb_theta_num_ub", true);
      row = var_expr(b_->ax);
      row.add(tau_tp_lb_, 1.0);
      p.add_inequality(row, "crb_theta_num_guard", false);
      row = tau_pp_lb_;
      row.add(b_->iz_re, -kappa_bar_);
      row.add(b_->iz_im, -kappa_bar_);
      row.add(b_->ay, -1.0);
      p.add_inequality(row, "crb_theta_den_lb", true);
      ratio_cone(b_->ax, b_->ay, b_->az, "crb_theta_ratio_cone");
    }

    // reflection-coefficient coupling, real/imaginary branches with a shared
    // denominator variable
    {
      const int ix[2] = {b_->ix_re, b_->ix_im};
      const int iy[2] = {b_->iy_re, b_->iy_im};
      const int iz[2] = {b_->iz_re, b_->iz_im};
      const LinExpr* ub[2] = {&s_re_ub_, &s_im_ub_};
      const LinExpr* lb[2] = {&s_re_lb_, &s_im_lb_};
      const char* tags_ub[2] = {"taa_num_ub_re", "taa_num_ub_im"};
      const char* tags_guard[2] = {"taa_num_guard_re", "taa_num_guard_im"};
      const char* tags_den[2] = {"taa_den_lb_re", "taa_den_lb_im"};
      const char* tags_cone[2] = {"taa_ratio_cone_re", "taa_ratio_cone_im"};
      for (int br = 0; br < 2; ++br) {
        LinExpr row = var_expr(ix[br]);
        row.add(*ub[br], -1.0);
        p.add_inequality(row, tags_ub[br], true);
        row = var_expr(ix[br]);
        row.add(*lb[br], 1.0);
        p.add_inequality(row, tags_guard[br], false);
        row = s_den_lb_;
        row.add(iy[br], -1.0);
        p.add_inequality(row, tags_den[br], true);
        ratio_cone(ix[br], iy[br], iz[br], tags_cone[br]);
      }
      LinExpr tie = var_expr(b_->iy_re);
      tie.add(b_->iy_im, -1.0);
      p.add_equality(tie, "taa_den_shared", false);
    }

    // elevation branch
    {
      LinExpr row = var_expr(b_->bx);
      row.add(tau_tp_ub_, -1.0);
      p.add_inequality(row, "crb_phi_num_ub", true);
      row = var_expr(b_->bx);
      row.add(tau_tp_lb_, 1.0);
      p.add_inequality(row, "crb_phi_num_guard", false);
      row = tau_tt_lb_;
      row.add(b_->by, -1.0);
      p.add_inequality(row, "crb_phi_den_lb", true);
      ratio_cone(b_->bx, b_->by, b_->bz, "crb_phi_ratio_cone");
    }

    crbinv_theta_lb_ = tau_tt_lb_;
    crbinv_theta_lb_.add(b_->az, -1.0);
    crbinv_theta_lb_.compact();
    crbinv_phi_lb_ = tau_pp_lb_;
    crbinv_phi_lb_.add(b_->iz_re, -kappa_bar_);
    crbinv_phi_lb_.add(b_->iz_im, -kappa_bar_);
    crbinv_phi_lb_.add(b_->bz, -1.0);
    crbinv_phi_lb_.compact();

    if (!feas_) {
      if (crb_theta_capped_) {
        LinExpr row = crbinv_theta_lb_;
        row.constant -= 1.0 / cfg_.crb0_theta;
        p.add_inequality(row, "crb_theta_cap", true);
      }
      if (crb_phi_capped_) {
        LinExpr row = crbinv_phi_lb_;
        row.constant -= 1.0 / cfg_.crb0_phi;
        p.add_inequality(row, "crb_phi_cap", true);
      }
    }
  }

  void emit_power_cap() {
    ptx_ub_ = LinExpr();
    for (int q = 0; q < Q_; ++q)
      for (int k = 0; k < K_; ++k) {
        const int i = k + q * K_;
        add_scaled_ub_pg(ptx_ub_, i, ch_.bar_d_beta(k));
        add_scaled_ub_pe(ptx_ub_, i, 1.0);
      }
    ptx_ub_.compact();
    LinExpr row(cfg_.p_max);
    row.add(ptx_ub_, -1.0);
    b_->prog.add_inequality(row, "tx_power_cap", true);
  }

  void emit_fixed_split() {
    for (size_t i = 0; i < b_->gamma_idx.size(); ++i) {
      LinExpr e = var_expr(b_->gamma_idx[i]);
      e.constant = -0.5;
      b_->prog.add_equality(e, "fixed_split", false);
    }
  }

  void emit_main_objective() {
    LinExpr numerator;
    for (const auto& se : se_lb_exprs_) numerator.add(se);
    if (b_->has_crb && cfg_.omega > 0) {
      numerator.add(crbinv_theta_lb_, cfg_.omega);
      numerator.add(crbinv_phi_lb_, cfg_.omega);
    }
    numerator.compact();

    LinExpr power(cfg_.p_0);
    power.add(ptx_ub_, 1.0 / cfg_.rho_amp);
    if (b_->has_rate_ub)
      for (const auto& se : se_ub_exprs_) power.add(se, cfg_.epsilon_dyn);
    power.compact();

    LinExpr obj = numerator;
    obj.add(power, -opts_.tau);
    obj.compact();
    b_->prog.set_objective(obj);
    b_->numerator = numerator;
    b_->power = power;
  }

  void emit_feasibility_objective() {
    ConicProgram& p = b_->prog;
    const int t = b_->t_epi;
    if (cfg_.se_threshold > 0) {
      for (int k = 0; k < K_; ++k) {
        LinExpr row = se_lb_exprs_[k];
        row *= 1.0 / cfg_.se_threshold;
        row.constant -= 1.0;
        row.add(t, -1.0);
        p.add_inequality(row, "feas_rate_residual", false);
      }
    }
    if (b_->has_crb && crb_theta_capped_) {
      LinExpr row = crbinv_theta_lb_;
      row *= cfg_.crb0_theta;
      row.constant -= 1.0;
      row.add(t, -1.0);
      p.add_inequality(row, "feas_crb_theta_residual", false);
    }
    if (b_->has_crb && crb_phi_capped_) {
      LinExpr row = crbinv_phi_lb_;
      row *= cfg_.crb0_phi;
      row.constant -= 1.0;
      row.add(t, -1.0);
      p.add_inequality(row, "feas_crb_phi_residual", false);
    }
    p.set_objective(var_expr(t));
    b_->numerator = var_expr(t);
    b_->power = LinExpr(1.0);
  }

  void store_audit_data(BuiltProgram& out) const;

  // inputs
  const ExpansionPoint& pt_;
  const ChannelSet& ch_;
  const SensingGeometry& geo_;
  const SystemConfig& cfg_;
  const BuildOptions& opts_;
  const bool feas_;
  int K_ = 0, Q_ = 0;
  ChannelGeometryCache cache_;
  double kappa_bar_ = 0.0, alpha_sq_ = 0.0;
  cplx alpha_conj_;
  bool crb_theta_capped_ = false, crb_phi_capped_ = false;

  BuiltProgram* b_ = nullptr;
  std::vector<ProductBounds> bounds_;
  std::vector<LinExpr> se_lb_exprs_, se_ub_exprs_;
  std::vector<LinExpr> rnu_lb_store_, rnu_ub_store_, rde_ub_store_, rde_lb_store_;
  LinExpr ptx_ub_;
  LinExpr tau_tt_lb_, tau_pp_lb_, tau_tp_ub_, tau_tp_lb_;
  LinExpr s_re_ub_, s_re_lb_, s_im_ub_, s_im_lb_, s_den_lb_;
  LinExpr crbinv_theta_lb_, crbinv_phi_lb_;
};

// Audit payload carried by the built program (definitions of the surrogate
// expressions for tight_assignment and the *_at evaluators).
struct BuiltProgram::AuditData {
  ExpansionPoint point;
  double kappa_bar = 0.0;
  double se_threshold = 0.0;
  double crb0_theta = 0.0, crb0_phi = 0.0;
  std::vector<LinExpr> rnu_lb, rnu_ub, rde_lb, rde_ub;
  LinExpr tau_tt_lb, tau_pp_lb, tau_tp_ub, tau_tp_lb;
  LinExpr s_re_ub, s_re_lb, s_im_ub, s_im_lb, s_den_lb;
};

void ProgramAssembler::store_audit_data(BuiltProgram& out) const {
  auto data = std::make_shared<BuiltProgram::AuditData>();
  data->point = pt_;
  data->kappa_bar = kappa_bar_;
  data->se_threshold = cfg_.se_threshold;
  data->crb0_theta = cfg_.crb0_theta;
  data->crb0_phi = cfg_.crb0_phi;
  data->rnu_lb = rnu_lb_store_;
  data->rnu_ub = rnu_ub_store_;
  data->rde_lb = rde_lb_store_;
  data->rde_ub = rde_ub_store_;
  data->tau_tt_lb = tau_tt_lb_;
  data->tau_pp_lb = tau_pp_lb_;
  data->tau_tp_ub = tau_tp_ub_;
  data->tau_tp_lb = tau_tp_lb_;
  data->s_re_ub = s_re_ub_;
  data->s_re_lb = s_re_lb_;
  data->s_im_ub = s_im_ub_;
  data->s_im_lb = s_im_lb_;
  data->s_den_lb = s_den_lb_;
  out.audit_ = std::move(data);
}

PowerAllocation BuiltProgram::extract_allocation(const VectorXd& values) const {
  PowerAllocation a(k_users, q_subcarriers);
  for (int q = 0; q < q_subcarriers; ++q)
    for (int k = 0; k < k_users; ++k) {
      a.xi(k, q) = std::max(0.0, values(xi[k + q * k_users]));
      double g = std::max(0.0, values(gamma_index(k, q)));
      double e = std::max(0.0, values(eta[k + q * k_users]));
      const double s = g + e;
      if (s <= 0) {
        g = e = 0.5;
      } else {
        g /= s;
        e /= s;
      }
      a.gamma(k, q) = g;
      a.eta(k, q) = e;
    }
  return a;
}

VectorXd BuiltProgram::tight_assignment(const PowerAllocation& alloc) const {
  const auto& d = *audit_;
  VectorXd x = VectorXd::Zero(prog.variable_count());
  for (int q = 0; q < q_subcarriers; ++q)
    for (int k = 0; k < k_users; ++k) {
      const int i = k + q * k_users;
      x(xi[i]) = alloc.xi(k, q);
      x(gamma_index(k, q)) = alloc.gamma(k, q);
      x(eta[i]) = alloc.eta(k, q);
      x(w_xi[i]) = alloc.xi(k, q) * alloc.xi(k, q);
      x(sq_gamma_index(k, q)) = alloc.gamma(k, q) * alloc.gamma(k, q);
      x(w_eta[i]) = alloc.eta(k, q) * alloc.eta(k, q);
      x(sqrt_gamma_index(k, q)) = std::sqrt(alloc.gamma(k, q));
      x(s_eta[i]) = std::sqrt(alloc.eta(k, q));
    }
  if (has_rate_lb)
    for (int i = 0; i < k_users * q_subcarriers; ++i) {
      const int k = i % k_users, q = i / k_users;
      const double rnu = std::max(d.rnu_lb[i].value_at(x), 1e-300);
      x(u_rate[i]) = d.point.lb_b(k, q) / rnu;
    }
  if (has_rate_ub)
    for (int i = 0; i < k_users * q_subcarriers; ++i) {
      const int k = i % k_users, q = i / k_users;
      const double rnu = d.rnu_ub[i].value_at(x);
      const double rde = std::max(d.rde_lb[i].value_at(x), 1e-300);
      x(cx[i]) = rnu;
      x(cy[i]) = rde;
      x(cz[i]) = rnu * rnu / rde;
      x(v_rate[i]) = (1.0 / d.point.ub_c(k, q)) / rde;
    }
  if (has_crb) {
    const double tp_mag = std::max(d.tau_tp_ub.value_at(x), -d.tau_tp_lb.value_at(x));
    const double sden = std::max(d.s_den_lb.value_at(x), 1e-300);
    const double ixr = std::max(d.s_re_ub.value_at(x), -d.s_re_lb.value_at(x));
    const double ixi = std::max(d.s_im_ub.value_at(x), -d.s_im_lb.value_at(x));
    x(ix_re) = ixr;
    x(ix_im) = ixi;
    x(iy_re) = sden;
    x(iy_im) = sden;
    x(iz_re) = ixr * ixr / sden;
    x(iz_im) = ixi * ixi / sden;
    x(ax) = tp_mag;
    x(bx) = tp_mag;
    const double ayv = d.tau_pp_lb.value_at(x) - d.kappa_bar * (x(iz_re) + x(iz_im));
    x(ay) = ayv;
    x(az) = ayv > 0 ? tp_mag * tp_mag / ayv : 0.0;
    const double byv = d.tau_tt_lb.value_at(x);
    x(by) = byv;
    x(bz) = byv > 0 ? tp_mag * tp_mag / byv : 0.0;
  }
  if (feasibility && t_epi >= 0) {
    double t = std::numeric_limits<double>::infinity();
    if (d.se_threshold > 0)
      for (const auto& se : se_lb_exprs_)
        t = std::min(t, se.value_at(x) / d.se_threshold - 1.0);
    if (has_crb && std::isfinite(d.crb0_theta)) {
      const double inv = d.tau_tt_lb.value_at(x) - x(az);
      t = std::min(t, inv * d.crb0_theta - 1.0);
    }
    if (has_crb && std::isfinite(d.crb0_phi)) {
      const double inv =
          d.tau_pp_lb.value_at(x) - d.kappa_bar * (x(iz_re) + x(iz_im)) - x(bz);
      t = std::min(t, inv * d.crb0_phi - 1.0);
    }
    x(t_epi) = std::isfinite(t) ? t : 0.0;
  }
  return x;
}

double BuiltProgram::objective_at(const PowerAllocation& alloc) const {
  return prog.objective().value_at(tight_assignment(alloc));
}

double BuiltProgram::numerator_at(const PowerAllocation& alloc) const {
  return numerator.value_at(tight_assignment(alloc));
}

double BuiltProgram::power_at(const PowerAllocation& alloc) const {
  return power.value_at(tight_assignment(alloc));
}

VectorXd BuiltProgram::se_lower_bound_at(const PowerAllocation& alloc) const {
  const VectorXd x = tight_assignment(alloc);
  VectorXd out(k_users);
  for (int k = 0; k < k_users; ++k) out(k) = se_lb_exprs_[k].value_at(x);
  return out;
}

double BuiltProgram::ptx_upper_bound_at(const PowerAllocation& alloc) const {
  return ptx_ub_expr_.value_at(tight_assignment(alloc));
}

BuiltProgram build_main_program(const ExpansionPoint& point, const ChannelSet& ch,
                                const SensingGeometry& geo, const SystemConfig& cfg,
                                const BuildOptions& opts) {
  ProgramAssembler asmr(point, ch, geo, cfg, opts, false);
  return asmr.assemble();
}

BuiltProgram build_feasibility_program(const ExpansionPoint& point, const ChannelSet& ch,
                                       const SensingGeometry& geo, const SystemConfig& cfg,
                                       const BuildOptions& opts) {
  ProgramAssembler asmr(point, ch, geo, cfg, opts, true);
  return asmr.assemble();
}

}  // namespace isacee
