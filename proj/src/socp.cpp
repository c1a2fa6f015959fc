// SPDX-License-Identifier: Apache-2.0
#include "isacee/socp.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>

namespace isacee {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::primal_infeasible: return "primal_infeasible";
    case SolveStatus::dual_infeasible: return "dual_infeasible";
    case SolveStatus::max_iter: return "max_iter";
    case SolveStatus::numerical_error: return "numerical_error";
  }
  return "unknown";
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Composite-cone utilities on stacked vectors.
// ---------------------------------------------------------------------------

struct ConeOps {
  explicit ConeOps(const ConeSpec& spec) : spec_(spec) {
    offsets_.reserve(spec.soc_dims.size());
    int off = spec.nonneg;
    for (int d : spec.soc_dims) {
      offsets_.push_back(off);
      off += d;
    }
    total_ = off;
  }

  int total() const { return total_; }

  VectorXd identity() const {
    VectorXd e = VectorXd::Zero(total_);
    e.head(spec_.nonneg).setOnes();
    for (size_t i = 0; i < offsets_.size(); ++i) e(offsets_[i]) = 1.0;
    return e;
  }

  /// Smallest margin to the cone boundary (positive inside).
  double margin(const VectorXd& v) const {
    double m = kInf;
    for (int i = 0; i < spec_.nonneg; ++i) m = std::min(m, v(i));
    for (size_t i = 0; i < offsets_.size(); ++i) {
      const int o = offsets_[i], d = spec_.soc_dims[i];
      m = std::min(m, v(o) - v.segment(o + 1, d - 1).norm());
    }
    return m;
  }

  /// sup { a >= 0 : v + a*dv in cone } for v strictly inside.
  double max_step(const VectorXd& v, const VectorXd& dv) const {
    double amax = kInf;
    for (int i = 0; i < spec_.nonneg; ++i)
      if (dv(i) < 0) amax = std::min(amax, -v(i) / dv(i));
    for (size_t i = 0; i < offsets_.size(); ++i) {
      const int o = offsets_[i], d = spec_.soc_dims[i];
      const double v0 = v(o), dv0 = dv(o);
      const auto v1 = v.segment(o + 1, d - 1);
      const auto dv1 = dv.segment(o + 1, d - 1);
      const double a = dv0 * dv0 - dv1.squaredNorm();
      const double b = 2.0 * (v0 * dv0 - v1.dot(dv1));
      const double c = v0 * v0 - v1.squaredNorm();  // > 0 strictly inside
      double root = kInf;
      if (std::abs(a) < 1e-300) {
        if (b < 0) root = -c / b;
      } else {
        const double disc = b * b - 4 * a * c;
        if (disc >= 0) {
          const double sq = std::sqrt(disc);
          const double q = -(b + (b >= 0 ? sq : -sq)) / 2.0;
          for (double r : {q / a, (q != 0.0 ? c / q : kInf)})
            if (r > 0) root = std::min(root, r);
        } else if (a < 0) {
          // c > 0 and no real roots cannot happen when a < 0
          root = 0.0;
        }
      }
      if (dv0 < 0) root = std::min(root, -v0 / dv0);
      amax = std::min(amax, root);
    }
    return amax;
  }

  /// Jordan product u o v.
  VectorXd jordan_product(const VectorXd& u, const VectorXd& v) const {
    VectorXd out(total_);
    out.head(spec_.nonneg) = u.head(spec_.nonneg).cwiseProduct(v.head(spec_.nonneg));
    for (size_t i = 0; i < offsets_.size(); ++i) {
      const int o = offsets_[i], d = spec_.soc_dims[i];
      out(o) = u.segment(o, d).dot(v.segment(o, d));
      out.segment(o + 1, d - 1) =
          u(o) * v.segment(o + 1, d - 1) + v(o) * u.segment(o + 1, d - 1);
    }
    return out;
  }

  /// Solve lambda o u = v for u.
  VectorXd jordan_solve(const VectorXd& lambda, const VectorXd& v) const {
    VectorXd out(total_);
    out.head(spec_.nonneg) = v.head(spec_.nonneg).cwiseQuotient(lambda.head(spec_.nonneg));
    for (size_t i = 0; i < offsets_.size(); ++i) {
      const int o = offsets_[i], d = spec_.soc_dims[i];
      const double l0 = lambda(o);
      const auto l1 = lambda.segment(o + 1, d - 1);
      const double det = l0 * l0 - l1.squaredNorm();
      const double v0 = v(o);
      const auto v1 = v.segment(o + 1, d - 1);
      const double u0 = (l0 * v0 - l1.dot(v1)) / det;
      out(o) = u0;
      out.segment(o + 1, d - 1) = (v1 - u0 * l1) / l0;
    }
    return out;
  }

  const ConeSpec& spec_;
  std::vector<int> offsets_;
  int total_ = 0;
};

// Nesterov-Todd scaling for the composite cone. W is symmetric; lambda = W z =
// W^{-1} s. Orthant blocks are diagonal; each second-order cone carries a small
// dense block.
struct NTScaling {
  VectorXd orthant_w;  // sqrt(s/z) per orthant coordinate
  std::vector<MatrixXd> soc_w;      // W block per cone
  std::vector<MatrixXd> soc_w_inv;  // W^{-1}
  std::vector<MatrixXd> soc_w2;     // W^2
  VectorXd lambda;

  void compute(const ConeOps& ops, const VectorXd& s, const VectorXd& z) {
    const int l = ops.spec_.nonneg;
    orthant_w = (s.head(l).cwiseQuotient(z.head(l))).cwiseSqrt();
    lambda.resize(ops.total());
    lambda.head(l) = (s.head(l).cwiseProduct(z.head(l))).cwiseSqrt();
    const size_t nsoc = ops.offsets_.size();
    soc_w.resize(nsoc);
    soc_w_inv.resize(nsoc);
    soc_w2.resize(nsoc);
    for (size_t i = 0; i < nsoc; ++i) {
      const int o = ops.offsets_[i], d = ops.spec_.soc_dims[i];
      const VectorXd sb = s.segment(o, d);
      const VectorXd zb = z.segment(o, d);
      const double sres = sb(0) * sb(0) - sb.tail(d - 1).squaredNorm();
      const double zres = zb(0) * zb(0) - zb.tail(d - 1).squaredNorm();
      const double sa = std::sqrt(sres), za = std::sqrt(zres);
      VectorXd sbar = sb / sa, zbar = zb / za;
      const double gamma = std::sqrt((1.0 + sbar.dot(zbar)) / 2.0);
      VectorXd wbar(d);
      wbar(0) = (sbar(0) + zbar(0)) / (2 * gamma);
      wbar.tail(d - 1) = (sbar.tail(d - 1) - zbar.tail(d - 1)) / (2 * gamma);
      const double eta = std::sqrt(sa / za);

      MatrixXd J = -MatrixXd::Identity(d, d);
      J(0, 0) = 1.0;
      // V is the canonical square root of 2 wbar wbar' - J; W = eta V and
      // V^{-1} = J V J.
      MatrixXd V(d, d);
      V(0, 0) = wbar(0);
      V.block(0, 1, 1, d - 1) = wbar.tail(d - 1).transpose();
      V.block(1, 0, d - 1, 1) = wbar.tail(d - 1);
      V.block(1, 1, d - 1, d - 1) =
          MatrixXd::Identity(d - 1, d - 1) +
          wbar.tail(d - 1) * wbar.tail(d - 1).transpose() / (1.0 + wbar(0));
      soc_w[i] = eta * V;
      soc_w_inv[i] = (J * V * J) / eta;
      soc_w2[i] = (eta * eta) * (2.0 * wbar * wbar.transpose() - J);
      lambda.segment(o, d) = soc_w[i] * zb;
    }
  }

  void identity(const ConeOps& ops) {
    orthant_w = VectorXd::Ones(ops.spec_.nonneg);
    const size_t nsoc = ops.offsets_.size();
    soc_w.resize(nsoc);
    soc_w_inv.resize(nsoc);
    soc_w2.resize(nsoc);
    for (size_t i = 0; i < nsoc; ++i) {
      const int d = ops.spec_.soc_dims[i];
      soc_w[i] = soc_w_inv[i] = soc_w2[i] = MatrixXd::Identity(d, d);
    }
  }

  VectorXd apply_w(const ConeOps& ops, const VectorXd& v) const {
    VectorXd out(ops.total());
    const int l = ops.spec_.nonneg;
    out.head(l) = orthant_w.cwiseProduct(v.head(l));
    for (size_t i = 0; i < ops.offsets_.size(); ++i) {
      const int o = ops.offsets_[i], d = ops.spec_.soc_dims[i];
      out.segment(o, d) = soc_w[i] * v.segment(o, d);
    }
    return out;
  }

  VectorXd apply_w_inv(const ConeOps& ops, const VectorXd& v) const {
    VectorXd out(ops.total());
    const int l = ops.spec_.nonneg;
    out.head(l) = v.head(l).cwiseQuotient(orthant_w);
    for (size_t i = 0; i < ops.offsets_.size(); ++i) {
      const int o = ops.offsets_[i], d = ops.spec_.soc_dims[i];
      out.segment(o, d) = soc_w_inv[i] * v.segment(o, d);
    }
    return out;
  }
};

// ---------------------------------------------------------------------------
// KKT system  [ dI   A'    G' ] [dx]   [rx]
//             [ A   -dI    0  ] [dy] = [ry]
//             [ G    0  -W2-dI] [dz]   [rz]
// factored with sparse LDL^T; refinement runs against the unregularized matrix.
// ---------------------------------------------------------------------------

struct KktSolver {
  int n = 0, p = 0, m = 0;
  double reg = 1e-8;
  int refine_steps = 3;
  const StdConeProblem* prob = nullptr;
  const ConeOps* ops = nullptr;
  SpMat kkt;
  Eigen::SimplicialLDLT<SpMat> ldlt;
  bool analyzed = false;

  void assemble(const NTScaling& w, double reg_in) {
    reg = reg_in;
    std::vector<Triplet> trips;
    trips.reserve(prob->A.nonZeros() + prob->G.nonZeros() + n + p + m + 16 * m);
    for (int i = 0; i < n; ++i) trips.emplace_back(i, i, reg);
    for (int k = 0; k < prob->A.outerSize(); ++k)
      for (SpMat::InnerIterator it(prob->A, k); it; ++it) {
        trips.emplace_back(n + it.row(), it.col(), it.value());
        trips.emplace_back(it.col(), n + it.row(), it.value());
      }
    for (int i = 0; i < p; ++i) trips.emplace_back(n + i, n + i, -reg);
    for (int k = 0; k < prob->G.outerSize(); ++k)
      for (SpMat::InnerIterator it(prob->G, k); it; ++it) {
        trips.emplace_back(n + p + it.row(), it.col(), it.value());
        trips.emplace_back(it.col(), n + p + it.row(), it.value());
      }
    const int l = prob->cones.nonneg;
    for (int i = 0; i < l; ++i) {
      const double w2 = w.orthant_w(i) * w.orthant_w(i);
      trips.emplace_back(n + p + i, n + p + i, -w2 - reg);
    }
    for (size_t ci = 0; ci < ops->offsets_.size(); ++ci) {
      const int o = n + p + ops->offsets_[ci];
      const MatrixXd& w2 = w.soc_w2[ci];
      for (int r = 0; r < w2.rows(); ++r)
        for (int c = 0; c < w2.cols(); ++c) {
          double v = -w2(r, c);
          if (r == c) v -= reg;
          trips.emplace_back(o + r, o + c, v);
        }
    }
    kkt.resize(n + p + m, n + p + m);
    kkt.setFromTriplets(trips.begin(), trips.end());
  }

  bool factorize(const NTScaling& w, double base_reg) {
    for (double r = base_reg; r <= 1e-2; r *= 100.0) {
      assemble(w, r);
      if (!analyzed) {
        ldlt.analyzePattern(kkt);
        analyzed = true;
      }
      ldlt.factorize(kkt);
      if (ldlt.info() == Eigen::Success) return true;
    }
    return false;
  }

  // Residual against the *unregularized* KKT operator.
  VectorXd apply_unregularized(const NTScaling& w, const VectorXd& u) const {
    VectorXd out = VectorXd::Zero(n + p + m);
    const auto x = u.head(n);
    const auto y = u.segment(n, p);
    const auto z = u.tail(m);
    out.head(n) = prob->A.transpose() * y + prob->G.transpose() * z;
    out.segment(n, p) = prob->A * x;
    VectorXd w2z(m);
    const int l = prob->cones.nonneg;
    w2z.head(l) = w.orthant_w.array().square() * z.head(l).array();
    for (size_t ci = 0; ci < ops->offsets_.size(); ++ci) {
      const int o = ops->offsets_[ci];
      const int d = prob->cones.soc_dims[ci];
      w2z.segment(o, d) = w.soc_w2[ci] * z.segment(o, d);
    }
    out.tail(m) = prob->G * x - w2z;
    return out;
  }

  VectorXd solve(const NTScaling& w, const VectorXd& rhs) const {
    VectorXd u = ldlt.solve(rhs);
    for (int i = 0; i < refine_steps; ++i) {
      const VectorXd r = rhs - apply_unregularized(w, u);
      u += ldlt.solve(r);
    }
    return u;
  }
};

// ---------------------------------------------------------------------------
// Ruiz equilibration with cone-block-uniform row scaling on G.
// ---------------------------------------------------------------------------

struct Equilibration {
  VectorXd d_col, e_a, e_g;
  double cost_scale = 1.0;
  double b_scale = 1.0;

  static void max_abs_cols(const SpMat& M, VectorXd& acc) {
    for (int k = 0; k < M.outerSize(); ++k)
      for (SpMat::InnerIterator it(M, k); it; ++it)
        acc(it.col()) = std::max(acc(it.col()), std::abs(it.value()));
  }
  static void max_abs_rows(const SpMat& M, VectorXd& acc) {
    for (int k = 0; k < M.outerSize(); ++k)
      for (SpMat::InnerIterator it(M, k); it; ++it)
        acc(it.row()) = std::max(acc(it.row()), std::abs(it.value()));
  }

  void compute(StdConeProblem& prob, const ConeOps& ops) {
    const int n = static_cast<int>(prob.c.size());
    const int p = static_cast<int>(prob.b.size());
    const int m = static_cast<int>(prob.h.size());
    d_col = VectorXd::Ones(n);
    e_a = VectorXd::Ones(p);
    e_g = VectorXd::Ones(m);

    for (int round = 0; round < 6; ++round) {
      VectorXd col = VectorXd::Zero(n), rowa = VectorXd::Zero(p), rowg = VectorXd::Zero(m);
      max_abs_cols(prob.A, col);
      max_abs_cols(prob.G, col);
      max_abs_rows(prob.A, rowa);
      max_abs_rows(prob.G, rowg);
      // one scale per second-order cone block
      for (size_t ci = 0; ci < ops.offsets_.size(); ++ci) {
        const int o = ops.offsets_[ci], d = ops.spec_.soc_dims[ci];
        const double mx = rowg.segment(o, d).maxCoeff();
        rowg.segment(o, d).setConstant(mx);
      }
      auto dval = [](double v) { return v > 1e-12 ? 1.0 / std::sqrt(v) : 1.0; };
      VectorXd dc = col.unaryExpr(dval);
      VectorXd da = rowa.unaryExpr(dval);
      VectorXd dg = rowg.unaryExpr(dval);

      prob.A = da.asDiagonal() * prob.A * dc.asDiagonal();
      prob.G = dg.asDiagonal() * prob.G * dc.asDiagonal();
      prob.b = da.asDiagonal() * prob.b;
      prob.h = dg.asDiagonal() * prob.h;
      prob.c = dc.asDiagonal() * prob.c;
      d_col = d_col.cwiseProduct(dc);
      e_a = e_a.cwiseProduct(da);
      e_g = e_g.cwiseProduct(dg);
    }

    cost_scale = std::max(1.0, prob.c.lpNorm<Eigen::Infinity>());
    prob.c /= cost_scale;
    double rhs_norm = std::max(prob.b.size() ? prob.b.lpNorm<Eigen::Infinity>() : 0.0,
                               prob.h.size() ? prob.h.lpNorm<Eigen::Infinity>() : 0.0);
    b_scale = std::max(1.0, rhs_norm);
    prob.b /= b_scale;
    prob.h /= b_scale;
  }

  // Map the scaled solution back to original coordinates.
  void unscale(SocpSolution& sol) const {
    const double t = b_scale;
    sol.x = t * d_col.cwiseProduct(sol.x);
    sol.s = t * sol.s.cwiseQuotient(e_g);
    sol.y = cost_scale * e_a.cwiseProduct(sol.y);
    sol.z = cost_scale * e_g.cwiseProduct(sol.z);
  }
};

}  // namespace

SocpSolution solve_socp(const StdConeProblem& prob_in, const SolverSettings& settings) {
  StdConeProblem prob = prob_in;  // equilibration mutates a copy
  const int n = static_cast<int>(prob.c.size());
  const int p = static_cast<int>(prob.b.size());
  const int m = static_cast<int>(prob.h.size());
  if (prob.cones.total() != m)
    throw std::invalid_argument("solve_socp: cone dims do not match G rows");
  if (prob.A.rows() != p || (p > 0 && prob.A.cols() != n))
    throw std::invalid_argument("solve_socp: A dimensions");
  if (prob.G.rows() != m || prob.G.cols() != n)
    throw std::invalid_argument("solve_socp: G dimensions");
  if (m == 0) throw std::invalid_argument("solve_socp: need at least one cone constraint");

  ConeOps ops(prob.cones);
  Equilibration eq;
  eq.compute(prob, ops);

  SocpSolution sol;
  KktSolver kkt;
  kkt.n = n;
  kkt.p = p;
  kkt.m = m;
  kkt.prob = &prob;
  kkt.ops = &ops;
  kkt.refine_steps = settings.refine_steps;

  const VectorXd e = ops.identity();
  const double deg = ops.spec_.degree() + 1;

  // Initial point: least-norm primal/dual solves with identity scaling, shifted
  // into the cone interior.
  NTScaling w;
  w.identity(ops);
  if (!kkt.factorize(w, settings.static_reg)) {
    sol.message = "initial KKT factorization failed";
    return sol;
  }
  VectorXd rhs = VectorXd::Zero(n + p + m);
  rhs.segment(n, p) = prob.b;
  rhs.tail(m) = prob.h;
  VectorXd u = kkt.solve(w, rhs);
  VectorXd x = u.head(n);
  VectorXd s = -u.tail(m);
  double shift = ops.margin(s);
  if (shift <= 0) s += (1.0 - shift) * e;

  rhs.setZero();
  rhs.head(n) = -prob.c;
  u = kkt.solve(w, rhs);
  VectorXd y = u.segment(n, p);
  VectorXd z = u.tail(m);
  shift = ops.margin(z);
  if (shift <= 0) z += (1.0 - shift) * e;

  double tau = 1.0, kappa = 1.0;

  const double norm_b = std::max(1.0, prob.b.size() ? prob.b.norm() : 0.0);
  const double norm_h = std::max(1.0, prob.h.norm());
  const double norm_c = std::max(1.0, prob.c.norm());

  std::ostringstream log;
  for (int iter = 0; iter <= settings.max_iter; ++iter) {
    // residuals of the homogeneous embedding
    const VectorXd rx = prob.A.transpose() * y + prob.G.transpose() * z + prob.c * tau;
    const VectorXd ry = prob.A * x - prob.b * tau;
    const VectorXd rz = s + prob.G * x - prob.h * tau;
    const double rtau = kappa + prob.c.dot(x) + (p ? prob.b.dot(y) : 0.0) + prob.h.dot(z);

    const double cx = prob.c.dot(x);
    const double by = p ? prob.b.dot(y) : 0.0;
    const double hz = prob.h.dot(z);
    const double pobj = cx / tau;
    const double dobj = -(by + hz) / tau;
    const double gap = s.dot(z) / (tau * tau);
    const double pres = std::max(ry.norm() / norm_b, rz.norm() / norm_h) / tau;
    const double dres = rx.norm() / norm_c / tau;
    const double relgap = gap / std::max({1.0, std::abs(pobj), std::abs(dobj)});

    if (settings.verbose)
      std::cerr << "iter " << iter << " pobj " << pobj << " gap " << gap << " pres " << pres
                << " dres " << dres << " tau " << tau << " kappa " << kappa << "\n";
    log << iter << ": gap=" << gap << " pres=" << pres << " dres=" << dres << " tau=" << tau
        << "\n";

    if (pres <= settings.feastol && dres <= settings.feastol &&
        (gap <= settings.abstol || relgap <= settings.reltol)) {
      sol.status = SolveStatus::optimal;
      sol.x = x / tau;
      sol.y = y / tau;
      sol.z = z / tau;
      sol.s = s / tau;
      eq.unscale(sol);
      sol.pobj = eq.cost_scale * eq.b_scale * pobj;
      sol.dobj = eq.cost_scale * eq.b_scale * dobj;
      sol.gap = gap;
      sol.pres = pres;
      sol.dres = dres;
      sol.iterations = iter;
      return sol;
    }

    // infeasibility certificates of the embedding
    if (by + hz < -1e-12) {
      const double infres = (prob.A.transpose() * y + prob.G.transpose() * z).norm() / (-(by + hz));
      if (infres <= settings.feastol && tau <= settings.feastol * std::max(1.0, kappa)) {
        sol.status = SolveStatus::primal_infeasible;
        sol.y = y;
        sol.z = z;
        sol.iterations = iter;
        sol.message = "primal infeasibility certificate";
        return sol;
      }
    }
    if (cx < -1e-12) {
      const double infres =
          std::max((prob.A * x).norm(), (prob.G * x + s).norm()) / (-cx);
      if (infres <= settings.feastol && tau <= settings.feastol * std::max(1.0, kappa)) {
        sol.status = SolveStatus::dual_infeasible;
        sol.x = x;
        sol.s = s;
        sol.iterations = iter;
        sol.message = "dual infeasibility certificate";
        return sol;
      }
    }
    if (iter == settings.max_iter) break;

    w.compute(ops, s, z);
    if (!kkt.factorize(w, settings.static_reg)) {
      sol.message = "KKT factorization failed at iteration " + std::to_string(iter);
      sol.status = SolveStatus::numerical_error;
      return sol;
    }

    const double mu = (s.dot(z) + tau * kappa) / deg;

    // constant-column solve, shared by both directions
    rhs.head(n) = -prob.c;
    rhs.segment(n, p) = prob.b;
    rhs.tail(m) = prob.h;
    const VectorXd u1 = kkt.solve(w, rhs);
    const double dot1 =
        prob.c.dot(u1.head(n)) + (p ? prob.b.dot(u1.segment(n, p)) : 0.0) + prob.h.dot(u1.tail(m));

    auto direction = [&](const VectorXd& dxv, const VectorXd& dyv, const VectorXd& dzv,
                         double dtau_rhs, const VectorXd& ds_target, double dtk_target,
                         VectorXd& dx, VectorXd& dy, VectorXd& dz, VectorXd& ds, double& dtau,
                         double& dkappa) {
      // ds_target is the RHS of lambda o (W^{-1}ds + W dz) = -ds_target;
      // dtk_target of tau*dkappa + kappa*dtau = -dtk_target.
      const VectorXd wl = w.apply_w(ops, ops.jordan_solve(w.lambda, ds_target));
      rhs.head(n) = dxv;
      rhs.segment(n, p) = dyv;
      rhs.tail(m) = dzv + wl;
      const VectorXd u2 = kkt.solve(w, rhs);
      const double dot2 = prob.c.dot(u2.head(n)) + (p ? prob.b.dot(u2.segment(n, p)) : 0.0) +
                          prob.h.dot(u2.tail(m));
      dtau = (dtau_rhs + dtk_target / tau - dot2) / (dot1 - kappa / tau);
      dx = u2.head(n) + dtau * u1.head(n);
      dy = u2.segment(n, p) + dtau * u1.segment(n, p);
      dz = u2.tail(m) + dtau * u1.tail(m);
      ds = -w.apply_w(ops, ops.jordan_solve(w.lambda, ds_target) + w.apply_w(ops, dz));
      dkappa = -(dtk_target + kappa * dtau) / tau;
    };

    // predictor (affine) direction
    VectorXd dx, dy, dz, ds;
    double dtau, dkappa;
    const VectorXd lam_sq = ops.jordan_product(w.lambda, w.lambda);
    direction(-rx, -ry, -rz, -rtau, lam_sq, tau * kappa, dx, dy, dz, ds, dtau, dkappa);

    double alpha = std::min({1.0, ops.max_step(s, ds), ops.max_step(z, dz)});
    if (dtau < 0) alpha = std::min(alpha, -tau / dtau);
    if (dkappa < 0) alpha = std::min(alpha, -kappa / dkappa);
    const double sigma = std::pow(std::clamp(1.0 - alpha, 0.0, 1.0), 3.0);

    // corrector (combined) direction
    const VectorXd corr =
        ops.jordan_product(w.apply_w_inv(ops, ds), w.apply_w(ops, dz));
    const VectorXd ds_target = lam_sq + corr - sigma * mu * e;
    const double dtk_target = tau * kappa + dtau * dkappa - sigma * mu;
    const double f = 1.0 - sigma;
    direction(-f * rx, -f * ry, -f * rz, -f * rtau, ds_target, dtk_target, dx, dy, dz, ds, dtau,
              dkappa);

    alpha = std::min({1.0, ops.max_step(s, ds), ops.max_step(z, dz)});
    if (dtau < 0) alpha = std::min(alpha, -tau / dtau);
    if (dkappa < 0) alpha = std::min(alpha, -kappa / dkappa);
    alpha *= 0.98;

    if (!std::isfinite(alpha) || alpha < 1e-13) {
      sol.status = SolveStatus::numerical_error;
      sol.message = "step length collapsed at iteration " + std::to_string(iter) + "\n" + log.str();
      return sol;
    }

    x += alpha * dx;
    y += alpha * dy;
    z += alpha * dz;
    s += alpha * ds;
    tau += alpha * dtau;
    kappa += alpha * dkappa;
  }

  sol.status = SolveStatus::max_iter;
  sol.x = x / tau;
  sol.y = y / tau;
  sol.z = z / tau;
  sol.s = s / tau;
  eq.unscale(sol);
  sol.iterations = settings.max_iter;
  sol.message = "iteration limit\n" + log.str();
  return sol;
}

// ---------------------------------------------------------------------------
// Named-program translation.
// ---------------------------------------------------------------------------

ConicSolution solve_conic(const ConicProgram& prog, double accuracy) {
  const int n = prog.variable_count();
  std::vector<Triplet> a_trips, g_trips;
  std::vector<double> b_vals, h_vals;

  for (const auto& c : prog.equalities()) {
    const int row = static_cast<int>(b_vals.size());
    for (const auto& [v, coef] : c.lhs_minus_rhs.terms) a_trips.emplace_back(row, v, coef);
    b_vals.push_back(-c.lhs_minus_rhs.constant);
  }

  ConeSpec cones;
  // orthant block: expr >= 0  ->  -expr*x + s = const, s >= 0
  for (const auto& c : prog.inequalities()) {
    const int row = static_cast<int>(h_vals.size());
    for (const auto& [v, coef] : c.expr.terms) g_trips.emplace_back(row, v, -coef);
    h_vals.push_back(c.expr.constant);
  }
  cones.nonneg = static_cast<int>(h_vals.size());
  for (const auto& c : prog.cones()) {
    for (const auto& entry : c.entries) {
      const int row = static_cast<int>(h_vals.size());
      for (const auto& [v, coef] : entry.terms) g_trips.emplace_back(row, v, -coef);
      h_vals.push_back(entry.constant);
    }
    cones.soc_dims.push_back(static_cast<int>(c.entries.size()));
  }

  StdConeProblem prob;
  prob.c = VectorXd::Zero(n);
  for (const auto& [v, coef] : prog.objective().terms) prob.c(v) -= coef;  // maximize -> minimize
  prob.A.resize(static_cast<int>(b_vals.size()), n);
  prob.A.setFromTriplets(a_trips.begin(), a_trips.end());
  prob.b = Eigen::Map<VectorXd>(b_vals.data(), static_cast<Eigen::Index>(b_vals.size()));
  prob.G.resize(static_cast<int>(h_vals.size()), n);
  prob.G.setFromTriplets(g_trips.begin(), g_trips.end());
  prob.h = Eigen::Map<VectorXd>(h_vals.data(), static_cast<Eigen::Index>(h_vals.size()));
  prob.cones = cones;

  SolverSettings settings;
  settings.feastol = settings.abstol = settings.reltol = accuracy;

  const SocpSolution s = solve_socp(prob, settings);
  ConicSolution out;
  out.status = s.status;
  out.iterations = s.iterations;
  out.message = s.message;
  if (s.status == SolveStatus::optimal || s.status == SolveStatus::max_iter) {
    out.values = s.x;
    out.objective = prog.objective().value_at(s.x);
  }
  if (s.status == SolveStatus::numerical_error)
    throw solver_error("conic solve failed: " + s.message);
  return out;
}

}  // namespace isacee
