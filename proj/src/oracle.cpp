// SPDX-License-Identifier: Apache-2.0
#include "isacee/oracle.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "isacee/bounds.hpp"

namespace isacee {

VectorXd direct_se(const PowerAllocation& alloc, const ChannelSet& ch, const SensingGeometry& geo,
                   const SystemConfig& cfg) {
  const int K = alloc.k_users();
  const int Q = alloc.q_subcarriers();
  VectorXd se = VectorXd::Zero(K);
  for (int q = 0; q < Q; ++q) {
    std::vector<VectorXcd> f(K);
    for (int i = 0; i < K; ++i) f[i] = dual_precoder_column(i, q, alloc, ch, geo);
    for (int k = 0; k < K; ++k) {
      const auto hk = ch.h[q].col(k);
      const double num = alloc.xi(k, q) * std::norm((hk.adjoint() * f[k])(0));
      double den = cfg.sigma_c_sq;
      for (int j = 0; j < K; ++j)
        if (j != k) den += alloc.xi(j, q) * std::norm((hk.adjoint() * f[j])(0));
      se(k) += std::log2(1.0 + num / den);
    }
  }
  return se;
}

std::vector<MatrixXcd> analytic_covariance(const PowerAllocation& alloc, const ChannelSet& ch,
                                           const SensingGeometry& geo) {
  const int Q = alloc.q_subcarriers();
  const int Nt = geo.nt;
  std::vector<MatrixXcd> rx(Q);
  for (int q = 0; q < Q; ++q) {
    const double pc = (alloc.xi.col(q) * ch.bar_d_beta.array() * alloc.gamma.col(q)).sum();
    const double ps = (alloc.xi.col(q) * alloc.eta.col(q)).sum();
    rx[q] = (pc * MatrixXcd::Identity(Nt, Nt) +
             ps * geo.a_tx[q] * geo.a_tx[q].adjoint()) / static_cast<double>(Nt);
  }
  return rx;
}

CrbPair numeric_fim(const PowerAllocation& alloc, const ChannelSet& ch, const SensingGeometry& geo,
                    const SystemConfig& cfg) {
  const int Q = alloc.q_subcarriers();
  const double kappa = 2.0 * cfg.frame_len / cfg.sigma_s_sq;
  const double a2 = std::norm(cfg.alpha_refl);
  const cplx ac = std::conj(cfg.alpha_refl);
  const auto rx = analytic_covariance(alloc, ch, geo);

  double tau_tt = 0.0, tau_tp = 0.0, tau_pp = 0.0, t_aa = 0.0;
  Eigen::Vector2d t_pa = Eigen::Vector2d::Zero();
  for (int q = 0; q < Q; ++q) {
    const MatrixXcd& G = geo.g[q];
    const MatrixXcd& Gt = geo.dg_theta[q];
    const MatrixXcd& Gp = geo.dg_phi[q];
    tau_tt += kappa * a2 * (Gt * rx[q] * Gt.adjoint()).trace().real();
    tau_tp += kappa * a2 * (Gp * rx[q] * Gt.adjoint()).trace().real();
    tau_pp += kappa * a2 * (Gp * rx[q] * Gp.adjoint()).trace().real();
    const cplx tp = ac * (G * rx[q] * Gp.adjoint()).trace();
    t_pa += kappa * Eigen::Vector2d(tp.real(), -tp.imag());
    t_aa += kappa * (G * rx[q] * G.adjoint()).trace().real();
  }

  if (t_aa <= 0) throw degenerate_fim_error("numeric_fim: nonpositive T_aa", t_aa);
  Eigen::Matrix2d fim;
  fim << tau_tt, tau_tp, tau_tp, tau_pp - t_pa.squaredNorm() / t_aa;
  const double det = fim.determinant();
  if (fim(0, 0) <= 0 || fim(1, 1) <= 0 || det <= 0)
    throw degenerate_fim_error("numeric_fim: singular equivalent FIM", det);
  return {fim(1, 1) / det, fim(0, 0) / det};
}

namespace {

MatrixXcd gaussian_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  MatrixXcd m(rows, cols);
  const double s = 1.0 / std::sqrt(2.0);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = cplx(gauss(rng) * s, gauss(rng) * s);
  return m;
}

// One fading draw of the dual-function precoder F[q] = alpha_zf H^dagger D_gamma + v eta_bar^T.
MatrixXcd draw_precoder(int q, const PowerAllocation& alloc, const VectorXd& beta,
                        const SensingGeometry& geo, std::mt19937_64& rng) {
  const int Nt = geo.nt;
  const int K = static_cast<int>(beta.size());
  MatrixXcd H = gaussian_matrix(Nt, K, rng);
  for (int k = 0; k < K; ++k) H.col(k) *= std::sqrt(beta(k));
  const MatrixXcd gram = H.adjoint() * H;
  const MatrixXcd pinv = H * gram.ldlt().solve(MatrixXcd::Identity(K, K));
  const double azf = std::sqrt(K * (Nt - K) / (1.0 / beta.array()).sum());

  MatrixXcd F = azf * pinv;
  for (int k = 0; k < K; ++k) F.col(k) *= std::sqrt(alloc.gamma(k, q));
  const VectorXcd v = geo.a_tx[q] / std::sqrt(static_cast<double>(Nt));
  for (int k = 0; k < K; ++k) F.col(k) += std::sqrt(alloc.eta(k, q)) * v;
  return F;
}

}  // namespace

std::vector<MatrixXcd> mc_covariance(const PowerAllocation& alloc, const VectorXd& beta,
                                     const SensingGeometry& geo, const SystemConfig& cfg,
                                     long n_samples, std::mt19937_64& rng) {
  if (n_samples < 1) throw std::invalid_argument("mc_covariance: n_samples must be >= 1");
  const int Q = alloc.q_subcarriers();
  const int K = alloc.k_users();
  const int L = cfg.frame_len;
  std::vector<MatrixXcd> acc(Q, MatrixXcd::Zero(geo.nt, geo.nt));
  VectorXd sqrt_xi(K);
  for (int q = 0; q < Q; ++q) {
    for (long s = 0; s < n_samples; ++s) {
      const MatrixXcd F = draw_precoder(q, alloc, beta, geo, rng);
      MatrixXcd FD = F;
      for (int k = 0; k < K; ++k) FD.col(k) *= std::sqrt(alloc.xi(k, q));
      const MatrixXcd X = FD * gaussian_matrix(K, L, rng);
      acc[q] += X * X.adjoint() / static_cast<double>(L);
    }
    acc[q] /= static_cast<double>(n_samples);
  }
  return acc;
}

double mc_transmit_power(const PowerAllocation& alloc, const VectorXd& beta,
                         const SensingGeometry& geo, const SystemConfig& cfg, long n_samples,
                         std::mt19937_64& rng) {
  if (n_samples < 1) throw std::invalid_argument("mc_transmit_power: n_samples must be >= 1");
  (void)cfg;
  const int Q = alloc.q_subcarriers();
  const int K = alloc.k_users();
  double total = 0.0;
  for (long s = 0; s < n_samples; ++s) {
    double p = 0.0;
    for (int q = 0; q < Q; ++q) {
      const MatrixXcd F = draw_precoder(q, alloc, beta, geo, rng);
      for (int k = 0; k < K; ++k) p += alloc.xi(k, q) * F.col(k).squaredNorm();
    }
    total += p;
  }
  return total / static_cast<double>(n_samples);
}

GridSearchResult grid_search(const SystemConfig& cfg, const ChannelSet& ch,
                             const SensingGeometry& geo, const GridSpec& grid) {
  if (grid.xi_levels.empty() || grid.gamma_levels.empty())
    throw std::invalid_argument("grid_search: empty level lists");
  const int K = cfg.k_users;
  const int Q = cfg.q_subcarriers;
  const int slots = K * Q;
  const long per_slot = static_cast<long>(grid.xi_levels.size() * grid.gamma_levels.size());

  GridSearchResult result;
  PowerAllocation alloc(K, Q);
  std::vector<long> idx(slots, 0);
  bool done = false;
  while (!done) {
    for (int s = 0; s < slots; ++s) {
      const int k = s % K;
      const int q = s / K;
      const long xi_i = idx[s] % static_cast<long>(grid.xi_levels.size());
      const long ga_i = idx[s] / static_cast<long>(grid.xi_levels.size());
      alloc.xi(k, q) = grid.xi_levels[xi_i];
      alloc.gamma(k, q) = grid.gamma_levels[ga_i];
      alloc.eta(k, q) = 1.0 - grid.gamma_levels[ga_i];
    }
    ++result.evaluated;
    try {
      const MetricsReport rep = evaluate(alloc, ch, geo, cfg);
      if (rep.feasible()) {
        ++result.feasible_count;
        if (!result.found || rep.objective > result.objective) {
          result.found = true;
          result.objective = rep.objective;
          result.best = alloc;
        }
      }
    } catch (const degenerate_fim_error&) {
      // zero-information corner of the grid; skip
    }

    // odometer increment
    int s = 0;
    for (; s < slots; ++s) {
      if (++idx[s] < per_slot) break;
      idx[s] = 0;
    }
    done = (s == slots);
  }
  return result;
}

OracleTolerances load_tolerances(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("tolerances: cannot open " + path);
  OracleTolerances tol;
  std::string line;
  while (std::getline(in, line)) {
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream iss(line);
    std::string key;
    if (!(iss >> key)) continue;
    std::string eq;
    double value;
    if (!(iss >> eq >> value) || eq != "=")
      throw std::invalid_argument("tolerances: bad line: " + line);
    if (key == "se_identity") tol.se_identity = value;
    else if (key == "crb_identity") tol.crb_identity = value;
    else if (key == "crb_homogeneity") tol.crb_homogeneity = value;
    else if (key == "mc_relative") tol.mc_relative = value;
    else if (key == "bound_slack") tol.bound_slack = value;
    else if (key == "mc_samples") tol.mc_samples = static_cast<long>(value);
    else if (key == "identity_instances") tol.identity_instances = static_cast<int>(value);
    else throw std::invalid_argument("tolerances: unknown key " + key);
  }
  return tol;
}

namespace {

PowerAllocation random_allocation(int K, int Q, double xi_hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  PowerAllocation a(K, Q);
  for (int q = 0; q < Q; ++q)
    for (int k = 0; k < K; ++k) {
      a.xi(k, q) = 0.05 * xi_hi + 0.95 * xi_hi * u01(rng);
      a.gamma(k, q) = 0.05 + 0.9 * u01(rng);
      a.eta(k, q) = 1.0 - a.gamma(k, q);
    }
  return a;
}

struct InstanceShape {
  int k, q, n_th, n_tv;
};

}  // namespace

std::vector<OracleReport> run_validation_suite(const SystemConfig& base,
                                               const OracleTolerances& tol) {
  std::vector<OracleReport> out;

  // Exact identities over seeded small instances (K<=4, Q<=4, Nt<=16).
  const InstanceShape shapes[] = {{2, 2, 3, 3}, {3, 4, 3, 3}, {4, 2, 4, 4}, {1, 3, 4, 2}};
  double worst_se = 0.0, worst_crb = 0.0, worst_hom = 0.0;
  for (int i = 0; i < tol.identity_instances; ++i) {
    const auto& sh = shapes[i % 4];
    SystemConfig cfg = base;
    cfg.k_users = sh.k;
    cfg.q_subcarriers = sh.q;
    cfg.n_th = sh.n_th;
    cfg.n_tv = sh.n_tv;
    cfg.n_rh = sh.n_th;
    cfg.n_rv = sh.n_tv;
    cfg.user_positions.clear();
    cfg.validate();
    std::mt19937_64 rng(derive_seed(base.rng_seed, 1000 + i));
    const auto geo = build_geometry(cfg);
    const auto ch = gen_channels(cfg, rng);
    const auto alloc = random_allocation(cfg.k_users, cfg.q_subcarriers,
                                         cfg.p_max / (cfg.k_users * cfg.q_subcarriers), rng);

    const VectorXd se_cf = se_per_user(alloc, ch, geo, cfg);
    const VectorXd se_or = direct_se(alloc, ch, geo, cfg);
    for (int k = 0; k < cfg.k_users; ++k)
      worst_se = std::max(worst_se, rel_error(se_cf(k), se_or(k)));

    const CrbPair cf = crb(fim_elements(alloc, ch, geo, cfg));
    const CrbPair orc = numeric_fim(alloc, ch, geo, cfg);
    worst_crb = std::max({worst_crb, rel_error(cf.theta, orc.theta), rel_error(cf.phi, orc.phi)});

    for (double c : {0.1, 10.0}) {
      PowerAllocation scaled = alloc;
      scaled.xi *= c;
      const CrbPair sc = crb(fim_elements(scaled, ch, geo, cfg));
      worst_hom = std::max({worst_hom, rel_error(sc.theta, cf.theta / c),
                            rel_error(sc.phi, cf.phi / c)});
    }
  }
  out.push_back(make_report("se_closed_form_vs_direct", 0.0, worst_se, tol.se_identity));
  out.back().relative_error = worst_se;
  out.back().pass = worst_se <= tol.se_identity;
  out.push_back(make_report("crb_closed_form_vs_numeric_fim", 0.0, worst_crb, tol.crb_identity));
  out.back().relative_error = worst_crb;
  out.back().pass = worst_crb <= tol.crb_identity;
  out.push_back(make_report("crb_power_homogeneity", 0.0, worst_hom, tol.crb_homogeneity));
  out.back().relative_error = worst_hom;
  out.back().pass = worst_hom <= tol.crb_homogeneity;

  // Monte-Carlo checks at Nt=16, K=4, Q=2.
  {
    SystemConfig cfg = base;
    cfg.k_users = 4;
    cfg.q_subcarriers = 2;
    cfg.n_th = cfg.n_tv = cfg.n_rh = cfg.n_rv = 4;
    cfg.user_positions.clear();
    cfg.validate();
    std::mt19937_64 rng(derive_seed(base.rng_seed, 7));
    const auto geo = build_geometry(cfg);
    const auto ch = gen_channels(cfg, rng);
    const auto alloc = random_allocation(cfg.k_users, cfg.q_subcarriers,
                                         cfg.p_max / (cfg.k_users * cfg.q_subcarriers), rng);

    const double p_cf = transmit_power(alloc, ch);
    const double p_mc = mc_transmit_power(alloc, ch.beta, geo, cfg, tol.mc_samples, rng);
    out.push_back(make_report("transmit_power_vs_monte_carlo", p_cf, p_mc, tol.mc_relative,
                              tol.mc_samples));

    const auto rx_cf = analytic_covariance(alloc, ch, geo);
    const auto rx_mc = mc_covariance(alloc, ch.beta, geo, cfg, tol.mc_samples, rng);
    double worst_frob = 0.0;
    for (size_t q = 0; q < rx_cf.size(); ++q)
      worst_frob = std::max(worst_frob, (rx_cf[q] - rx_mc[q]).norm() / rx_cf[q].norm());
    OracleReport r;
    r.quantity = "waveform_covariance_vs_monte_carlo";
    r.closed_form = 0.0;
    r.oracle = worst_frob;
    r.relative_error = worst_frob;
    r.samples = tol.mc_samples;
    r.tolerance = tol.mc_relative;
    r.pass = worst_frob <= tol.mc_relative;
    out.push_back(r);
  }

  // Product-bound sandwich and tangency sampling.
  {
    std::mt19937_64 rng(derive_seed(base.rng_seed, 8));
    std::uniform_real_distribution<double> pos(0.05, 4.0);
    long violations = 0;
    double worst_tangency = 0.0;
    const long n = 100000;
    for (long i = 0; i < n; ++i) {
      const double x = pos(rng), y = pos(rng), t = pos(rng);
      const double xr = pos(rng), yr = pos(rng), tr = pos(rng);
      if (bilinear_lower(x, y, xr, yr) > x * y + tol.bound_slack) ++violations;
      if (bilinear_upper(x, y, xr, yr) < x * y - tol.bound_slack) ++violations;
      const double f = t * std::sqrt(x * y);
      if (triple_lower(t, x, y, tr, xr, yr) > f + tol.bound_slack) ++violations;
      if (triple_upper(t, x, y, tr, xr, yr) < f - tol.bound_slack) ++violations;
      worst_tangency = std::max({worst_tangency,
                                 std::abs(bilinear_lower(xr, yr, xr, yr) - xr * yr),
                                 std::abs(bilinear_upper(xr, yr, xr, yr) - xr * yr),
                                 std::abs(triple_lower(tr, xr, yr, tr, xr, yr) - tr * std::sqrt(xr * yr)),
                                 std::abs(triple_upper(tr, xr, yr, tr, xr, yr) - tr * std::sqrt(xr * yr))});
    }
    OracleReport r;
    r.quantity = "product_bound_sandwich_violations";
    r.closed_form = 0.0;
    r.oracle = static_cast<double>(violations);
    r.relative_error = static_cast<double>(violations);
    r.samples = n;
    r.tolerance = 0.0;
    r.pass = violations == 0 && worst_tangency <= 1e-10;
    out.push_back(r);
  }

  return out;
}

}  // namespace isacee
