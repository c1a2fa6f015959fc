// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>

#include "isacee/conic.hpp"
#include "isacee/expansion.hpp"

namespace isacee {

struct BuildOptions {
  double tau = 0.0;            // Dinkelbach ratio of the current iteration
  bool equal_gamma = false;    // one shared communication fraction per subcarrier
  bool fix_half_split = false; // pin gamma = eta = 0.5 (xi-only optimization)
};

/// The emitted conic program plus everything needed to map between catalog
/// variables and allocations, audit tangency, and evaluate the surrogate
/// objective pieces at arbitrary allocations.
class BuiltProgram {
 public:
  ConicProgram prog;

  int k_users = 0;
  int q_subcarriers = 0;
  bool equal_gamma = false;
  bool feasibility = false;

  // catalog index maps (xi/eta are k + q*K; gamma likewise, or per q when shared)
  std::vector<int> xi, gamma_idx, eta;
  int ax = -1, ay = -1, az = -1;
  int ix_re = -1, ix_im = -1, iy_re = -1, iy_im = -1, iz_re = -1, iz_im = -1;
  int bx = -1, by = -1, bz = -1;
  std::vector<int> cx, cy, cz;
  // extras
  std::vector<int> w_xi, w_gamma, w_eta;  // epigraphs of the squares
  std::vector<int> s_gamma, s_eta;        // hypographs of the square roots
  std::vector<int> u_rate, v_rate;
  int t_epi = -1;

  // surrogate objective split: objective = numerator - tau * power (main program)
  LinExpr numerator;
  LinExpr power;

  bool has_rate_lb = false, has_rate_ub = false, has_crb = false;

  int gamma_index(int k, int q) const {
    return equal_gamma ? gamma_idx[q] : gamma_idx[k + q * k_users];
  }
  int sq_gamma_index(int k, int q) const {
    return equal_gamma ? w_gamma[q] : w_gamma[k + q * k_users];
  }
  int sqrt_gamma_index(int k, int q) const {
    return equal_gamma ? s_gamma[q] : s_gamma[k + q * k_users];
  }

  /// Allocation from a solver assignment: tiny negatives clipped, split
  /// renormalized to gamma + eta = 1 exactly.
  PowerAllocation extract_allocation(const VectorXd& values) const;

  /// Catalog assignment with all auxiliaries at their tight values for the
  /// given allocation; realizes the surrogate functions exactly.
  VectorXd tight_assignment(const PowerAllocation& alloc) const;

  /// Surrogate evaluations at an allocation (through tight_assignment).
  double objective_at(const PowerAllocation& alloc) const;
  double numerator_at(const PowerAllocation& alloc) const;
  double power_at(const PowerAllocation& alloc) const;
  /// Per-user concave SE lower bound value.
  VectorXd se_lower_bound_at(const PowerAllocation& alloc) const;
  /// Transmit-power convex upper bound value.
  double ptx_upper_bound_at(const PowerAllocation& alloc) const;

 private:
  friend class ProgramAssembler;
  struct AuditData;
  std::shared_ptr<AuditData> audit_;
  std::vector<LinExpr> se_lb_exprs_;  // per user
  LinExpr ptx_ub_expr_;
};

/// The approximate convex program of one SCA iteration: surrogate objective
/// (SE lower bound + weighted CRB-inverse lower bounds − tau · power upper
/// bound) with the full cone-constraint family.
BuiltProgram build_main_program(const ExpansionPoint& point, const ChannelSet& ch,
                                const SensingGeometry& geo, const SystemConfig& cfg,
                                const BuildOptions& opts = {});

/// The initialization program: max-min of the normalized rate/CRB residuals
/// under the power cap and the shared cone machinery.
BuiltProgram build_feasibility_program(const ExpansionPoint& point, const ChannelSet& ch,
                                       const SensingGeometry& geo, const SystemConfig& cfg,
                                       const BuildOptions& opts = {});

}  // namespace isacee
