// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Sparse>
#include <string>

#include "isacee/conic.hpp"

namespace isacee {

/// Composite cone: nonnegative orthant block followed by second-order cones.
struct ConeSpec {
  int nonneg = 0;
  std::vector<int> soc_dims;
  int total() const {
    int t = nonneg;
    for (int d : soc_dims) t += d;
    return t;
  }
  /// Barrier degree (orthant coordinates + one per second-order cone).
  int degree() const { return nonneg + static_cast<int>(soc_dims.size()); }
};

/// minimize c'x  s.t.  Ax = b,  Gx + s = h,  s in K.
struct StdConeProblem {
  VectorXd c;
  Eigen::SparseMatrix<double> A;
  VectorXd b;
  Eigen::SparseMatrix<double> G;
  VectorXd h;
  ConeSpec cones;
};

struct SolverSettings {
  double feastol = 1e-8;
  double abstol = 1e-8;
  double reltol = 1e-8;
  int max_iter = 100;
  int refine_steps = 3;
  double static_reg = 1e-8;
  bool verbose = false;
};

enum class SolveStatus { optimal, primal_infeasible, dual_infeasible, max_iter, numerical_error };

const char* to_string(SolveStatus s);

struct SocpSolution {
  SolveStatus status = SolveStatus::numerical_error;
  VectorXd x, y, z, s;
  double pobj = 0.0;
  double dobj = 0.0;
  double gap = 0.0;
  double pres = 0.0;
  double dres = 0.0;
  int iterations = 0;
  std::string message;
};

/// Homogeneous self-dual primal-dual interior-point method with Nesterov-Todd
/// scaling and a Mehrotra predictor-corrector. The KKT system is solved by a
/// sparse LDL^T factorization with static regularization and iterative
/// refinement; problem data is Ruiz-equilibrated first.
SocpSolution solve_socp(const StdConeProblem& prob, const SolverSettings& settings = {});

/// Assignment of the ConicProgram's variable catalog at the solver optimum.
struct ConicSolution {
  SolveStatus status = SolveStatus::numerical_error;
  VectorXd values;       // per catalog variable
  double objective = 0.0;  // of the maximization form
  int iterations = 0;
  std::string message;
};

/// Translates the named program to standard form and solves it: max violation of
/// the returned assignment is within `accuracy`, or an infeasibility status is
/// reported. Throws solver_error on numerical failure.
ConicSolution solve_conic(const ConicProgram& prog, double accuracy);

}  // namespace isacee
