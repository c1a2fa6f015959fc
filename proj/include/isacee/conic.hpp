// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "isacee/common.hpp"

namespace isacee {

/// Sparse affine expression over the program's variable catalog.
struct LinExpr {
  std::vector<std::pair<int, double>> terms;  // (variable index, coefficient)
  double constant = 0.0;

  LinExpr() = default;
  explicit LinExpr(double c) : constant(c) {}

  void add(int var, double coef) {
    if (coef != 0.0) terms.emplace_back(var, coef);
  }
  void add(const LinExpr& e, double scale = 1.0) {
    if (scale == 0.0) return;
    constant += scale * e.constant;
    for (const auto& [v, c] : e.terms) terms.emplace_back(v, scale * c);
  }
  /// Merge duplicate variable entries.
  void compact();
  double value_at(const VectorXd& x) const;

  LinExpr& operator+=(const LinExpr& e) { add(e); return *this; }
  LinExpr& operator*=(double s);
};

inline LinExpr var_expr(int v, double coef = 1.0) {
  LinExpr e;
  e.add(v, coef);
  return e;
}

/// Standard-form conic optimization problem over named scalar variables:
/// maximize a linear objective subject to linear equalities, scalar
/// inequalities (expr >= 0) and second-order cones ||u|| <= t with affine
/// entries. Constraints carry functional tags; `cited` marks members of the
/// published constraint families (the rest is epigraph plumbing).
class ConicProgram {
 public:
  struct Equality {
    LinExpr lhs_minus_rhs;  // == 0
    std::string tag;
    bool cited = false;
  };
  struct Inequality {
    LinExpr expr;  // >= 0
    std::string tag;
    bool cited = false;
  };
  struct Cone {
    std::vector<LinExpr> entries;  // [t, u_1 .. u_m]: ||u|| <= t
    std::string tag;
    bool cited = false;
  };

  int add_variable(const std::string& name, bool core);
  int variable_count() const { return static_cast<int>(names_.size()); }
  int core_variable_count() const { return core_count_; }
  const std::string& variable_name(int v) const { return names_[v]; }

  void set_objective(LinExpr maximize) { objective_ = std::move(maximize); objective_.compact(); }
  const LinExpr& objective() const { return objective_; }

  void add_equality(LinExpr e, std::string tag, bool cited);
  void add_inequality(LinExpr e, std::string tag, bool cited);
  void add_cone(std::vector<LinExpr> entries, std::string tag, bool cited);

  const std::vector<Equality>& equalities() const { return equalities_; }
  const std::vector<Inequality>& inequalities() const { return inequalities_; }
  const std::vector<Cone>& cones() const { return cones_; }

  int cited_constraint_count() const;
  int constraint_count() const {
    return static_cast<int>(equalities_.size() + inequalities_.size() + cones_.size());
  }

  /// Human-readable listing of variables and tagged constraints.
  void dump(std::ostream& os) const;

  /// Residual diagnostics at a candidate assignment (max violation across all
  /// constraint kinds); used by audits.
  double max_violation(const VectorXd& x) const;

 private:
  std::vector<std::string> names_;
  int core_count_ = 0;
  LinExpr objective_;
  std::vector<Equality> equalities_;
  std::vector<Inequality> inequalities_;
  std::vector<Cone> cones_;
};

}  // namespace isacee
