// SPDX-License-Identifier: Apache-2.0
#include "isacee/conic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

namespace isacee {

void LinExpr::compact() {
  std::sort(terms.begin(), terms.end());
  size_t w = 0;
  for (size_t i = 0; i < terms.size();) {
    int v = terms[i].first;
    double c = 0.0;
    while (i < terms.size() && terms[i].first == v) c += terms[i++].second;
    if (c != 0.0) terms[w++] = {v, c};
  }
  terms.resize(w);
}

double LinExpr::value_at(const VectorXd& x) const {
  double v = constant;
  for (const auto& [i, c] : terms) v += c * x(i);
  return v;
}

LinExpr& LinExpr::operator*=(double s) {
  constant *= s;
  for (auto& [v, c] : terms) c *= s;
  return *this;
}

int ConicProgram::add_variable(const std::string& name, bool core) {
  names_.push_back(name);
  if (core) ++core_count_;
  return static_cast<int>(names_.size()) - 1;
}

void ConicProgram::add_equality(LinExpr e, std::string tag, bool cited) {
  e.compact();
  equalities_.push_back({std::move(e), std::move(tag), cited});
}

void ConicProgram::add_inequality(LinExpr e, std::string tag, bool cited) {
  e.compact();
  inequalities_.push_back({std::move(e), std::move(tag), cited});
}

void ConicProgram::add_cone(std::vector<LinExpr> entries, std::string tag, bool cited) {
  if (entries.size() < 2) throw std::invalid_argument("cone needs at least [t; u1]");
  for (auto& e : entries) e.compact();
  cones_.push_back({std::move(entries), std::move(tag), cited});
}

int ConicProgram::cited_constraint_count() const {
  int n = 0;
  for (const auto& e : equalities_) n += e.cited;
  for (const auto& e : inequalities_) n += e.cited;
  for (const auto& c : cones_) n += c.cited;
  return n;
}

namespace {
void print_expr(std::ostream& os, const LinExpr& e, const std::vector<std::string>& names) {
  bool first = true;
  for (const auto& [v, c] : e.terms) {
    if (!first) os << (c >= 0 ? " + " : " - ");
    else if (c < 0) os << "-";
    first = false;
    os << std::abs(c) << "*" << names[v];
  }
  if (e.constant != 0.0 || first) {
    if (!first) os << (e.constant >= 0 ? " + " : " - ");
    os << std::abs(e.constant);
    if (first && e.constant < 0) os << " (negated)";
  }
}
}  // namespace

void ConicProgram::dump(std::ostream& os) const {
  os << "variables (" << names_.size() << ", core " << core_count_ << "):\n";
  for (size_t i = 0; i < names_.size(); ++i) os << "  [" << i << "] " << names_[i] << "\n";
  os << "maximize: ";
  print_expr(os, objective_, names_);
  os << "\n";
  for (const auto& c : equalities_) {
    os << (c.cited ? "eq  * " : "eq    ") << c.tag << ": ";
    print_expr(os, c.lhs_minus_rhs, names_);
    os << " == 0\n";
  }
  for (const auto& c : inequalities_) {
    os << (c.cited ? "ineq* " : "ineq  ") << c.tag << ": ";
    print_expr(os, c.expr, names_);
    os << " >= 0\n";
  }
  for (const auto& c : cones_) {
    os << (c.cited ? "soc * " : "soc   ") << c.tag << ": ||[";
    for (size_t i = 1; i < c.entries.size(); ++i) {
      if (i > 1) os << "; ";
      print_expr(os, c.entries[i], names_);
    }
    os << "]|| <= ";
    print_expr(os, c.entries[0], names_);
    os << "\n";
  }
}

double ConicProgram::max_violation(const VectorXd& x) const {
  double worst = 0.0;
  for (const auto& c : equalities_) worst = std::max(worst, std::abs(c.lhs_minus_rhs.value_at(x)));
  for (const auto& c : inequalities_) worst = std::max(worst, -c.expr.value_at(x));
  for (const auto& c : cones_) {
    double t = c.entries[0].value_at(x);
    double norm2 = 0.0;
    for (size_t i = 1; i < c.entries.size(); ++i) {
      const double u = c.entries[i].value_at(x);
      norm2 += u * u;
    }
    worst = std::max(worst, std::sqrt(norm2) - t);
  }
  return worst;
}

}  // namespace isacee
