#include "cualign/program.hpp"

#include <algorithm>
#include <stdexcept>

namespace cualign {

LinearExpr normalize_expr(LinearExpr terms) {
  std::sort(terms.begin(), terms.end(),
            [](const LinearTerm& a, const LinearTerm& b) { return a.var < b.var; });
  LinearExpr out;
  for (const LinearTerm& t : terms) {
    if (!out.empty() && out.back().var == t.var)
      out.back().coef += t.coef;
    else
      out.push_back(t);
  }
  out.erase(std::remove_if(out.begin(), out.end(), [](const LinearTerm& t) { return t.coef == 0; }),
            out.end());
  return out;
}

VarId LinearProgram::add_var(VarKind kind, std::string tag, std::int64_t lower, std::int64_t upper,
                             std::int32_t ref0, std::int32_t ref1) {
  auto it = by_tag_.find(tag);
  if (it != by_tag_.end()) return it->second;
  VarId id = static_cast<VarId>(vars_.size());
  by_tag_.emplace(tag, id);
  vars_.push_back(VarInfo{kind, std::move(tag), lower, upper, ref0, ref1});
  return id;
}

VarId LinearProgram::find_var(const std::string& tag) const {
  auto it = by_tag_.find(tag);
  return it == by_tag_.end() ? -1 : it->second;
}

VarId LinearProgram::require_var(const std::string& tag) const {
  VarId v = find_var(tag);
  if (v < 0) throw std::logic_error("undeclared variable: " + tag);
  return v;
}

void LinearProgram::fix_var(VarId v, std::int64_t value) {
  VarInfo& info = vars_[static_cast<std::size_t>(v)];
  if (value < info.lower || value > info.upper)
    throw EncodeError("infeasible fix of " + info.tag + " to " + std::to_string(value));
  info.lower = info.upper = value;
}

void LinearProgram::add_constraint(LinearExpr terms, Cmp rel, std::int64_t rhs) {
  LinearExpr merged = normalize_expr(std::move(terms));
  if (merged.empty()) {
    bool ok = (rel == Cmp::Le && 0 <= rhs) || (rel == Cmp::Ge && 0 >= rhs) ||
              (rel == Cmp::Eq && rhs == 0);
    if (!ok) throw EncodeError("contradictory constant constraint");
    return;
  }
  constraints_.push_back(LinearConstraint{std::move(merged), rel, rhs});
}

void LinearProgram::define_var(VarId v, LinearExpr terms) {
  definitions_[v] = normalize_expr(std::move(terms));
}

std::size_t LinearProgram::add_objective(Criterion label, LinearExpr terms) {
  objectives_.push_back(Objective{label, normalize_expr(std::move(terms))});
  return objectives_.size() - 1;
}

LinearExpr LinearProgram::substitute(const LinearExpr& terms) const {
  LinearExpr out;
  for (const LinearTerm& t : terms) {
    auto it = definitions_.find(t.var);
    if (it == definitions_.end()) {
      out.push_back(t);
    } else {
      for (const LinearTerm& d : substitute(it->second))
        out.push_back(LinearTerm{t.coef * d.coef, d.var});
    }
  }
  return normalize_expr(std::move(out));
}

std::int64_t LinearProgram::trivial_upper_bound(const LinearExpr& terms) const {
  std::int64_t ub = 0;
  for (const LinearTerm& t : terms) {
    const VarInfo& v = var(t.var);
    ub += t.coef >= 0 ? t.coef * v.upper : t.coef * v.lower;
  }
  return ub;
}

std::string render_expr(const LinearProgram& lp, const LinearExpr& terms) {
  std::string out;
  for (const LinearTerm& t : terms) {
    if (!out.empty()) out += " ";
    out += (t.coef >= 0 ? "+" : "") + std::to_string(t.coef) + " " + lp.var(t.var).tag;
  }
  return out;
}

std::string render_constraint(const LinearProgram& lp, const LinearConstraint& c) {
  const char* rel = c.rel == Cmp::Le ? "<=" : c.rel == Cmp::Ge ? ">=" : "=";
  return render_expr(lp, c.terms) + " " + rel + " " + std::to_string(c.rhs);
}

}  // namespace cualign
