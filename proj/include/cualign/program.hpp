#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cualign/criteria.hpp"
#include "cualign/cudf.hpp"

namespace cualign {

// Dense handle into a LinearProgram's variable table. Handles are allocated
// in encoding order, which is deterministic for identical inputs.
using VarId = std::int32_t;

enum class VarKind {
  Package,           // p_j: package (name, version) is installed
  InstalledVersion,  // i_{s,v}: some package of source version (s, v) is installed
  UnalignedPackage,  // nu_{p_j}: p_j is installed and not aligned
  UnalignedPair,     // u_{p_j,p_k}: both packages of a cross-version pair are installed
  InstalledCount,    // nb_{inst,s}: number of installed source versions of s (integer)
  AnyInstalled,      // delta_s: 1 iff nb_{inst,s} >= 1
  VersionChanges,    // nc_s = nb_{inst,s} - delta_s (integer)
  UnalignedCluster,  // u_s: 1 iff nb_{inst,s} >= 2
  CriterionAux,      // indicator for one counted unit of a classic criterion
};

struct VarInfo {
  VarKind kind;
  std::string tag;  // stable textual identity, e.g. "pkg/a/1" or "i/src/1.2-3"
  std::int64_t lower = 0;
  std::int64_t upper = 1;
  // Cross references into the universe: the package id for Package/
  // UnalignedPackage vars, the pair for UnalignedPair vars. -1 when unused.
  std::int32_t ref0 = -1;
  std::int32_t ref1 = -1;

  bool is_binary() const { return lower >= 0 && upper <= 1; }
};

struct LinearTerm {
  std::int64_t coef;
  VarId var;

  bool operator==(const LinearTerm&) const = default;
};

using LinearExpr = std::vector<LinearTerm>;

enum class Cmp { Le, Ge, Eq };

struct LinearConstraint {
  LinearExpr terms;  // merged: no duplicate var, no zero coefficient
  Cmp rel = Cmp::Ge;
  std::int64_t rhs = 0;
};

struct Objective {
  Criterion label;
  LinearExpr terms;
};

class EncodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// 0-1/integer linear program: a variable table, hard constraints, an ordered
// objective stack, and defining equalities for the integer bookkeeping
// variables (used to eliminate them for OPB output and the built-in solver).
class LinearProgram {
 public:
  VarId add_var(VarKind kind, std::string tag, std::int64_t lower = 0, std::int64_t upper = 1,
                std::int32_t ref0 = -1, std::int32_t ref1 = -1);
  // Existing handle for the tag, or -1.
  VarId find_var(const std::string& tag) const;
  VarId require_var(const std::string& tag) const;

  // Fixes a variable by tightening its bounds.
  void fix_var(VarId v, std::int64_t value);

  // Merges duplicate terms and drops zero coefficients. Trivially true
  // constraints are dropped; trivially false ones throw EncodeError.
  void add_constraint(LinearExpr terms, Cmp rel, std::int64_t rhs);

  // Records `v == terms` as the defining equality of v. Emitted as a normal
  // equality row in LP output, used as a substitution everywhere else.
  void define_var(VarId v, LinearExpr terms);

  // Appends an objective level; returns its index.
  std::size_t add_objective(Criterion label, LinearExpr terms);

  const std::vector<VarInfo>& vars() const { return vars_; }
  const VarInfo& var(VarId v) const { return vars_[static_cast<std::size_t>(v)]; }
  std::size_t var_count() const { return vars_.size(); }
  const std::vector<LinearConstraint>& constraints() const { return constraints_; }
  const std::map<VarId, LinearExpr>& definitions() const { return definitions_; }
  const std::vector<Objective>& objectives() const { return objectives_; }

  // Rewrites an expression over defined variables into one over free
  // variables only (definitions may chain, e.g. nc -> nb -> i vars).
  LinearExpr substitute(const LinearExpr& terms) const;

  // Σ coef * bound(var): the largest value the expression can take.
  std::int64_t trivial_upper_bound(const LinearExpr& terms) const;

  // True the first time `key` is seen. Encoders use this to emit each
  // per-source constraint block once even when criteria share variables.
  bool mark_block(const std::string& key) { return blocks_.insert(key).second; }

 private:
  std::vector<VarInfo> vars_;
  std::map<std::string, VarId> by_tag_;
  std::vector<LinearConstraint> constraints_;
  std::map<VarId, LinearExpr> definitions_;
  std::vector<Objective> objectives_;
  std::set<std::string> blocks_;
};

// Canonicalizes an expression: merge duplicate vars, drop zeros, sort by var.
LinearExpr normalize_expr(LinearExpr terms);

// Human-readable rendering using variable tags (test and debugging aid).
std::string render_expr(const LinearProgram& lp, const LinearExpr& terms);
std::string render_constraint(const LinearProgram& lp, const LinearConstraint& c);

}  // namespace cualign
