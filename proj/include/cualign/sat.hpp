#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "cualign/cudf.hpp"
#include "cualign/program.hpp"

namespace cualign {

// DIMACS-style literal: +(handle + 1) for the variable being true, negative
// for false. Handles are shared with the LinearProgram registry, so the WCNF
// numbering lines up with the LP sidecar name map.
using Lit = std::int32_t;

inline Lit pos(VarId v) { return v + 1; }
inline Lit neg(VarId v) { return -(v + 1); }
inline VarId lit_var(Lit l) { return (l > 0 ? l : -l) - 1; }

// Non-empty, sorted, no duplicate or complementary literals.
using Clause = std::vector<Lit>;

struct SoftUnit {
  std::int64_t weight;
  Lit lit;
};

struct WeightedFormula {
  std::vector<Clause> hard;
  std::vector<SoftUnit> soft;

  // Hard-clause weight; strictly larger than the sum of soft weights.
  std::int64_t top() const;
  void add_hard(Clause c);
  void add_soft(std::int64_t weight, Lit lit);
};

// Clausal translation of the base installability constraints over package
// variables only: depends, conflicts, and the request. Models restricted to
// package variables are exactly the feasible installations of encode_base.
void clausify_base(LinearProgram& lp, const Universe& u, const Request& req, WeightedFormula& f);

// Dominance encoding of the packages criterion: hard (¬p ∨ ¬q ∨ nu_p) per
// same-source cross-version witness q, soft (¬nu_p) with weight 1.
void clausify_unaligned_packages(LinearProgram& lp, const Universe& u,
                                 const SourceClusterIndex& idx,
                                 const std::set<std::string>& sources, WeightedFormula& f);

// Dominance encoding of the pairs criterion: hard (¬p_i ∨ ¬p_j ∨ u_ij) per
// cross-version pair taken once, soft (¬u_ij) with weight 1.
void clausify_unaligned_pairs(LinearProgram& lp, const Universe& u, const SourceClusterIndex& idx,
                              const std::set<std::string>& sources, WeightedFormula& f);

// Weighted CNF text: `p wcnf <vars> <clauses> <top>`, hard clauses prefixed
// by top, soft units by their weight.
std::string emit_wcnf(const WeightedFormula& f, std::size_t var_count);

}  // namespace cualign
