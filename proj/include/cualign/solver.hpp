#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cualign/criteria.hpp"
#include "cualign/cudf.hpp"
#include "cualign/program.hpp"

namespace cualign {

struct SolveBudget {
  std::int64_t max_nodes = 10'000'000;  // per objective level
  double max_seconds = 60.0;            // per objective level
};

enum class SolveStatus { Optimal, Infeasible, BudgetExceeded };

std::string to_string(SolveStatus s);

struct SolveResult {
  SolveStatus status = SolveStatus::Infeasible;
  // Value per VarId (defined variables evaluated through their definitions);
  // meaningful only when status == Optimal.
  std::vector<std::int64_t> assignment;
  std::optional<Installation> solution;
  std::vector<Count> objective_values;  // one entry per solved level
  std::vector<double> level_seconds;
  std::int64_t nodes = 0;
  double seconds = 0.0;
};

// Provably optimal 0-1 assignment for objective `level` subject to all hard
// constraints, by depth-first branch and bound with bounds propagation.
// Deterministic for identical inputs and node budgets.
SolveResult solve_single(const LinearProgram& lp, std::size_t level, const SolveBudget& budget = {});

// Sequentially optimizes each objective level, bounding earlier levels at
// their optima. The final assignment is lexicographically minimal.
SolveResult solve_lex(const LinearProgram& lp, const SolveBudget& budget = {});

// Ground-truth oracle: enumerates all package subsets, filters by direct
// semantic feasibility (no LP involved), and ranks feasible installations by
// their criteria_eval measures in spec order. Refuses universes larger than
// `cap` packages.
SolveResult brute_force(const Universe& u, const Request& req, const CriterionSpec& spec,
                        const ClusterRestriction& global = {}, std::size_t cap = 20);

// All violations of dependency, conflict, and request semantics by `s`;
// empty means the installation is a valid solution.
std::vector<std::string> verify(const Universe& u, const Request& req, const Installation& s);

}  // namespace cualign
