#pragma once

#include <set>
#include <string>

#include "cualign/criteria.hpp"
#include "cualign/cudf.hpp"
#include "cualign/program.hpp"

namespace cualign {

// Variable tags used by all encoders. The dense handles behind the tags are
// shared between the LP/OPB output and the WCNF output.
std::string pkg_tag(const Package& p);
std::string installed_version_tag(const std::string& source, const std::string& token);

// Base installability constraints: one 0-1 variable per package, dependency
// and conflict rows, and the request (install / remove / upgrade) rows.
// Install or upgrade atoms matching no package throw EncodeError.
LinearProgram encode_base(const Universe& u, const Request& req);

// i_{s,v} variables for the given sources: i is 1 exactly when some package of
// source version (s, v) is installed. Idempotent per source.
void encode_installed_version_vars(LinearProgram& lp, const Universe& u,
                                   const SourceClusterIndex& idx,
                                   const std::set<std::string>& sources);

// The four alignment criterion blocks. Each adds its constraints over the
// given sources and appends one objective level. `sources` is expected to be
// the reduced source set (more than one available source version), optionally
// intersected with a cluster restriction.
void encode_unaligned_packages(LinearProgram& lp, const Universe& u,
                               const SourceClusterIndex& idx,
                               const std::set<std::string>& sources);
void encode_unaligned_pairs(LinearProgram& lp, const Universe& u, const SourceClusterIndex& idx,
                            const std::set<std::string>& sources);
void encode_version_changes(LinearProgram& lp, const Universe& u, const SourceClusterIndex& idx,
                            const std::set<std::string>& sources);
void encode_unaligned_clusters(LinearProgram& lp, const Universe& u, const SourceClusterIndex& idx,
                               const std::set<std::string>& sources);

// One indicator variable per counted unit of a classic criterion, constrained
// from both sides so its value is forced at every feasible point.
void encode_classic_criterion(LinearProgram& lp, Criterion kind, const Universe& u,
                              const Installation& initial);

// Base constraints plus one constraint/objective block per criterion, in spec
// order. Alignment blocks cover reduced sources intersected with the item's
// restriction (falling back to `global` when the item has none).
LinearProgram assemble(const Universe& u, const Request& req, const CriterionSpec& spec,
                       const ClusterRestriction& global = {});

enum class LpObjectivePolicy {
  FirstObjective,
  // Single weighted objective sum_k W_k * obj_k with W_k = prod_{j>k} (UB_j + 1).
  WeightedLexMerge,
};

// CPLEX LP text. Variables are named x<handle>; see emit_name_map.
std::string emit_lp(const LinearProgram& lp,
                    LpObjectivePolicy policy = LpObjectivePolicy::FirstObjective);

// OPB (pseudo-Boolean competition) text. Integer bookkeeping variables are
// substituted by their defining sums; the remaining 0-1 variables are
// renumbered densely as x1..xN (the mapping is included as comment lines).
std::string emit_opb(const LinearProgram& lp,
                     LpObjectivePolicy policy = LpObjectivePolicy::FirstObjective);

// Sidecar map, one `handle<TAB>tag` line per variable.
std::string emit_name_map(const LinearProgram& lp);

}  // namespace cualign
