#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>

#include "cualign/cudf.hpp"

namespace cualign {

using Count = std::int64_t;

enum class Criterion {
  Removed,
  New,
  Changed,
  NotUpToDate,
  UnsatRecommends,
  UnalignedPackages,
  UnalignedPairs,
  UnalignedVersionChanges,
  UnalignedClusters,
};

constexpr bool is_alignment_criterion(Criterion c) {
  return c == Criterion::UnalignedPackages || c == Criterion::UnalignedPairs ||
         c == Criterion::UnalignedVersionChanges || c == Criterion::UnalignedClusters;
}

std::string to_string(Criterion c);

// Restricts the alignment criteria to a subset of source clusters; absent
// means "all sources". Classic criteria ignore it.
using ClusterRestriction = std::optional<std::set<std::string>>;

inline bool cluster_selected(const ClusterRestriction& r, const std::string& source) {
  return !r || r->count(source) != 0;
}

class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One level of the lexicographic criteria stack. All criteria are minimized;
// a restriction is only meaningful on the unaligned_* kinds.
struct CriterionItem {
  Criterion kind;
  ClusterRestriction restriction;

  bool operator==(const CriterionItem&) const = default;
};

using CriterionSpec = std::vector<CriterionItem>;

struct MeasureReport {
  Count removed = 0;
  Count new_packages = 0;
  Count changed = 0;
  Count notuptodate = 0;
  Count unsat_recommends = 0;
  Count unaligned_packages = 0;
  Count unaligned_pairs = 0;
  Count unaligned_version_changes = 0;
  Count unaligned_clusters = 0;

  Count of(Criterion c) const;
  bool operator==(const MeasureReport&) const = default;
};

// The five classic criteria. `initial` is the installation the upgrade starts
// from, `sol` the candidate installation; both over the same universe.
Count removed_count(const Universe& u, const Installation& initial, const Installation& sol);
Count new_count(const Universe& u, const Installation& initial, const Installation& sol);
Count changed_count(const Universe& u, const Installation& initial, const Installation& sol);
// A name counts when it is installed but its most recent universe version is not.
Count notuptodate_count(const Universe& u, const Installation& sol);
// One unit per recommends clause of an installed package with no installed satisfier.
Count unsat_recommends_count(const Universe& u, const Installation& sol);

// The four alignment criteria.
Count unaligned_packages(const Universe& u, const Installation& sol, const SourceClusterIndex& idx,
                         const ClusterRestriction& r = {});
Count unaligned_pairs(const Universe& u, const Installation& sol, const SourceClusterIndex& idx,
                      const ClusterRestriction& r = {});
Count unaligned_version_changes(const Universe& u, const Installation& sol,
                                const SourceClusterIndex& idx, const ClusterRestriction& r = {});
Count unaligned_clusters(const Universe& u, const Installation& sol, const SourceClusterIndex& idx,
                         const ClusterRestriction& r = {});

// True iff every source has at most one installed source version.
bool is_aligned(const Universe& u, const Installation& sol, const SourceClusterIndex& idx);

MeasureReport measure_all(const Universe& u, const Installation& initial, const Installation& sol,
                          const SourceClusterIndex& idx, const ClusterRestriction& r = {});

}  // namespace cualign
