#include "cualign/criteria.hpp"

#include <algorithm>

namespace cualign {

namespace {

// Distinct installed source versions and installed package count of one
// cluster. The measures only depend on these two numbers per cluster, except
// for pairs which needs the per-version sizes.
struct ClusterStats {
  std::vector<Count> installed_per_version;  // over versions with >= 1 installed package
  Count installed_packages = 0;

  Count distinct_versions() const { return static_cast<Count>(installed_per_version.size()); }
};

ClusterStats cluster_stats(const SourceClusterIndex::VersionMap& versions,
                           const Installation& sol) {
  ClusterStats st;
  for (const auto& [token, pkgs] : versions) {
    Count n = 0;
    for (PackageId id : pkgs)
      if (sol.contains(id)) ++n;
    if (n > 0) {
      st.installed_per_version.push_back(n);
      st.installed_packages += n;
    }
  }
  return st;
}

template <typename Fn>
Count sum_over_clusters(const SourceClusterIndex& idx, const Installation& sol,
                        const ClusterRestriction& r, Fn per_cluster) {
  Count total = 0;
  for (const auto& [source, versions] : idx.sources()) {
    if (!cluster_selected(r, source)) continue;
    total += per_cluster(cluster_stats(versions, sol));
  }
  return total;
}

bool clause_satisfied(const Universe& u, const DependencyClause& clause, const Installation& s) {
  for (const VersionConstraint& atom : clause)
    for (PackageId id : expand_constraint(u, atom))
      if (s.contains(id)) return true;
  return false;
}

}  // namespace

std::string to_string(Criterion c) {
  switch (c) {
    case Criterion::Removed: return "removed";
    case Criterion::New: return "new";
    case Criterion::Changed: return "changed";
    case Criterion::NotUpToDate: return "notuptodate";
    case Criterion::UnsatRecommends: return "unsatrecommends";
    case Criterion::UnalignedPackages: return "unaligned(packages)";
    case Criterion::UnalignedPairs: return "unaligned(pairs)";
    case Criterion::UnalignedVersionChanges: return "unaligned(version_changes)";
    case Criterion::UnalignedClusters: return "unaligned(clusters)";
  }
  return "?";
}

Count MeasureReport::of(Criterion c) const {
  switch (c) {
    case Criterion::Removed: return removed;
    case Criterion::New: return new_packages;
    case Criterion::Changed: return changed;
    case Criterion::NotUpToDate: return notuptodate;
    case Criterion::UnsatRecommends: return unsat_recommends;
    case Criterion::UnalignedPackages: return unaligned_packages;
    case Criterion::UnalignedPairs: return unaligned_pairs;
    case Criterion::UnalignedVersionChanges: return unaligned_version_changes;
    case Criterion::UnalignedClusters: return unaligned_clusters;
  }
  return 0;
}

Count removed_count(const Universe& u, const Installation& initial, const Installation& sol) {
  Count n = 0;
  for (const auto& [name, versions] : u.names()) {
    bool in_initial = false, in_sol = false;
    for (const auto& [v, id] : versions) {
      in_initial = in_initial || initial.contains(id);
      in_sol = in_sol || sol.contains(id);
    }
    if (in_initial && !in_sol) ++n;
  }
  return n;
}

Count new_count(const Universe& u, const Installation& initial, const Installation& sol) {
  Count n = 0;
  for (const auto& [name, versions] : u.names()) {
    bool in_initial = false, in_sol = false;
    for (const auto& [v, id] : versions) {
      in_initial = in_initial || initial.contains(id);
      in_sol = in_sol || sol.contains(id);
    }
    if (!in_initial && in_sol) ++n;
  }
  return n;
}

Count changed_count(const Universe& u, const Installation& initial, const Installation& sol) {
  Count n = 0;
  for (const auto& [name, versions] : u.names()) {
    bool differ = false;
    for (const auto& [v, id] : versions)
      if (initial.contains(id) != sol.contains(id)) {
        differ = true;
        break;
      }
    if (differ) ++n;
  }
  return n;
}

Count notuptodate_count(const Universe& u, const Installation& sol) {
  Count n = 0;
  for (const auto& [name, versions] : u.names()) {
    bool any = false;
    for (const auto& [v, id] : versions) any = any || sol.contains(id);
    // versions is ordered, so rbegin() is the most recent available version.
    if (any && !sol.contains(versions.rbegin()->second)) ++n;
  }
  return n;
}

Count unsat_recommends_count(const Universe& u, const Installation& sol) {
  Count n = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Package& p = u[static_cast<PackageId>(i)];
    if (!sol.contains(static_cast<PackageId>(i)) || !p.recommends) continue;
    for (const DependencyClause& clause : *p.recommends)
      if (!clause_satisfied(u, clause, sol)) ++n;
  }
  return n;
}

Count unaligned_packages(const Universe& u, const Installation& sol, const SourceClusterIndex& idx,
                         const ClusterRestriction& r) {
  (void)u;
  return sum_over_clusters(idx, sol, r, [](const ClusterStats& st) {
    return st.distinct_versions() >= 2 ? st.installed_packages : 0;
  });
}

Count unaligned_pairs(const Universe& u, const Installation& sol, const SourceClusterIndex& idx,
                      const ClusterRestriction& r) {
  (void)u;
  return sum_over_clusters(idx, sol, r, [](const ClusterStats& st) {
    Count pairs = 0, before = 0;
    for (Count k : st.installed_per_version) {
      pairs += before * k;
      before += k;
    }
    return pairs;
  });
}

Count unaligned_version_changes(const Universe& u, const Installation& sol,
                                const SourceClusterIndex& idx, const ClusterRestriction& r) {
  (void)u;
  return sum_over_clusters(idx, sol, r, [](const ClusterStats& st) {
    return std::max<Count>(0, st.distinct_versions() - 1);
  });
}

Count unaligned_clusters(const Universe& u, const Installation& sol, const SourceClusterIndex& idx,
                         const ClusterRestriction& r) {
  (void)u;
  return sum_over_clusters(idx, sol, r,
                           [](const ClusterStats& st) { return st.distinct_versions() >= 2 ? 1 : 0; });
}

bool is_aligned(const Universe& u, const Installation& sol, const SourceClusterIndex& idx) {
  return unaligned_clusters(u, sol, idx) == 0;
}

MeasureReport measure_all(const Universe& u, const Installation& initial, const Installation& sol,
                          const SourceClusterIndex& idx, const ClusterRestriction& r) {
  MeasureReport m;
  m.removed = removed_count(u, initial, sol);
  m.new_packages = new_count(u, initial, sol);
  m.changed = changed_count(u, initial, sol);
  m.notuptodate = notuptodate_count(u, sol);
  m.unsat_recommends = unsat_recommends_count(u, sol);
  m.unaligned_packages = unaligned_packages(u, sol, idx, r);
  m.unaligned_pairs = unaligned_pairs(u, sol, idx, r);
  m.unaligned_version_changes = unaligned_version_changes(u, sol, idx, r);
  m.unaligned_clusters = unaligned_clusters(u, sol, idx, r);
  return m;
}

}  // namespace cualign
