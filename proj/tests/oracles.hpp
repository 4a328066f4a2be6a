// Independent oracles used by the test suites. Everything here recomputes
// results from first principles (set comprehensions, exhaustive enumeration)
// without going through the aggregated evaluators, the encoders' bookkeeping,
// or the branch-and-bound search that they check.
#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cualign/criteria.hpp"
#include "cualign/cudf.hpp"
#include "cualign/program.hpp"
#include "cualign/sat.hpp"

namespace cualign::testing {

// ---------------------------------------------------------------------------
// Instance builders

// A same-source cluster of `config.size()` packages, all installed, where
// package k is built from source version "v<config[k]>".
inline Universe cluster_universe(const std::vector<int>& config) {
  std::vector<Package> packages;
  for (std::size_t k = 0; k < config.size(); ++k) {
    Package p;
    p.name = "c" + std::to_string(k + 1);
    p.version = 1;
    p.installed = true;
    p.source = SourceRef{"s", "v" + std::to_string(config[k])};
    packages.push_back(std::move(p));
  }
  return Universe(std::move(packages));
}

inline Installation everything(const Universe& u) {
  Installation s(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) s.add(static_cast<PackageId>(i));
  return s;
}

// ---------------------------------------------------------------------------
// Measure oracles: literal set comprehensions over package lists.

inline bool oracle_selected(const ClusterRestriction& r, const Package& p) {
  return p.source && (!r || r->count(p.source->source) != 0);
}

inline Count oracle_unaligned_packages(const Universe& u, const Installation& s,
                                       const ClusterRestriction& r = {}) {
  Count n = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Package& p = u[static_cast<PackageId>(i)];
    if (!s.contains(static_cast<PackageId>(i)) || !oracle_selected(r, p)) continue;
    bool witness = false;
    for (std::size_t j = 0; j < u.size(); ++j) {
      const Package& q = u[static_cast<PackageId>(j)];
      if (i != j && s.contains(static_cast<PackageId>(j)) && q.source &&
          q.source->source == p.source->source &&
          q.source->source_version != p.source->source_version)
        witness = true;
    }
    if (witness) ++n;
  }
  return n;
}

inline Count oracle_unaligned_pairs(const Universe& u, const Installation& s,
                                    const ClusterRestriction& r = {}) {
  Count n = 0;
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = i + 1; j < u.size(); ++j) {
      const Package& p = u[static_cast<PackageId>(i)];
      const Package& q = u[static_cast<PackageId>(j)];
      if (s.contains(static_cast<PackageId>(i)) && s.contains(static_cast<PackageId>(j)) &&
          oracle_selected(r, p) && q.source && q.source->source == p.source->source &&
          q.source->source_version != p.source->source_version)
        ++n;
    }
  return n;
}

inline Count oracle_unaligned_version_changes(const Universe& u, const Installation& s,
                                              const ClusterRestriction& r = {}) {
  std::map<std::string, std::set<std::string>> installed_versions;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Package& p = u[static_cast<PackageId>(i)];
    if (s.contains(static_cast<PackageId>(i)) && oracle_selected(r, p))
      installed_versions[p.source->source].insert(p.source->source_version);
  }
  Count n = 0;
  for (const auto& [src, versions] : installed_versions)
    n += std::max<Count>(0, static_cast<Count>(versions.size()) - 1);
  return n;
}

inline Count oracle_unaligned_clusters(const Universe& u, const Installation& s,
                                       const ClusterRestriction& r = {}) {
  std::set<std::string> unaligned;
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < u.size(); ++j) {
      const Package& p = u[static_cast<PackageId>(i)];
      const Package& q = u[static_cast<PackageId>(j)];
      if (i != j && s.contains(static_cast<PackageId>(i)) &&
          s.contains(static_cast<PackageId>(j)) && oracle_selected(r, p) && q.source &&
          q.source->source == p.source->source &&
          q.source->source_version != p.source->source_version)
        unaligned.insert(p.source->source);
    }
  return static_cast<Count>(unaligned.size());
}

inline std::map<std::string, std::set<Version>> oracle_version_sets(const Universe& u,
                                                                    const Installation& s) {
  std::map<std::string, std::set<Version>> sets;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (s.contains(static_cast<PackageId>(i)))
      sets[u[static_cast<PackageId>(i)].name].insert(u[static_cast<PackageId>(i)].version);
  return sets;
}

inline Count oracle_removed(const Universe& u, const Installation& initial,
                            const Installation& sol) {
  auto vi = oracle_version_sets(u, initial);
  auto vs = oracle_version_sets(u, sol);
  Count n = 0;
  for (const auto& [name, versions] : vi)
    if (!vs.count(name)) ++n;
  return n;
}

inline Count oracle_new(const Universe& u, const Installation& initial, const Installation& sol) {
  return oracle_removed(u, sol, initial);
}

inline Count oracle_changed(const Universe& u, const Installation& initial,
                            const Installation& sol) {
  auto vi = oracle_version_sets(u, initial);
  auto vs = oracle_version_sets(u, sol);
  std::set<std::string> names;
  for (const auto& [name, versions] : vi) names.insert(name);
  for (const auto& [name, versions] : vs) names.insert(name);
  Count n = 0;
  for (const std::string& name : names) {
    auto a = vi.find(name), b = vs.find(name);
    std::set<Version> sa = a == vi.end() ? std::set<Version>{} : a->second;
    std::set<Version> sb = b == vs.end() ? std::set<Version>{} : b->second;
    if (sa != sb) ++n;
  }
  return n;
}

inline Count oracle_notuptodate(const Universe& u, const Installation& sol) {
  auto vs = oracle_version_sets(u, sol);
  Count n = 0;
  for (const auto& [name, installed] : vs) {
    Version newest = u.versions_of(name).rbegin()->first;
    if (!installed.count(newest)) ++n;
  }
  return n;
}

inline Count oracle_unsat_recommends(const Universe& u, const Installation& sol) {
  Count n = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Package& p = u[static_cast<PackageId>(i)];
    if (!sol.contains(static_cast<PackageId>(i)) || !p.recommends) continue;
    for (const DependencyClause& clause : *p.recommends) {
      bool ok = false;
      for (const VersionConstraint& atom : clause)
        for (std::size_t j = 0; j < u.size(); ++j)
          if (sol.contains(static_cast<PackageId>(j)) && u[static_cast<PackageId>(j)].name == atom.name &&
              atom.matches(u[static_cast<PackageId>(j)].version))
            ok = true;
      if (!ok) ++n;
    }
  }
  return n;
}

inline Count oracle_measure(Criterion kind, const Universe& u, const Installation& initial,
                            const Installation& sol, const ClusterRestriction& r = {}) {
  switch (kind) {
    case Criterion::Removed: return oracle_removed(u, initial, sol);
    case Criterion::New: return oracle_new(u, initial, sol);
    case Criterion::Changed: return oracle_changed(u, initial, sol);
    case Criterion::NotUpToDate: return oracle_notuptodate(u, sol);
    case Criterion::UnsatRecommends: return oracle_unsat_recommends(u, sol);
    case Criterion::UnalignedPackages: return oracle_unaligned_packages(u, sol, r);
    case Criterion::UnalignedPairs: return oracle_unaligned_pairs(u, sol, r);
    case Criterion::UnalignedVersionChanges: return oracle_unaligned_version_changes(u, sol, r);
    case Criterion::UnalignedClusters: return oracle_unaligned_clusters(u, sol, r);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Direct installability semantics, evaluated on (name, version) sets.

inline bool atom_satisfied(const Universe& u, const VersionConstraint& atom,
                           const Installation& s) {
  for (std::size_t j = 0; j < u.size(); ++j)
    if (s.contains(static_cast<PackageId>(j)) && u[static_cast<PackageId>(j)].name == atom.name &&
        atom.matches(u[static_cast<PackageId>(j)].version))
      return true;
  return false;
}

inline bool oracle_feasible(const Universe& u, const Request& req, const Installation& s) {
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Package& p = u[static_cast<PackageId>(i)];
    if (!s.contains(static_cast<PackageId>(i))) continue;
    for (const DependencyClause& clause : p.depends) {
      bool ok = false;
      for (const VersionConstraint& atom : clause) ok = ok || atom_satisfied(u, atom, s);
      if (!ok) return false;
    }
    for (const VersionConstraint& atom : p.conflicts)
      for (std::size_t j = 0; j < u.size(); ++j) {
        const Package& q = u[static_cast<PackageId>(j)];
        if (i != j && s.contains(static_cast<PackageId>(j)) && q.name == atom.name &&
            atom.matches(q.version))
          return false;
      }
  }
  for (const VersionConstraint& atom : req.install)
    if (!atom_satisfied(u, atom, s)) return false;
  for (const VersionConstraint& atom : req.remove)
    if (atom_satisfied(u, atom, s)) return false;
  for (const VersionConstraint& atom : req.upgrade) {
    int count = 0;
    for (std::size_t j = 0; j < u.size(); ++j)
      if (s.contains(static_cast<PackageId>(j)) && u[static_cast<PackageId>(j)].name == atom.name &&
          atom.matches(u[static_cast<PackageId>(j)].version))
        ++count;
    if (count != 1) return false;
    std::optional<Version> top;
    for (const auto& [version, id] : u.versions_of(atom.name))
      if (u[id].installed && (!top || version > *top)) top = version;
    if (top)
      for (const auto& [version, id] : u.versions_of(atom.name))
        if (version < *top && s.contains(id)) return false;
  }
  return true;
}

inline Installation installation_from_mask(std::uint64_t mask, std::size_t n) {
  Installation s(n);
  for (std::size_t i = 0; i < n; ++i)
    if (mask & (std::uint64_t{1} << i)) s.add(static_cast<PackageId>(i));
  return s;
}

// ---------------------------------------------------------------------------
// Exhaustive auxiliary-completion minimizer for a linear program at a fixed
// package assignment. Enumerates the non-package 0-1 variables in handle
// order, pruning a branch as soon as a fully assigned constraint fails.

class CompletionOracle {
 public:
  CompletionOracle(const LinearProgram& lp, std::size_t level) : lp_(lp) {
    for (std::size_t i = 0; i < lp.var_count(); ++i) {
      VarId v = static_cast<VarId>(i);
      if (lp.definitions().count(v)) continue;
      if (lp.var(v).kind == VarKind::Package)
        position_[v] = -1;
      else {
        position_[v] = static_cast<int>(aux_.size());
        aux_.push_back(v);
      }
    }
    rows_at_.resize(aux_.size());
    for (const LinearConstraint& c : lp.constraints()) {
      LinearConstraint sc{lp.substitute(c.terms), c.rel, c.rhs};
      if (sc.terms.empty()) continue;
      int last = -1;
      for (const LinearTerm& t : sc.terms) last = std::max(last, position_.at(t.var));
      rows_.push_back(sc);
      if (last < 0)
        base_rows_.push_back(rows_.size() - 1);
      else
        rows_at_[static_cast<std::size_t>(last)].push_back(rows_.size() - 1);
    }
    objective_ = lp.substitute(lp.objectives().at(level).terms);
  }

  // Minimum objective over all auxiliary completions, or nullopt when the
  // package assignment violates the package-only constraints (or bounds).
  std::optional<Count> min_objective(const Installation& pkgs) {
    values_.assign(lp_.var_count(), 0);
    for (std::size_t i = 0; i < lp_.var_count(); ++i) {
      const VarInfo& v = lp_.var(static_cast<VarId>(i));
      if (v.kind != VarKind::Package || lp_.definitions().count(static_cast<VarId>(i))) continue;
      std::int64_t value = pkgs.contains(v.ref0) ? 1 : 0;
      if (value < v.lower || value > v.upper) return std::nullopt;
      values_[i] = value;
    }
    for (std::size_t r : base_rows_)
      if (!row_ok(rows_[r])) return std::nullopt;
    best_.reset();
    best_values_.clear();
    descend(0);
    return best_;
  }

  // Variable values of the minimizing completion found by min_objective.
  const std::vector<std::int64_t>& argmin_values() const { return best_values_; }

 private:
  bool row_ok(const LinearConstraint& c) const {
    std::int64_t lhs = 0;
    for (const LinearTerm& t : c.terms) lhs += t.coef * values_[static_cast<std::size_t>(t.var)];
    switch (c.rel) {
      case Cmp::Le: return lhs <= c.rhs;
      case Cmp::Ge: return lhs >= c.rhs;
      case Cmp::Eq: return lhs == c.rhs;
    }
    return false;
  }

  void descend(std::size_t k) {
    if (k == aux_.size()) {
      Count obj = 0;
      for (const LinearTerm& t : objective_) obj += t.coef * values_[static_cast<std::size_t>(t.var)];
      if (!best_ || obj < *best_) {
        best_ = obj;
        best_values_ = values_;
      }
      return;
    }
    const VarInfo& info = lp_.var(aux_[k]);
    for (std::int64_t v = info.lower; v <= info.upper; ++v) {
      values_[static_cast<std::size_t>(aux_[k])] = v;
      bool ok = true;
      for (std::size_t r : rows_at_[k]) ok = ok && row_ok(rows_[r]);
      if (ok) descend(k + 1);
    }
    values_[static_cast<std::size_t>(aux_[k])] = 0;
  }

  const LinearProgram& lp_;
  std::map<VarId, int> position_;
  std::vector<VarId> aux_;
  std::vector<LinearConstraint> rows_;
  std::vector<std::size_t> base_rows_;
  std::vector<std::vector<std::size_t>> rows_at_;
  LinearExpr objective_;
  std::vector<std::int64_t> values_;
  std::optional<Count> best_;
  std::vector<std::int64_t> best_values_;
};

// ---------------------------------------------------------------------------
// Weighted CNF evaluation at a fixed package assignment. Hard clauses here
// contain at most one non-package literal, which is positive (the dominance
// shape), so the cheapest completion sets an auxiliary true only when every
// package literal of one of its clauses is false.

struct WcnfCost {
  bool feasible = false;
  Count cost = 0;
};

inline WcnfCost wcnf_cost_at(const WeightedFormula& f, const LinearProgram& lp,
                             const Installation& pkgs) {
  auto lit_true = [&](Lit l, const std::map<VarId, bool>& aux) -> std::optional<bool> {
    VarId v = lit_var(l);
    if (lp.var(v).kind == VarKind::Package) {
      bool val = pkgs.contains(lp.var(v).ref0);
      return l > 0 ? val : !val;
    }
    auto it = aux.find(v);
    if (it == aux.end()) return std::nullopt;
    return l > 0 ? it->second : !it->second;
  };

  std::map<VarId, bool> aux;  // forced-true auxiliaries
  for (const Clause& c : f.hard) {
    bool package_only = true;
    for (Lit l : c) package_only = package_only && lp.var(lit_var(l)).kind == VarKind::Package;
    if (!package_only) continue;
    bool sat = false;
    for (Lit l : c) sat = sat || *lit_true(l, aux);
    if (!sat) return {false, 0};
  }
  for (const Clause& c : f.hard) {
    Lit aux_lit = 0;
    bool pkg_part_sat = false;
    for (Lit l : c) {
      if (lp.var(lit_var(l)).kind == VarKind::Package)
        pkg_part_sat = pkg_part_sat || *lit_true(l, aux);
      else
        aux_lit = l;
    }
    if (aux_lit > 0 && !pkg_part_sat) aux[lit_var(aux_lit)] = true;
  }
  WcnfCost result;
  result.feasible = true;
  for (const SoftUnit& s : f.soft) {
    VarId v = lit_var(s.lit);
    bool value = aux.count(v) ? aux.at(v) : false;  // unforced auxiliaries stay cheap
    bool falsified = s.lit > 0 ? !value : value;
    if (falsified) result.cost += s.weight;
  }
  return result;
}

}  // namespace cualign::testing
