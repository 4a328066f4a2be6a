#include "cualign/milp.hpp"

#include <algorithm>
#include <cassert>
#include <cstdlib>
#include <limits>
#include <sstream>

namespace cualign {

namespace {

VarId pkg_var(const LinearProgram& lp, const Universe& u, PackageId id) {
  return lp.require_var(pkg_tag(u[id]));
}

std::set<PackageId> expand_clause(const Universe& u, const DependencyClause& clause) {
  std::set<PackageId> out;
  for (const VersionConstraint& atom : clause)
    for (PackageId id : expand_constraint(u, atom)) out.insert(id);
  return out;
}

// Highest initially installed version of a name, if any.
std::optional<Version> highest_installed(const Universe& u, const std::string& name) {
  std::optional<Version> best;
  for (const auto& [version, id] : u.versions_of(name))
    if (u[id].installed) best = version;
  return best;
}

std::string aux_tag(const std::string& crit, const std::string& key) {
  return "aux/" + crit + "/" + key;
}

void encode_removed(LinearProgram& lp, const Universe& u, const Installation& initial,
                    LinearExpr& obj) {
  for (const auto& [name, versions] : u.names()) {
    bool in_initial = false;
    for (const auto& [v, id] : versions) in_initial = in_initial || initial.contains(id);
    if (!in_initial) continue;
    VarId r = lp.add_var(VarKind::CriterionAux, aux_tag("removed", name));
    if (lp.mark_block(lp.var(r).tag)) {
      LinearExpr atleast{{1, r}};
      for (const auto& [v, id] : versions) atleast.push_back({1, pkg_var(lp, u, id)});
      lp.add_constraint(atleast, Cmp::Ge, 1);  // no version installed -> r = 1
      for (const auto& [v, id] : versions)
        lp.add_constraint({{1, r}, {1, pkg_var(lp, u, id)}}, Cmp::Le, 1);  // any version -> r = 0
    }
    obj.push_back({1, r});
  }
}

void encode_new(LinearProgram& lp, const Universe& u, const Installation& initial,
                LinearExpr& obj) {
  for (const auto& [name, versions] : u.names()) {
    bool in_initial = false;
    for (const auto& [v, id] : versions) in_initial = in_initial || initial.contains(id);
    if (in_initial) continue;
    VarId w = lp.add_var(VarKind::CriterionAux, aux_tag("new", name));
    if (lp.mark_block(lp.var(w).tag)) {
      LinearExpr atmost{{1, w}};
      for (const auto& [v, id] : versions) {
        atmost.push_back({-1, pkg_var(lp, u, id)});
        lp.add_constraint({{1, w}, {-1, pkg_var(lp, u, id)}}, Cmp::Ge, 0);
      }
      lp.add_constraint(atmost, Cmp::Le, 0);  // w <= sum of versions
    }
    obj.push_back({1, w});
  }
}

void encode_changed(LinearProgram& lp, const Universe& u, const Installation& initial,
                    LinearExpr& obj) {
  for (const auto& [name, versions] : u.names()) {
    VarId c = lp.add_var(VarKind::CriterionAux, aux_tag("changed", name));
    if (lp.mark_block(lp.var(c).tag)) {
      LinearExpr upper{{1, c}};
      std::int64_t initial_count = 0;
      for (const auto& [v, id] : versions) {
        VarId pv = pkg_var(lp, u, id);
        if (initial.contains(id)) {
          lp.add_constraint({{1, c}, {1, pv}}, Cmp::Ge, 1);  // dropping v flips c
          upper.push_back({1, pv});
          ++initial_count;
        } else {
          lp.add_constraint({{1, c}, {-1, pv}}, Cmp::Ge, 0);  // adding v flips c
          upper.push_back({-1, pv});
        }
      }
      // c <= number of positions where the version set differs from I
      lp.add_constraint(upper, Cmp::Le, initial_count);
    }
    obj.push_back({1, c});
  }
}

void encode_notuptodate(LinearProgram& lp, const Universe& u, LinearExpr& obj) {
  for (const auto& [name, versions] : u.names()) {
    if (versions.size() < 2) continue;  // a single available version is always up to date
    VarId t = lp.add_var(VarKind::CriterionAux, aux_tag("notuptodate", name));
    if (lp.mark_block(lp.var(t).tag)) {
      VarId newest = pkg_var(lp, u, versions.rbegin()->second);
      LinearExpr upper{{1, t}};
      for (const auto& [v, id] : versions) {
        if (id == versions.rbegin()->second) continue;
        VarId pv = pkg_var(lp, u, id);
        lp.add_constraint({{1, t}, {-1, pv}, {1, newest}}, Cmp::Ge, 0);
        upper.push_back({-1, pv});
      }
      lp.add_constraint({{1, t}, {1, newest}}, Cmp::Le, 1);
      lp.add_constraint(upper, Cmp::Le, 0);  // t <= sum of non-newest versions
    }
    obj.push_back({1, t});
  }
}

void encode_unsat_recommends(LinearProgram& lp, const Universe& u, LinearExpr& obj) {
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Package& p = u[static_cast<PackageId>(i)];
    if (!p.recommends) continue;
    VarId pv = pkg_var(lp, u, static_cast<PackageId>(i));
    for (std::size_t k = 0; k < p.recommends->size(); ++k) {
      VarId g = lp.add_var(VarKind::CriterionAux,
                           aux_tag("unsatrec", p.name + "/" + std::to_string(p.version) + "/" +
                                                    std::to_string(k)));
      if (lp.mark_block(lp.var(g).tag)) {
        std::set<PackageId> satisfiers = expand_clause(u, (*p.recommends)[k]);
        LinearExpr lower{{1, g}, {-1, pv}};
        for (PackageId q : satisfiers) {
          VarId qv = pkg_var(lp, u, q);
          lower.push_back({1, qv});
          lp.add_constraint({{1, g}, {1, qv}}, Cmp::Le, 1);  // any satisfier -> g = 0
        }
        lp.add_constraint(lower, Cmp::Ge, 0);  // installed and unsatisfied -> g = 1
        lp.add_constraint({{1, g}, {-1, pv}}, Cmp::Le, 0);   // g <= p
      }
      obj.push_back({1, g});
    }
  }
}

// nb_{inst,s} with its defining sum over the i variables; requires the i
// variables of the source to exist.
VarId ensure_installed_count(LinearProgram& lp, const std::string& source,
                             const SourceClusterIndex::VersionMap& versions) {
  std::string tag = "nb/" + source;
  VarId nb = lp.find_var(tag);
  if (nb >= 0) return nb;
  nb = lp.add_var(VarKind::InstalledCount, tag, 0, static_cast<std::int64_t>(versions.size()));
  LinearExpr def;
  for (const auto& [token, pkgs] : versions)
    def.push_back({1, lp.require_var(installed_version_tag(source, token))});
  lp.define_var(nb, std::move(def));
  return nb;
}

}  // namespace

std::string pkg_tag(const Package& p) {
  return "pkg/" + p.name + "/" + std::to_string(p.version);
}

std::string installed_version_tag(const std::string& source, const std::string& token) {
  return "i/" + source + "/" + token;
}

LinearProgram encode_base(const Universe& u, const Request& req) {
  LinearProgram lp;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Package& p = u[static_cast<PackageId>(i)];
    lp.add_var(VarKind::Package, pkg_tag(p), 0, 1, static_cast<std::int32_t>(i),
               p.installed ? 1 : 0);
  }

  for (std::size_t i = 0; i < u.size(); ++i) {
    const Package& p = u[static_cast<PackageId>(i)];
    VarId pv = static_cast<VarId>(i);
    for (const DependencyClause& clause : p.depends) {
      LinearExpr terms{{-1, pv}};
      for (PackageId q : expand_clause(u, clause)) terms.push_back({1, static_cast<VarId>(q)});
      lp.add_constraint(std::move(terms), Cmp::Ge, 0);
    }
  }

  std::set<std::pair<PackageId, PackageId>> conflict_pairs;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Package& p = u[static_cast<PackageId>(i)];
    for (const VersionConstraint& atom : p.conflicts)
      for (PackageId q : expand_constraint(u, atom)) {
        if (q == static_cast<PackageId>(i)) continue;  // a package never conflicts with itself
        conflict_pairs.insert(std::minmax(static_cast<PackageId>(i), q));
      }
  }
  for (const auto& [a, b] : conflict_pairs)
    lp.add_constraint({{1, static_cast<VarId>(a)}, {1, static_cast<VarId>(b)}}, Cmp::Le, 1);

  for (const VersionConstraint& atom : req.install) {
    std::vector<PackageId> expansion = expand_constraint(u, atom);
    if (expansion.empty())
      throw EncodeError("install atom '" + atom.str() + "' matches no package");
    LinearExpr terms;
    for (PackageId q : expansion) terms.push_back({1, static_cast<VarId>(q)});
    lp.add_constraint(std::move(terms), Cmp::Ge, 1);
  }

  for (const VersionConstraint& atom : req.remove)
    for (PackageId q : expand_constraint(u, atom)) lp.fix_var(static_cast<VarId>(q), 0);

  for (const VersionConstraint& atom : req.upgrade) {
    std::vector<PackageId> expansion = expand_constraint(u, atom);
    if (expansion.empty())
      throw EncodeError("upgrade atom '" + atom.str() + "' matches no package");
    LinearExpr terms;
    for (PackageId q : expansion) terms.push_back({1, static_cast<VarId>(q)});
    lp.add_constraint(std::move(terms), Cmp::Eq, 1);
    if (std::optional<Version> top = highest_installed(u, atom.name)) {
      for (const auto& [version, id] : u.versions_of(atom.name))
        if (version < *top) lp.fix_var(static_cast<VarId>(id), 0);
    }
  }
  return lp;
}

void encode_installed_version_vars(LinearProgram& lp, const Universe& u,
                                   const SourceClusterIndex& idx,
                                   const std::set<std::string>& sources) {
  for (const std::string& s : sources) {
    const auto* versions = idx.find(s);
    if (versions == nullptr) continue;
    if (!lp.mark_block("iblock/" + s)) continue;
    for (const auto& [token, pkgs] : *versions) {
      VarId iv = lp.add_var(VarKind::InstalledVersion, installed_version_tag(s, token));
      LinearExpr at_most{{1, iv}};
      for (PackageId p : pkgs) at_most.push_back({-1, pkg_var(lp, u, p)});
      lp.add_constraint(std::move(at_most), Cmp::Le, 0);  // i <= sum of its packages
      for (PackageId p : pkgs)
        lp.add_constraint({{1, pkg_var(lp, u, p)}, {-1, iv}}, Cmp::Le, 0);  // p <= i
    }
  }
}

void encode_unaligned_packages(LinearProgram& lp, const Universe& u,
                               const SourceClusterIndex& idx,
                               const std::set<std::string>& sources) {
  LinearExpr obj;
  for (const std::string& s : sources) {
    const auto* versions = idx.find(s);
    if (versions == nullptr || versions->size() < 2) continue;
    bool fresh = lp.mark_block("nublock/" + s);
    for (const auto& [token, pkgs] : *versions) {
      std::vector<VarId> other_versions;
      for (const auto& [token2, pkgs2] : *versions)
        if (token2 != token)
          other_versions.push_back(lp.require_var(installed_version_tag(s, token2)));
      for (PackageId p : pkgs) {
        VarId pv = pkg_var(lp, u, p);
        VarId nu = lp.add_var(VarKind::UnalignedPackage,
                              "nu/" + u[p].name + "/" + std::to_string(u[p].version), 0, 1, p);
        if (fresh) {
          lp.add_constraint({{1, nu}, {-1, pv}}, Cmp::Le, 0);  // nu <= p
          LinearExpr cap{{1, nu}};
          for (VarId iv : other_versions) cap.push_back({-1, iv});
          lp.add_constraint(std::move(cap), Cmp::Le, 0);  // nu <= sum of other i vars
          for (VarId iv : other_versions)                 // p and another version force nu
            lp.add_constraint({{1, nu}, {-1, pv}, {-1, iv}}, Cmp::Ge, -1);
        }
        obj.push_back({1, nu});
      }
    }
  }
  lp.add_objective(Criterion::UnalignedPackages, std::move(obj));
}

void encode_unaligned_pairs(LinearProgram& lp, const Universe& u, const SourceClusterIndex& idx,
                            const std::set<std::string>& sources) {
  LinearExpr obj;
  for (const std::string& s : sources) {
    const auto* versions = idx.find(s);
    if (versions == nullptr || versions->size() < 2) continue;
    bool fresh = lp.mark_block("upblock/" + s);
    for (auto it = versions->begin(); it != versions->end(); ++it) {
      auto jt = it;
      for (++jt; jt != versions->end(); ++jt) {
        for (PackageId p : it->second)
          for (PackageId q : jt->second) {
            auto [a, b] = std::minmax(p, q);
            VarId av = pkg_var(lp, u, a);
            VarId bv = pkg_var(lp, u, b);
            VarId uv = lp.add_var(VarKind::UnalignedPair,
                                  "up/" + u[a].name + "/" + std::to_string(u[a].version) + "|" +
                                      u[b].name + "/" + std::to_string(u[b].version),
                                  0, 1, a, b);
            if (fresh) {
              lp.add_constraint({{1, uv}, {-1, av}}, Cmp::Le, 0);
              lp.add_constraint({{1, uv}, {-1, bv}}, Cmp::Le, 0);
              lp.add_constraint({{1, uv}, {-1, av}, {-1, bv}}, Cmp::Ge, -1);
            }
            obj.push_back({1, uv});
          }
      }
    }
  }
  lp.add_objective(Criterion::UnalignedPairs, std::move(obj));
}

void encode_version_changes(LinearProgram& lp, const Universe& u, const SourceClusterIndex& idx,
                            const std::set<std::string>& sources) {
  (void)u;
  LinearExpr obj;
  for (const std::string& s : sources) {
    const auto* versions = idx.find(s);
    if (versions == nullptr || versions->size() < 2) continue;
    auto span = static_cast<std::int64_t>(versions->size());
    VarId nb = ensure_installed_count(lp, s, *versions);
    VarId delta = lp.add_var(VarKind::AnyInstalled, "delta/" + s);
    VarId nc = lp.add_var(VarKind::VersionChanges, "nc/" + s, 0, span);
    if (lp.mark_block("vcblock/" + s)) {
      lp.add_constraint({{span, delta}, {-1, nb}}, Cmp::Ge, 0);  // delta = 1 iff nb >= 1
      lp.add_constraint({{1, nb}, {-1, delta}}, Cmp::Ge, 0);     // delta = 0 iff nb = 0
      lp.define_var(nc, {{1, nb}, {-1, delta}});
    }
    obj.push_back({1, nc});
  }
  lp.add_objective(Criterion::UnalignedVersionChanges, std::move(obj));
}

void encode_unaligned_clusters(LinearProgram& lp, const Universe& u, const SourceClusterIndex& idx,
                               const std::set<std::string>& sources) {
  (void)u;
  LinearExpr obj;
  for (const std::string& s : sources) {
    const auto* versions = idx.find(s);
    if (versions == nullptr || versions->size() < 2) continue;
    auto span = static_cast<std::int64_t>(versions->size());
    VarId nb = ensure_installed_count(lp, s, *versions);
    VarId us = lp.add_var(VarKind::UnalignedCluster, "uc/" + s);
    if (lp.mark_block("ucblock/" + s)) {
      lp.add_constraint({{span, us}, {-1, nb}}, Cmp::Ge, -1);  // u = 1 iff nb >= 2
      lp.add_constraint({{1, nb}, {-2, us}}, Cmp::Ge, 0);      // u = 0 iff nb <= 1
    }
    obj.push_back({1, us});
  }
  lp.add_objective(Criterion::UnalignedClusters, std::move(obj));
}

void encode_classic_criterion(LinearProgram& lp, Criterion kind, const Universe& u,
                              const Installation& initial) {
  LinearExpr obj;
  switch (kind) {
    case Criterion::Removed: encode_removed(lp, u, initial, obj); break;
    case Criterion::New: encode_new(lp, u, initial, obj); break;
    case Criterion::Changed: encode_changed(lp, u, initial, obj); break;
    case Criterion::NotUpToDate: encode_notuptodate(lp, u, obj); break;
    case Criterion::UnsatRecommends: encode_unsat_recommends(lp, u, obj); break;
    default: throw SpecError("not a classic criterion: " + to_string(kind));
  }
  lp.add_objective(kind, std::move(obj));
}

LinearProgram assemble(const Universe& u, const Request& req, const CriterionSpec& spec,
                       const ClusterRestriction& global) {
  if (spec.empty()) throw SpecError("criteria spec must be non-empty");
  LinearProgram lp = encode_base(u, req);
  SourceClusterIndex idx = build_cluster_index(u);
  std::set<std::string> reduced = reduced_sources(idx);
  Installation initial = Installation::initial_of(u);

  for (const CriterionItem& item : spec) {
    if (is_alignment_criterion(item.kind)) {
      const ClusterRestriction& r = item.restriction ? item.restriction : global;
      if (r && r->empty()) throw SpecError("empty cluster restriction");
      std::set<std::string> scope;
      for (const std::string& s : reduced)
        if (cluster_selected(r, s)) scope.insert(s);
      switch (item.kind) {
        case Criterion::UnalignedPackages:
          encode_installed_version_vars(lp, u, idx, scope);
          encode_unaligned_packages(lp, u, idx, scope);
          break;
        case Criterion::UnalignedPairs: encode_unaligned_pairs(lp, u, idx, scope); break;
        case Criterion::UnalignedVersionChanges:
          encode_installed_version_vars(lp, u, idx, scope);
          encode_version_changes(lp, u, idx, scope);
          break;
        case Criterion::UnalignedClusters:
          encode_installed_version_vars(lp, u, idx, scope);
          encode_unaligned_clusters(lp, u, idx, scope);
          break;
        default: break;
      }
    } else {
      if (item.restriction)
        throw SpecError("cluster restriction is only valid on unaligned criteria: " +
                        to_string(item.kind));
      encode_classic_criterion(lp, item.kind, u, initial);
    }
  }
  return lp;
}

namespace {

LinearExpr pick_objective(const LinearProgram& lp, LpObjectivePolicy policy) {
  const auto& objectives = lp.objectives();
  if (objectives.empty()) return {};
  if (policy == LpObjectivePolicy::FirstObjective || objectives.size() == 1)
    return objectives.front().terms;

  // W_k = prod_{j>k} (UB_j + 1); any solution improving level k beats every
  // combination of later levels.
  std::vector<__int128> weights(objectives.size(), 1);
  for (std::size_t k = objectives.size() - 1; k-- > 0;) {
    __int128 ub = lp.trivial_upper_bound(objectives[k + 1].terms);
    weights[k] = weights[k + 1] * (ub + 1);
    if (weights[k] > std::numeric_limits<std::int64_t>::max())
      throw EncodeError("lexicographic merge weights overflow 64-bit integers");
  }
  LinearExpr merged;
  for (std::size_t k = 0; k < objectives.size(); ++k)
    for (const LinearTerm& t : objectives[k].terms)
      merged.push_back({t.coef * static_cast<std::int64_t>(weights[k]), t.var});
  return normalize_expr(std::move(merged));
}

void append_terms(std::ostringstream& out, const LinearExpr& terms) {
  for (const LinearTerm& t : terms)
    out << (t.coef >= 0 ? " +" : " -") << std::abs(t.coef) << " x" << t.var;
}

}  // namespace

std::string emit_lp(const LinearProgram& lp, LpObjectivePolicy policy) {
  std::ostringstream out;
  out << "Minimize\n obj:";
  append_terms(out, pick_objective(lp, policy));
  out << "\nSubject To\n";
  std::size_t row = 0;
  auto emit_row = [&](const LinearExpr& terms, Cmp rel, std::int64_t rhs) {
    out << " c" << row++ << ":";
    append_terms(out, terms);
    out << (rel == Cmp::Le ? " <= " : rel == Cmp::Ge ? " >= " : " = ") << rhs << "\n";
  };
  for (const LinearConstraint& c : lp.constraints()) emit_row(c.terms, c.rel, c.rhs);
  for (const auto& [v, def] : lp.definitions()) {
    LinearExpr terms{{1, v}};
    for (const LinearTerm& t : def) terms.push_back({-t.coef, t.var});
    emit_row(normalize_expr(std::move(terms)), Cmp::Eq, 0);
  }

  out << "Bounds\n";
  for (std::size_t i = 0; i < lp.var_count(); ++i) {
    const VarInfo& v = lp.var(static_cast<VarId>(i));
    if (v.lower == v.upper)
      out << " x" << i << " = " << v.lower << "\n";
    else if (!v.is_binary())
      out << " " << v.lower << " <= x" << i << " <= " << v.upper << "\n";
  }
  std::string binaries, generals;
  for (std::size_t i = 0; i < lp.var_count(); ++i) {
    const VarInfo& v = lp.var(static_cast<VarId>(i));
    (v.is_binary() ? binaries : generals) += " x" + std::to_string(i) + "\n";
  }
  if (!binaries.empty()) out << "Binary\n" << binaries;
  if (!generals.empty()) out << "General\n" << generals;
  out << "End\n";
  return out.str();
}

std::string emit_opb(const LinearProgram& lp, LpObjectivePolicy policy) {
  // Defined integer variables disappear by substitution; the remaining
  // variables are renumbered densely as x1..xN.
  std::vector<VarId> kept;
  std::vector<std::int32_t> index(lp.var_count(), -1);
  for (std::size_t i = 0; i < lp.var_count(); ++i) {
    VarId v = static_cast<VarId>(i);
    if (lp.definitions().count(v)) continue;
    if (!lp.var(v).is_binary())
      throw EncodeError("OPB output requires 0-1 variables: " + lp.var(v).tag);
    index[i] = static_cast<std::int32_t>(kept.size()) + 1;
    kept.push_back(v);
  }

  auto opb_terms = [&](const LinearExpr& terms) {
    std::ostringstream t;
    for (const LinearTerm& term : terms)
      t << (term.coef >= 0 ? "+" : "-") << std::abs(term.coef) << " x" << index[term.var] << " ";
    return t.str();
  };

  std::vector<std::string> rows;
  auto add_row = [&](LinearExpr terms, Cmp rel, std::int64_t rhs) {
    if (rel == Cmp::Le) {  // normalize to >=
      for (LinearTerm& t : terms) t.coef = -t.coef;
      rhs = -rhs;
      rel = Cmp::Ge;
    }
    rows.push_back(opb_terms(terms) + (rel == Cmp::Ge ? ">= " : "= ") + std::to_string(rhs) +
                   " ;");
  };
  for (const LinearConstraint& c : lp.constraints()) add_row(lp.substitute(c.terms), c.rel, c.rhs);
  for (VarId v : kept)
    if (lp.var(v).lower == lp.var(v).upper) add_row({{1, v}}, Cmp::Eq, lp.var(v).lower);

  std::ostringstream out;
  out << "* #variable= " << kept.size() << " #constraint= " << rows.size() << "\n";
  for (VarId v : kept) out << "* x" << index[v] << " = " << lp.var(v).tag << "\n";
  out << "min: " << opb_terms(lp.substitute(pick_objective(lp, policy))) << ";\n";
  for (const std::string& row : rows) out << row << "\n";
  return out.str();
}

std::string emit_name_map(const LinearProgram& lp) {
  std::ostringstream out;
  for (std::size_t i = 0; i < lp.var_count(); ++i)
    out << i << "\t" << lp.var(static_cast<VarId>(i)).tag << "\n";
  return out.str();
}

}  // namespace cualign
