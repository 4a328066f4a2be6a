#include "cualign/sat.hpp"

#include <algorithm>
#include <sstream>

#include "cualign/milp.hpp"

namespace cualign {

namespace {

VarId pkg_var(LinearProgram& lp, const Universe& u, PackageId id) {
  const Package& p = u[id];
  return lp.add_var(VarKind::Package, pkg_tag(p), 0, 1, id, p.installed ? 1 : 0);
}

std::optional<Version> highest_installed(const Universe& u, const std::string& name) {
  std::optional<Version> best;
  for (const auto& [version, id] : u.versions_of(name))
    if (u[id].installed) best = version;
  return best;
}

}  // namespace

std::int64_t WeightedFormula::top() const {
  std::int64_t sum = 0;
  for (const SoftUnit& s : soft) sum += s.weight;
  return sum + 1;
}

void WeightedFormula::add_hard(Clause c) {
  std::sort(c.begin(), c.end(), [](Lit a, Lit b) {
    return lit_var(a) != lit_var(b) ? lit_var(a) < lit_var(b) : a < b;
  });
  c.erase(std::unique(c.begin(), c.end()), c.end());
  for (std::size_t i = 0; i + 1 < c.size(); ++i)
    if (c[i] == -c[i + 1]) return;  // tautology
  if (c.empty()) throw EncodeError("empty clause");
  hard.push_back(std::move(c));
}

void WeightedFormula::add_soft(std::int64_t weight, Lit lit) {
  soft.push_back(SoftUnit{weight, lit});
}

void clausify_base(LinearProgram& lp, const Universe& u, const Request& req, WeightedFormula& f) {
  for (std::size_t i = 0; i < u.size(); ++i) pkg_var(lp, u, static_cast<PackageId>(i));

  for (std::size_t i = 0; i < u.size(); ++i) {
    const Package& p = u[static_cast<PackageId>(i)];
    VarId pv = pkg_var(lp, u, static_cast<PackageId>(i));
    for (const DependencyClause& dc : p.depends) {
      std::set<PackageId> expansion;
      for (const VersionConstraint& atom : dc)
        for (PackageId q : expand_constraint(u, atom)) expansion.insert(q);
      Clause clause{neg(pv)};
      for (PackageId q : expansion) clause.push_back(pos(pkg_var(lp, u, q)));
      f.add_hard(std::move(clause));  // add_hard drops the self-dependency tautology
    }
  }

  std::set<std::pair<PackageId, PackageId>> conflict_pairs;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Package& p = u[static_cast<PackageId>(i)];
    for (const VersionConstraint& atom : p.conflicts)
      for (PackageId q : expand_constraint(u, atom)) {
        if (q == static_cast<PackageId>(i)) continue;
        conflict_pairs.insert(std::minmax(static_cast<PackageId>(i), q));
      }
  }
  for (const auto& [a, b] : conflict_pairs)
    f.add_hard({neg(pkg_var(lp, u, a)), neg(pkg_var(lp, u, b))});

  for (const VersionConstraint& atom : req.install) {
    std::vector<PackageId> expansion = expand_constraint(u, atom);
    if (expansion.empty())
      throw EncodeError("install atom '" + atom.str() + "' matches no package");
    Clause clause;
    for (PackageId q : expansion) clause.push_back(pos(pkg_var(lp, u, q)));
    f.add_hard(std::move(clause));
  }

  for (const VersionConstraint& atom : req.remove)
    for (PackageId q : expand_constraint(u, atom)) f.add_hard({neg(pkg_var(lp, u, q))});

  for (const VersionConstraint& atom : req.upgrade) {
    std::vector<PackageId> expansion = expand_constraint(u, atom);
    if (expansion.empty())
      throw EncodeError("upgrade atom '" + atom.str() + "' matches no package");
    Clause at_least;
    for (PackageId q : expansion) at_least.push_back(pos(pkg_var(lp, u, q)));
    f.add_hard(std::move(at_least));
    for (std::size_t a = 0; a < expansion.size(); ++a)
      for (std::size_t b = a + 1; b < expansion.size(); ++b)
        f.add_hard({neg(pkg_var(lp, u, expansion[a])), neg(pkg_var(lp, u, expansion[b]))});
    if (std::optional<Version> top = highest_installed(u, atom.name)) {
      for (const auto& [version, id] : u.versions_of(atom.name))
        if (version < *top) f.add_hard({neg(pkg_var(lp, u, id))});
    }
  }
}

void clausify_unaligned_packages(LinearProgram& lp, const Universe& u,
                                 const SourceClusterIndex& idx,
                                 const std::set<std::string>& sources, WeightedFormula& f) {
  for (const std::string& s : sources) {
    const auto* versions = idx.find(s);
    if (versions == nullptr || versions->size() < 2) continue;
    for (const auto& [token, pkgs] : *versions) {
      for (PackageId p : pkgs) {
        VarId pv = pkg_var(lp, u, p);
        VarId nu = lp.add_var(VarKind::UnalignedPackage,
                              "nu/" + u[p].name + "/" + std::to_string(u[p].version), 0, 1, p);
        for (const auto& [token2, pkgs2] : *versions) {
          if (token2 == token) continue;
          for (PackageId q : pkgs2)
            f.add_hard({neg(pv), neg(pkg_var(lp, u, q)), pos(nu)});
        }
        f.add_soft(1, neg(nu));
      }
    }
  }
}

void clausify_unaligned_pairs(LinearProgram& lp, const Universe& u, const SourceClusterIndex& idx,
                              const std::set<std::string>& sources, WeightedFormula& f) {
  for (const std::string& s : sources) {
    const auto* versions = idx.find(s);
    if (versions == nullptr || versions->size() < 2) continue;
    for (auto it = versions->begin(); it != versions->end(); ++it) {
      auto jt = it;
      for (++jt; jt != versions->end(); ++jt)
        for (PackageId p : it->second)
          for (PackageId q : jt->second) {
            auto [a, b] = std::minmax(p, q);  // each pair taken once
            VarId uv = lp.add_var(VarKind::UnalignedPair,
                                  "up/" + u[a].name + "/" + std::to_string(u[a].version) + "|" +
                                      u[b].name + "/" + std::to_string(u[b].version),
                                  0, 1, a, b);
            f.add_hard({neg(pkg_var(lp, u, a)), neg(pkg_var(lp, u, b)), pos(uv)});
            f.add_soft(1, neg(uv));
          }
    }
  }
}

std::string emit_wcnf(const WeightedFormula& f, std::size_t var_count) {
  std::ostringstream out;
  std::int64_t top = f.top();
  out << "p wcnf " << var_count << " " << f.hard.size() + f.soft.size() << " " << top << "\n";
  for (const Clause& c : f.hard) {
    out << top;
    for (Lit l : c) out << " " << l;
    out << " 0\n";
  }
  for (const SoftUnit& s : f.soft) out << s.weight << " " << s.lit << " 0\n";
  return out.str();
}

}  // namespace cualign
