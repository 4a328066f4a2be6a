#include "cualign/generator.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace cualign {

namespace {

// mt19937 output is fully specified by the standard; avoiding the
// distribution classes keeps generated instances identical across platforms.
struct Rng {
  std::mt19937 gen;

  explicit Rng(std::uint32_t seed) : gen(seed) {}
  std::uint32_t next(std::uint32_t n) { return n == 0 ? 0 : gen() % n; }
  bool chance(int per_mille) { return next(1000) < static_cast<std::uint32_t>(per_mille); }
};

VersionConstraint random_atom(Rng& rng, const std::vector<std::string>& names,
                              const std::map<std::string, std::vector<Version>>& versions,
                              int unknown_per_mille) {
  VersionConstraint atom;
  if (rng.chance(unknown_per_mille)) {
    atom.name = "ghost";
  } else {
    atom.name = names[rng.next(static_cast<std::uint32_t>(names.size()))];
  }
  switch (rng.next(10)) {
    case 0:
    case 1:
    case 2:
    case 3: atom.rel = Relation::Any; break;
    case 4:
    case 5: atom.rel = Relation::Geq; break;
    case 6:
    case 7: atom.rel = Relation::Leq; break;
    case 8: atom.rel = Relation::Eq; break;
    case 9: atom.rel = Relation::Neq; break;
  }
  if (atom.rel != Relation::Any) {
    auto it = versions.find(atom.name);
    if (it != versions.end() && !it->second.empty() && rng.chance(800)) {
      atom.bound = it->second[rng.next(static_cast<std::uint32_t>(it->second.size()))];
    } else {
      atom.bound = 1 + rng.next(4);
    }
  }
  return atom;
}

}  // namespace

std::pair<Universe, Request> generate_instance(std::uint32_t seed, const GenParams& params) {
  Rng rng(seed);

  int n = 3 + static_cast<int>(rng.next(static_cast<std::uint32_t>(
                  std::max(1, params.max_packages - 2))));
  int name_count = std::max(2, n * 2 / 3);
  std::vector<std::string> names;
  for (int i = 0; i < name_count; ++i) names.push_back("p" + std::to_string(i));

  int source_count = 1 + static_cast<int>(rng.next(static_cast<std::uint32_t>(params.max_sources)));
  std::vector<std::string> sources;
  for (int i = 0; i < source_count; ++i) sources.push_back("src" + std::to_string(i));
  std::vector<int> versions_per_source(static_cast<std::size_t>(source_count));
  for (int& v : versions_per_source)
    v = 1 + static_cast<int>(rng.next(static_cast<std::uint32_t>(params.max_source_versions)));

  std::map<std::string, Version> next_version;
  std::map<std::string, std::vector<Version>> versions;
  std::vector<Package> packages;
  for (int i = 0; i < n; ++i) {
    Package p;
    p.name = names[rng.next(static_cast<std::uint32_t>(names.size()))];
    Version& next = next_version[p.name];
    next += 1 + rng.next(2);  // occasional version gaps
    p.version = next;
    versions[p.name].push_back(p.version);
    p.installed = rng.chance(params.installed_per_mille);
    if (rng.chance(params.source_per_mille)) {
      std::uint32_t s = rng.next(static_cast<std::uint32_t>(source_count));
      std::uint32_t v = rng.next(static_cast<std::uint32_t>(versions_per_source[s]));
      p.source = SourceRef{sources[s], "sv" + std::to_string(v + 1)};
    }
    if (rng.chance(params.depends_per_mille)) {
      int clause_count = 1 + static_cast<int>(rng.next(2));
      for (int c = 0; c < clause_count; ++c) {
        DependencyClause clause;
        int atom_count = 1 + static_cast<int>(rng.next(2));
        for (int a = 0; a < atom_count; ++a)
          clause.push_back(random_atom(rng, names, versions, 0));  // depends stay inside the names
        p.depends.push_back(std::move(clause));
      }
    }
    if (rng.chance(params.conflicts_per_mille))
      p.conflicts.push_back(random_atom(rng, names, versions, 0));
    if (rng.chance(params.recommends_per_mille))
      p.recommends = DependencyFormula{{random_atom(rng, names, versions, 0)}};
    packages.push_back(std::move(p));
  }

  // Duplicate (name, version) pairs cannot happen: versions increase per name.
  Universe universe(std::move(packages));

  Request req;
  if (params.with_request) {
    int installs = static_cast<int>(rng.next(3));
    for (int i = 0; i < installs; ++i)
      req.install.push_back(random_atom(rng, names, versions, params.unknown_name_per_mille));
    if (rng.chance(300)) req.remove.push_back(random_atom(rng, names, versions, 0));
    if (rng.chance(300)) {
      VersionConstraint atom = random_atom(rng, names, versions, 0);
      atom.rel = Relation::Any;
      atom.bound.reset();
      req.upgrade.push_back(std::move(atom));
    }
  }
  return {std::move(universe), std::move(req)};
}

}  // namespace cualign
