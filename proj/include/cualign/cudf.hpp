#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace cualign {

// CUDF package versions are positive integers; relations on them are plain
// integer comparisons.
using Version = std::int64_t;

// Index of a package inside a Universe (position in the sorted package list).
using PackageId = std::int32_t;

class ParseError : public std::runtime_error {
 public:
  ParseError(std::string msg, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + std::move(msg)), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

enum class Relation { Any, Eq, Neq, Lt, Leq, Gt, Geq };

std::string to_string(Relation r);

// One dependency/conflict/request atom: a package name plus an optional
// version restriction. `bound` is present exactly when `rel != Any`.
struct VersionConstraint {
  std::string name;
  Relation rel = Relation::Any;
  std::optional<Version> bound;

  bool matches(Version v) const;
  std::string str() const;
  bool operator==(const VersionConstraint&) const = default;
};

// Conjunction of disjunctions. An empty clause list means "no dependencies";
// clauses are never empty.
using DependencyClause = std::vector<VersionConstraint>;
using DependencyFormula = std::vector<DependencyClause>;

// Source cluster membership: the source package name and the version of the
// source the package was built from. Source versions are opaque tokens, only
// ever compared for equality; Debian version syntax is never parsed.
struct SourceRef {
  std::string source;
  std::string source_version;

  bool operator==(const SourceRef&) const = default;
};

struct Package {
  std::string name;
  Version version = 1;
  DependencyFormula depends;
  std::vector<VersionConstraint> conflicts;
  std::optional<DependencyFormula> recommends;
  bool installed = false;
  std::optional<SourceRef> source;
};

struct Request {
  std::vector<VersionConstraint> install;
  std::vector<VersionConstraint> remove;
  std::vector<VersionConstraint> upgrade;

  bool empty() const { return install.empty() && remove.empty() && upgrade.empty(); }
};

// The set of available packages. Immutable after construction; packages are
// kept sorted by (name, version) so iteration order is deterministic.
class Universe {
 public:
  Universe() = default;
  explicit Universe(std::vector<Package> packages);

  std::size_t size() const { return packages_.size(); }
  const Package& operator[](PackageId id) const { return packages_[static_cast<std::size_t>(id)]; }
  const std::vector<Package>& packages() const { return packages_; }

  // -1 when the (name, version) pair is not in the universe.
  PackageId find(const std::string& name, Version version) const;
  // Versions available for a name, in increasing order; empty map for unknown names.
  const std::map<Version, PackageId>& versions_of(const std::string& name) const;
  bool has_name(const std::string& name) const { return by_name_.count(name) != 0; }
  const std::map<std::string, std::map<Version, PackageId>>& names() const { return by_name_; }

 private:
  std::vector<Package> packages_;
  std::map<std::string, std::map<Version, PackageId>> by_name_;
  static const std::map<Version, PackageId> kNoVersions;
};

// A set of installed packages from one Universe, as a bit per PackageId.
class Installation {
 public:
  Installation() = default;
  explicit Installation(std::size_t universe_size) : bits_(universe_size, 0) {}

  static Installation initial_of(const Universe& u);

  bool contains(PackageId id) const { return bits_[static_cast<std::size_t>(id)] != 0; }
  void add(PackageId id) { bits_[static_cast<std::size_t>(id)] = 1; }
  void erase(PackageId id) { bits_[static_cast<std::size_t>(id)] = 0; }
  std::size_t universe_size() const { return bits_.size(); }
  std::size_t count() const;
  std::vector<PackageId> ids() const;

  bool operator==(const Installation&) const = default;

 private:
  std::vector<char> bits_;
};

// Realization of the source-cluster maps: source name -> source version
// token -> packages built from that source version. Packages without source
// metadata appear nowhere.
class SourceClusterIndex {
 public:
  using VersionMap = std::map<std::string, std::vector<PackageId>>;

  const std::map<std::string, VersionMap>& sources() const { return clusters_; }
  const VersionMap* find(const std::string& source) const;
  bool empty() const { return clusters_.empty(); }

  friend SourceClusterIndex build_cluster_index(const Universe& u);

 private:
  std::map<std::string, VersionMap> clusters_;
};

// Reads the CUDF subset: blank-line-separated stanzas of `key: value` lines.
// Stanzas starting with `package:` describe packages, a single stanza starting
// with `request:` carries the user request, all other stanzas and unrecognized
// properties are ignored.
std::pair<Universe, Request> parse_cudf(const std::string& text);

// All (name, version) packages of `u` matching the constraint, sorted by id.
// Unknown names yield an empty set.
std::vector<PackageId> expand_constraint(const Universe& u, const VersionConstraint& c);

SourceClusterIndex build_cluster_index(const Universe& u);

// Sources with more than one available source version.
std::set<std::string> reduced_sources(const SourceClusterIndex& idx);

// CUDF solution document for an installation, or the single line `FAIL` for
// the distinguished "no solution" value.
std::string serialize_solution(const Universe& u, const std::optional<Installation>& s);

// Full CUDF document for a universe and request (all package properties).
std::string to_cudf(const Universe& u, const Request& req);

}  // namespace cualign
