#include "cualign/cudf.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace cualign {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '-' || c == '.' || c == '+' ||
         c == '_' || c == '@' || c == ':' || c == '/';
}

Version parse_version(const std::string& text, int line) {
  std::string t = trim(text);
  if (t.empty()) throw ParseError("empty version", line);
  for (char c : t)
    if (std::isdigit(static_cast<unsigned char>(c)) == 0)
      throw ParseError("version is not a positive integer: '" + t + "'", line);
  Version v = 0;
  try {
    v = std::stoll(t);
  } catch (const std::exception&) {
    throw ParseError("version out of range: '" + t + "'", line);
  }
  if (v < 1) throw ParseError("version must be >= 1, got " + t, line);
  return v;
}

// Atom grammar: NAME [op VERSION] with op in =, !=, <, <=, >, >=.
VersionConstraint parse_atom(const std::string& text, int line) {
  std::string t = trim(text);
  if (t.empty()) throw ParseError("empty package atom", line);
  std::size_t i = 0;
  while (i < t.size() && is_name_char(t[i])) ++i;
  if (i == 0) throw ParseError("malformed package atom: '" + t + "'", line);
  VersionConstraint c;
  c.name = t.substr(0, i);
  std::string rest = trim(t.substr(i));
  if (rest.empty()) return c;

  static const std::vector<std::pair<std::string, Relation>> ops = {
      {">=", Relation::Geq}, {"<=", Relation::Leq}, {"!=", Relation::Neq},
      {"=", Relation::Eq},   {">", Relation::Gt},   {"<", Relation::Lt}};
  for (const auto& [tok, rel] : ops) {
    if (rest.rfind(tok, 0) == 0) {
      c.rel = rel;
      c.bound = parse_version(rest.substr(tok.size()), line);
      return c;
    }
  }
  throw ParseError("malformed version relation in atom: '" + t + "'", line);
}

std::vector<VersionConstraint> parse_atom_list(const std::string& text, int line) {
  std::vector<VersionConstraint> out;
  std::string t = trim(text);
  if (t.empty()) return out;
  for (const std::string& part : split(t, ',')) out.push_back(parse_atom(part, line));
  return out;
}

// Comma-separated clauses, `|`-separated atoms within a clause.
DependencyFormula parse_formula(const std::string& text, int line) {
  DependencyFormula out;
  std::string t = trim(text);
  if (t.empty()) return out;
  for (const std::string& clause_text : split(t, ',')) {
    DependencyClause clause;
    for (const std::string& atom_text : split(clause_text, '|'))
      clause.push_back(parse_atom(atom_text, line));
    out.push_back(std::move(clause));
  }
  return out;
}

bool parse_bool(const std::string& text, int line) {
  std::string t = trim(text);
  if (t == "true") return true;
  if (t == "false") return false;
  throw ParseError("expected true/false, got '" + t + "'", line);
}

struct Property {
  std::string key;
  std::string value;
  int line;
};

using Stanza = std::vector<Property>;

std::vector<Stanza> read_stanzas(const std::string& text) {
  std::vector<Stanza> stanzas;
  Stanza cur;
  int line_no = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) {
      if (!cur.empty()) stanzas.push_back(std::move(cur));
      cur.clear();
      continue;
    }
    if (line[0] == '#') continue;
    std::size_t colon = line.find(':');
    if (colon == std::string::npos)
      throw ParseError("expected 'key: value', got '" + line + "'", line_no);
    cur.push_back(Property{trim(line.substr(0, colon)), trim(line.substr(colon + 1)), line_no});
  }
  if (!cur.empty()) stanzas.push_back(std::move(cur));
  return stanzas;
}

Package parse_package_stanza(const Stanza& st) {
  Package pkg;
  bool have_version = false;
  std::optional<std::string> source;
  std::optional<std::string> source_version;
  int first_line = st.front().line;
  for (const Property& p : st) {
    if (p.key == "package") {
      if (trim(p.value).empty()) throw ParseError("empty package name", p.line);
      pkg.name = trim(p.value);
    } else if (p.key == "version") {
      pkg.version = parse_version(p.value, p.line);
      have_version = true;
    } else if (p.key == "depends") {
      pkg.depends = parse_formula(p.value, p.line);
    } else if (p.key == "conflicts") {
      pkg.conflicts = parse_atom_list(p.value, p.line);
    } else if (p.key == "recommends") {
      pkg.recommends = parse_formula(p.value, p.line);
    } else if (p.key == "installed") {
      pkg.installed = parse_bool(p.value, p.line);
    } else if (p.key == "source") {
      source = trim(p.value);
    } else if (p.key == "sourceversion") {
      source_version = trim(p.value);
    }
    // Unknown properties are ignored for forward compatibility.
  }
  if (!have_version) throw ParseError("package stanza without version", first_line);
  if (source.has_value() != source_version.has_value())
    throw ParseError("package " + pkg.name + ": source and sourceversion must appear together",
                     first_line);
  if (source) {
    if (source->empty() || source_version->empty())
      throw ParseError("package " + pkg.name + ": empty source metadata", first_line);
    pkg.source = SourceRef{*source, *source_version};
  }
  return pkg;
}

Request parse_request_stanza(const Stanza& st) {
  Request req;
  for (const Property& p : st) {
    if (p.key == "install")
      req.install = parse_atom_list(p.value, p.line);
    else if (p.key == "remove")
      req.remove = parse_atom_list(p.value, p.line);
    else if (p.key == "upgrade")
      req.upgrade = parse_atom_list(p.value, p.line);
  }
  return req;
}

}  // namespace

std::string to_string(Relation r) {
  switch (r) {
    case Relation::Any: return "";
    case Relation::Eq: return "=";
    case Relation::Neq: return "!=";
    case Relation::Lt: return "<";
    case Relation::Leq: return "<=";
    case Relation::Gt: return ">";
    case Relation::Geq: return ">=";
  }
  return "";
}

bool VersionConstraint::matches(Version v) const {
  switch (rel) {
    case Relation::Any: return true;
    case Relation::Eq: return v == *bound;
    case Relation::Neq: return v != *bound;
    case Relation::Lt: return v < *bound;
    case Relation::Leq: return v <= *bound;
    case Relation::Gt: return v > *bound;
    case Relation::Geq: return v >= *bound;
  }
  return false;
}

std::string VersionConstraint::str() const {
  if (rel == Relation::Any) return name;
  return name + " " + to_string(rel) + " " + std::to_string(*bound);
}

const std::map<Version, PackageId> Universe::kNoVersions{};

Universe::Universe(std::vector<Package> packages) : packages_(std::move(packages)) {
  std::sort(packages_.begin(), packages_.end(), [](const Package& a, const Package& b) {
    return a.name != b.name ? a.name < b.name : a.version < b.version;
  });
  for (std::size_t i = 0; i < packages_.size(); ++i) {
    const Package& p = packages_[i];
    auto [it, inserted] = by_name_[p.name].emplace(p.version, static_cast<PackageId>(i));
    if (!inserted)
      throw std::invalid_argument("duplicate package " + p.name + " version " +
                                  std::to_string(p.version));
  }
}

PackageId Universe::find(const std::string& name, Version version) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) return -1;
  auto jt = it->second.find(version);
  return jt == it->second.end() ? -1 : jt->second;
}

const std::map<Version, PackageId>& Universe::versions_of(const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? kNoVersions : it->second;
}

Installation Installation::initial_of(const Universe& u) {
  Installation s(u.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u[static_cast<PackageId>(i)].installed) s.add(static_cast<PackageId>(i));
  return s;
}

std::size_t Installation::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

std::vector<PackageId> Installation::ids() const {
  std::vector<PackageId> out;
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i]) out.push_back(static_cast<PackageId>(i));
  return out;
}

const SourceClusterIndex::VersionMap* SourceClusterIndex::find(const std::string& source) const {
  auto it = clusters_.find(source);
  return it == clusters_.end() ? nullptr : &it->second;
}

std::pair<Universe, Request> parse_cudf(const std::string& text) {
  std::vector<Package> packages;
  std::map<std::pair<std::string, Version>, int> seen;  // (name, version) -> first line
  Request request;
  bool have_request = false;

  for (const Stanza& st : read_stanzas(text)) {
    const std::string& kind = st.front().key;
    if (kind == "package") {
      Package pkg = parse_package_stanza(st);
      auto key = std::make_pair(pkg.name, pkg.version);
      auto [it, inserted] = seen.emplace(key, st.front().line);
      if (!inserted)
        throw ParseError("duplicate package " + pkg.name + " version " +
                             std::to_string(pkg.version) + " (first seen at line " +
                             std::to_string(it->second) + ")",
                         st.front().line);
      packages.push_back(std::move(pkg));
    } else if (kind == "request") {
      if (have_request) throw ParseError("more than one request stanza", st.front().line);
      have_request = true;
      request = parse_request_stanza(st);
    }
    // Other stanza kinds (preamble, ...) are ignored.
  }
  return {Universe(std::move(packages)), request};
}

std::vector<PackageId> expand_constraint(const Universe& u, const VersionConstraint& c) {
  std::vector<PackageId> out;
  for (const auto& [version, id] : u.versions_of(c.name))
    if (c.matches(version)) out.push_back(id);
  return out;
}

SourceClusterIndex build_cluster_index(const Universe& u) {
  SourceClusterIndex idx;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Package& p = u[static_cast<PackageId>(i)];
    if (!p.source) continue;
    idx.clusters_[p.source->source][p.source->source_version].push_back(static_cast<PackageId>(i));
  }
  return idx;
}

std::set<std::string> reduced_sources(const SourceClusterIndex& idx) {
  std::set<std::string> out;
  for (const auto& [source, versions] : idx.sources())
    if (versions.size() >= 2) out.insert(source);
  return out;
}

std::string serialize_solution(const Universe& u, const std::optional<Installation>& s) {
  if (!s) return "FAIL\n";
  std::string out;
  bool first = true;
  for (PackageId id : s->ids()) {  // ids are universe order, i.e. sorted by (name, version)
    const Package& p = u[id];
    if (!first) out += "\n";
    first = false;
    out += "package: " + p.name + "\n";
    out += "version: " + std::to_string(p.version) + "\n";
    out += "installed: true\n";
  }
  return out;
}

namespace {

std::string format_atoms(const std::vector<VersionConstraint>& atoms) {
  std::string out;
  for (const VersionConstraint& a : atoms) out += (out.empty() ? "" : ", ") + a.str();
  return out;
}

std::string format_formula(const DependencyFormula& formula) {
  std::string out;
  for (const DependencyClause& clause : formula) {
    std::string c;
    for (const VersionConstraint& a : clause) c += (c.empty() ? "" : " | ") + a.str();
    out += (out.empty() ? "" : ", ") + c;
  }
  return out;
}

}  // namespace

std::string to_cudf(const Universe& u, const Request& req) {
  std::string out;
  for (const Package& p : u.packages()) {
    out += "package: " + p.name + "\n";
    out += "version: " + std::to_string(p.version) + "\n";
    if (!p.depends.empty()) out += "depends: " + format_formula(p.depends) + "\n";
    if (!p.conflicts.empty()) out += "conflicts: " + format_atoms(p.conflicts) + "\n";
    if (p.recommends && !p.recommends->empty())
      out += "recommends: " + format_formula(*p.recommends) + "\n";
    if (p.installed) out += "installed: true\n";
    if (p.source) {
      out += "source: " + p.source->source + "\n";
      out += "sourceversion: " + p.source->source_version + "\n";
    }
    out += "\n";
  }
  out += "request: upgrade\n";
  if (!req.install.empty()) out += "install: " + format_atoms(req.install) + "\n";
  if (!req.remove.empty()) out += "remove: " + format_atoms(req.remove) + "\n";
  if (!req.upgrade.empty()) out += "upgrade: " + format_atoms(req.upgrade) + "\n";
  return out;
}

}  // namespace cualign
