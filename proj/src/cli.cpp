#include "cualign/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "cualign/generator.hpp"
#include "cualign/milp.hpp"
#include "cualign/sat.hpp"
#include "cualign/solver.hpp"

namespace cualign {

namespace {

// Splits on commas that are not nested inside parentheses or braces.
std::vector<std::pair<std::string, std::size_t>> split_items(const std::string& text) {
  std::vector<std::pair<std::string, std::size_t>> items;
  std::string cur;
  std::size_t start = 0;
  int depth = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '(' || c == '{') ++depth;
    if (c == ')' || c == '}') --depth;
    if (c == ',' && depth == 0) {
      items.emplace_back(cur, start);
      cur.clear();
      start = i + 1;
    } else {
      cur.push_back(c);
    }
  }
  items.emplace_back(cur, start);
  return items;
}

std::string strip(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void spec_fail(const std::string& msg, std::size_t pos) {
  throw SpecError(msg + " (at position " + std::to_string(pos) + ")");
}

CriterionItem parse_item(const std::string& raw, std::size_t pos) {
  std::string item = strip(raw);
  if (item.empty()) spec_fail("empty criterion", pos);
  if (item[0] == '+') spec_fail("unsupported sign '+' (only minimization is available)", pos);
  if (item[0] != '-') spec_fail("criterion must start with '-'", pos);
  std::string body = item.substr(1);

  static const std::map<std::string, Criterion> classic = {
      {"removed", Criterion::Removed},
      {"new", Criterion::New},
      {"changed", Criterion::Changed},
      {"notuptodate", Criterion::NotUpToDate},
      {"unsatrecommends", Criterion::UnsatRecommends}};
  if (auto it = classic.find(body); it != classic.end()) return CriterionItem{it->second, {}};

  if (body.rfind("unaligned(", 0) == 0 && body.back() == ')') {
    std::string variant = body.substr(10, body.size() - 11);
    if (variant == "packages") return CriterionItem{Criterion::UnalignedPackages, {}};
    if (variant == "pairs") return CriterionItem{Criterion::UnalignedPairs, {}};
    if (variant == "version_changes") return CriterionItem{Criterion::UnalignedVersionChanges, {}};
    if (variant == "clusters") return CriterionItem{Criterion::UnalignedClusters, {}};
    if (variant.rfind("clusters:{", 0) == 0 && variant.back() == '}') {
      std::string list = variant.substr(10, variant.size() - 11);
      std::set<std::string> sources;
      for (const auto& part : split_items(list)) {
        std::string src = strip(part.first);
        if (src.empty()) spec_fail("empty source name in cluster restriction", pos);
        sources.insert(src);
      }
      return CriterionItem{Criterion::UnalignedClusters, ClusterRestriction(std::move(sources))};
    }
    spec_fail("unknown unaligned variant '" + variant + "'", pos);
  }
  spec_fail("unknown criterion '" + body + "'", pos);
}

}  // namespace

CriterionSpec parse_criteria(const std::string& text) {
  if (strip(text).empty()) throw SpecError("criteria spec must be non-empty");
  CriterionSpec spec;
  for (const auto& [item, pos] : split_items(text)) spec.push_back(parse_item(item, pos));
  return spec;
}

std::string render_criteria(const CriterionSpec& spec) {
  std::string out;
  for (const CriterionItem& item : spec) {
    if (!out.empty()) out += ",";
    if (item.restriction) {
      std::string list;
      for (const std::string& s : *item.restriction) list += (list.empty() ? "" : ",") + s;
      out += "-unaligned(clusters:{" + list + "})";
    } else {
      out += "-" + to_string(item.kind);
    }
  }
  return out;
}

std::array<Count, 4> size_tuple(const SourceClusterIndex& idx) {
  std::array<Count, 4> t{0, 0, 0, 0};
  for (const auto& [source, versions] : idx.sources()) {
    if (versions.size() < 2) continue;
    ++t[0];
    t[1] += static_cast<Count>(versions.size());
    Count before = 0;
    for (const auto& [token, pkgs] : versions) {
      Count k = static_cast<Count>(pkgs.size());
      t[2] += k;
      t[3] += before * k;
      before += k;
    }
  }
  return t;
}

std::string report_table(const std::vector<RunReport>& reports) {
  std::ostringstream out;
  auto fmt_time = [](double s) {
    std::ostringstream t;
    t << std::fixed << std::setprecision(2) << s;
    return t.str();
  };

  std::vector<std::string> labels;
  if (!reports.empty())
    for (const auto& [label, t] : reports.front().level_times) labels.push_back(label);

  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header{"instance", "size(#srcs,#vs,#pkgs,#pairs)"};
  for (const std::string& l : labels) header.push_back(l);
  header.push_back("unaligned(p,pp,vc,c)");
  cells.push_back(header);

  std::vector<double> totals(labels.size(), 0.0);
  for (const RunReport& r : reports) {
    std::vector<std::string> row{r.id, std::to_string(r.size[0]) + "," + std::to_string(r.size[1]) +
                                           "," + std::to_string(r.size[2]) + "," +
                                           std::to_string(r.size[3])};
    for (std::size_t k = 0; k < labels.size(); ++k) {
      double t = k < r.level_times.size() ? r.level_times[k].second : 0.0;
      totals[k] += t;
      row.push_back(fmt_time(t));
    }
    row.push_back("(" + std::to_string(r.measures[0]) + "," + std::to_string(r.measures[1]) + "," +
                  std::to_string(r.measures[2]) + "," + std::to_string(r.measures[3]) + ")");
    cells.push_back(std::move(row));
  }
  std::vector<std::string> footer{"Total time", ""};
  double grand = 0.0;
  for (double t : totals) grand += t;
  if (labels.empty()) {
    footer[1] = fmt_time(grand);
  } else {
    for (double t : totals) footer.push_back(fmt_time(t));
    footer.push_back("");
  }
  cells.push_back(std::move(footer));

  std::vector<std::size_t> widths;
  for (const auto& row : cells)
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (widths.size() <= c) widths.push_back(0);
      widths[c] = std::max(widths[c], row[c].size());
    }
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << std::left << std::setw(static_cast<int>(widths[c])) << row[c];
      if (c + 1 < row.size()) out << "  ";
    }
    out << "\n";
  }
  return out.str();
}

namespace {

std::string wcnf_slug(Criterion kind) {
  return kind == Criterion::UnalignedPackages ? "unaligned_packages" : "unaligned_pairs";
}

int run_solve(const RunOptions& options, const std::string& id, const Universe& u,
              const Request& req, const CriterionSpec& spec, std::ostream& out,
              std::ostream& err) {
  LinearProgram lp = assemble(u, req, spec);
  SolveBudget budget{options.budget_nodes, options.budget_seconds};
  SolveResult result = solve_lex(lp, budget);
  if (result.status == SolveStatus::Infeasible) {
    out << "FAIL\n";
    return 1;
  }
  if (result.status == SolveStatus::BudgetExceeded) {
    err << "budget exceeded (nodes: " << result.nodes << ")\n";
    return 3;
  }
  out << serialize_solution(u, result.solution);
  if (options.report) {
    SourceClusterIndex idx = build_cluster_index(u);
    MeasureReport m = measure_all(u, Installation::initial_of(u), *result.solution, idx);
    RunReport report;
    report.id = id;
    report.size = size_tuple(idx);
    for (std::size_t k = 0; k < spec.size(); ++k)
      report.level_times.emplace_back(
          spec[k].restriction ? render_criteria({spec[k]}).substr(1) : to_string(spec[k].kind),
          result.level_seconds[k]);
    report.measures = {m.unaligned_packages, m.unaligned_pairs, m.unaligned_version_changes,
                       m.unaligned_clusters};
    out << "\n" << report_table({report});
  }
  return 0;
}

int run_emit(const RunOptions& options, const std::string& id, const Universe& u,
             const Request& req, const CriterionSpec& spec, std::ostream& out, std::ostream& err) {
  namespace fs = std::filesystem;
  fs::create_directories(options.out_dir);
  LpObjectivePolicy policy = options.merge_objectives ? LpObjectivePolicy::WeightedLexMerge
                                                      : LpObjectivePolicy::FirstObjective;
  LinearProgram lp = assemble(u, req, spec);
  SourceClusterIndex idx = build_cluster_index(u);
  std::set<std::string> reduced = reduced_sources(idx);

  auto write_file = [&](const std::string& name, const std::string& content) {
    fs::path path = fs::path(options.out_dir) / name;
    std::ofstream f(path, std::ios::binary);
    f << content;
    if (!f) throw std::runtime_error("cannot write " + path.string());
    out << path.string() << "\n";
  };

  for (const std::string& fmt : options.emit_formats) {
    if (fmt == "lp") {
      write_file(id + ".lp", emit_lp(lp, policy));
      write_file(id + ".names", emit_name_map(lp));
    } else if (fmt == "opb") {
      write_file(id + ".opb", emit_opb(lp, policy));
    } else if (fmt == "wcnf") {
      bool any = false;
      for (std::size_t k = 0; k < spec.size(); ++k) {
        const CriterionItem& item = spec[k];
        if (item.kind != Criterion::UnalignedPackages && item.kind != Criterion::UnalignedPairs)
          continue;
        any = true;
        std::set<std::string> scope;
        for (const std::string& s : reduced)
          if (cluster_selected(item.restriction, s)) scope.insert(s);
        WeightedFormula f;
        clausify_base(lp, u, req, f);
        if (item.kind == Criterion::UnalignedPackages)
          clausify_unaligned_packages(lp, u, idx, scope, f);
        else
          clausify_unaligned_pairs(lp, u, idx, scope, f);
        write_file(id + ".L" + std::to_string(k) + "." + wcnf_slug(item.kind) + ".wcnf",
                   emit_wcnf(f, lp.var_count()));
      }
      if (!any)
        err << "warning: no clausal criterion (unaligned packages/pairs) in the stack; "
               "no wcnf written\n";
    } else {
      err << "unknown emit format '" << fmt << "'\n";
      return 2;
    }
  }
  return 0;
}

}  // namespace

int run(const RunOptions& options, std::ostream& out, std::ostream& err) {
  Universe universe;
  Request request;
  std::string id;
  try {
    if (!options.input.empty()) {
      std::ifstream f(options.input, std::ios::binary);
      if (!f) {
        err << "cannot read " << options.input << "\n";
        return 2;
      }
      std::ostringstream text;
      text << f.rdbuf();
      std::tie(universe, request) = parse_cudf(text.str());
      id = std::filesystem::path(options.input).stem().string();
    } else if (options.seed) {
      std::tie(universe, request) = generate_instance(*options.seed);
      id = "seed" + std::to_string(*options.seed);
    } else {
      err << "no input: pass --input <file> or --seed <n>\n";
      return 2;
    }

    CriterionSpec spec = parse_criteria(options.criteria);

    if (options.mode == "solve") return run_solve(options, id, universe, request, spec, out, err);
    if (options.mode == "emit") {
      if (options.emit_formats.empty()) {
        err << "emit mode needs --emit with one of lp, opb, wcnf\n";
        return 2;
      }
      return run_emit(options, id, universe, request, spec, out, err);
    }
    err << "unknown mode '" << options.mode << "'\n";
    return 2;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const SpecError& e) {
    err << "criteria error: " << e.what() << "\n";
    return 2;
  } catch (const EncodeError& e) {
    // Request atoms that match nothing make the instance trivially unsolvable.
    err << "unsatisfiable request: " << e.what() << "\n";
    out << "FAIL\n";
    return 1;
  }
}

}  // namespace cualign
