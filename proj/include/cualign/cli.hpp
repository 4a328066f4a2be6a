#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cualign/criteria.hpp"
#include "cualign/cudf.hpp"

namespace cualign {

// Criteria grammar: comma-separated items, each
//   -NAME                                  (removed, new, changed, notuptodate, unsatrecommends)
//   -unaligned(VARIANT)                    (packages, pairs, version_changes, clusters)
//   -unaligned(clusters:{NAME[,NAME]*})    (cluster criterion restricted to named sources)
// Only minimization is supported; a leading '+' is rejected.
CriterionSpec parse_criteria(const std::string& text);

// Canonical spec string; parse_criteria(render_criteria(s)) == s.
std::string render_criteria(const CriterionSpec& spec);

// Problem size on the reduced problem: sources with more than one version,
// their source versions, their packages, and their cross-version pairs.
std::array<Count, 4> size_tuple(const SourceClusterIndex& idx);

struct RunReport {
  std::string id;
  std::array<Count, 4> size{};  // #srcs, #versions, #packages, #pairs
  std::vector<std::pair<std::string, double>> level_times;
  std::array<Count, 4> measures{};  // unaligned packages, pairs, version changes, clusters
};

// Fixed-width table with one row per run, per-criterion time columns, the
// alignment measure tuple, and a per-column "Total time" footer.
std::string report_table(const std::vector<RunReport>& reports);

struct RunOptions {
  std::string input;  // CUDF file; empty with `seed` set -> generated instance
  std::optional<std::uint32_t> seed;
  std::string criteria = "-removed";
  std::string mode = "solve";               // solve | emit
  std::vector<std::string> emit_formats{};  // any of lp, opb, wcnf
  std::string out_dir = ".";
  std::int64_t budget_nodes = 10'000'000;
  double budget_seconds = 60.0;
  bool report = false;
  bool merge_objectives = false;  // emit a single weighted objective in LP/OPB
};

// Exit codes: 0 success, 1 infeasible (prints FAIL), 2 parse/spec error,
// 3 budget exceeded.
int run(const RunOptions& options, std::ostream& out, std::ostream& err);

}  // namespace cualign
