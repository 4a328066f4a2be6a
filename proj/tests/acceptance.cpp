// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Each check pins exact expected values; tolerances are absolute
// wall-clock bounds stated inline.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cualign/cli.hpp"
#include "cualign/criteria.hpp"
#include "cualign/cudf.hpp"
#include "cualign/generator.hpp"
#include "cualign/milp.hpp"
#include "cualign/sat.hpp"
#include "cualign/solver.hpp"
#include "oracles.hpp"

using namespace cualign;
using namespace cualign::testing;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void report(const std::string& label, bool ok, double seconds, const std::string& detail = "") {
  std::printf("%s  %-70s (%.2fs)%s%s\n", ok ? "PASS" : "FAIL", label.c_str(), seconds,
              detail.empty() ? "" : "  ", detail.c_str());
  if (!ok) ++g_failures;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

std::vector<fs::path> data_files() {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(CUALIGN_DATA_DIR))
    if (entry.path().extension() == ".cudf") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  return files;
}

Count evaluator_measure(Criterion kind, const Universe& u, const Installation& initial,
                        const Installation& sol, const SourceClusterIndex& idx) {
  switch (kind) {
    case Criterion::Removed: return removed_count(u, initial, sol);
    case Criterion::New: return new_count(u, initial, sol);
    case Criterion::Changed: return changed_count(u, initial, sol);
    case Criterion::NotUpToDate: return notuptodate_count(u, sol);
    case Criterion::UnsatRecommends: return unsat_recommends_count(u, sol);
    case Criterion::UnalignedPackages: return unaligned_packages(u, sol, idx);
    case Criterion::UnalignedPairs: return unaligned_pairs(u, sol, idx);
    case Criterion::UnalignedVersionChanges: return unaligned_version_changes(u, sol, idx);
    case Criterion::UnalignedClusters: return unaligned_clusters(u, sol, idx);
  }
  return 0;
}

// --- A1: the five cluster configurations and their exact measure rows -------

void criterion_cluster_table() {
  Timer timer;
  struct RowCase {
    std::vector<int> config;
    std::array<Count, 4> expected;
  };
  const std::vector<RowCase> rows = {
      {{1, 1, 1, 1}, {0, 0, 0, 0}}, {{1, 1, 2, 1}, {4, 3, 1, 1}}, {{1, 1, 2, 2}, {4, 4, 1, 1}},
      {{1, 1, 2, 3}, {4, 5, 2, 1}}, {{1, 2, 3, 4}, {4, 6, 3, 1}},
  };
  bool ok = true;
  std::string detail;
  for (const RowCase& row : rows) {
    Universe u = cluster_universe(row.config);
    Installation all = everything(u);
    MeasureReport m = measure_all(u, all, all, build_cluster_index(u));
    std::array<Count, 4> got{m.unaligned_packages, m.unaligned_pairs, m.unaligned_version_changes,
                             m.unaligned_clusters};
    if (got != row.expected) {
      ok = false;
      detail = "configuration row mismatch";
    }
  }
  double secs = timer.seconds();
  if (secs >= 0.001) {
    ok = false;
    detail = "exceeded the 1 ms bound";
  }
  report("A1: four-package cluster measures, five exact rows, < 1 ms", ok, secs, detail);
}

// --- A2: encoding completions equal measures --------------------------------

void criterion_encoding_equivalence() {
  Timer timer;
  const Criterion kinds[] = {Criterion::UnalignedPackages, Criterion::UnalignedPairs,
                             Criterion::UnalignedVersionChanges, Criterion::UnalignedClusters};
  Request empty;
  bool ok = true;
  std::string detail;
  long points = 0;
  for (std::uint32_t seed = 1; seed <= 200 && ok; ++seed) {
    auto [u, ignored] = generate_instance(seed);  // <= 12 packages, <= 4 sources, <= 3 versions
    Installation initial = Installation::initial_of(u);
    SourceClusterIndex idx = build_cluster_index(u);
    for (Criterion kind : kinds) {
      LinearProgram lp = assemble(u, empty, CriterionSpec{{kind, {}}});
      CompletionOracle oracle(lp, 0);
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << u.size()) && ok; ++mask) {
        Installation s = installation_from_mask(mask, u.size());
        auto completion = oracle.min_objective(s);
        bool feasible = oracle_feasible(u, empty, s);
        if (completion.has_value() != feasible) {
          ok = false;
          detail = "feasible set mismatch at seed " + std::to_string(seed);
          break;
        }
        if (!completion) continue;
        ++points;
        if (*completion != evaluator_measure(kind, u, initial, s, idx)) {
          ok = false;
          detail = "objective != measure for " + to_string(kind) + " at seed " +
                   std::to_string(seed) + " mask " + std::to_string(mask);
        }
      }
    }
  }
  double secs = timer.seconds();
  if (ok && secs >= 60.0) {
    ok = false;
    detail = "exceeded the 60 s bound";
  }
  report("A2: four encodings = measures on 200 universes, every feasible point, < 60 s", ok, secs,
         ok ? std::to_string(points) + " points" : detail);
}

// --- A3: lexicographic solver equals the brute-force oracle -----------------

void criterion_lex_oracle() {
  Timer timer;
  const Criterion seconds_kinds[] = {Criterion::UnalignedPackages, Criterion::UnalignedPairs,
                                     Criterion::UnalignedVersionChanges,
                                     Criterion::UnalignedClusters};
  bool ok = true;
  std::string detail;
  int optimal = 0, infeasible = 0;
  for (std::uint32_t seed = 1; seed <= 200 && ok; ++seed) {
    auto [u, req] = generate_instance(seed, GenParams{.max_packages = 15});
    for (Criterion second : seconds_kinds) {
      CriterionSpec spec{{Criterion::Removed, {}}, {second, {}}};
      SolveResult lex;
      try {
        lex = solve_lex(assemble(u, req, spec));
      } catch (const EncodeError&) {
        lex.status = SolveStatus::Infeasible;
      }
      SolveResult oracle = brute_force(u, req, spec);
      if (lex.status != oracle.status) {
        ok = false;
        detail = "status mismatch at seed " + std::to_string(seed);
        break;
      }
      if (lex.status == SolveStatus::Optimal) {
        ++optimal;
        if (lex.objective_values != oracle.objective_values) {
          ok = false;
          detail = "objective vector mismatch at seed " + std::to_string(seed) + " with " +
                   to_string(second);
          break;
        }
      } else {
        ++infeasible;
      }
    }
  }
  double secs = timer.seconds();
  if (ok && secs >= 300.0) {
    ok = false;
    detail = "exceeded the 5 min bound";
  }
  report("A3: lex solver = oracle on 200 instances x 4 stacks, < 5 min", ok, secs,
         ok ? std::to_string(optimal) + " optimal / " + std::to_string(infeasible) + " infeasible"
            : detail);
}

// --- A4: weighted CNF minimum cost equals the minimum measure ---------------

// Bit-parallel evaluator over package assignments: clause -> (positive mask,
// negative mask); an auxiliary is forced exactly when some clause of its has
// a fully falsified package part.
struct FastWcnf {
  struct AuxClause {
    std::uint64_t pos = 0, neg = 0;
  };
  std::vector<std::pair<std::uint64_t, std::uint64_t>> hard_pkg;  // pos, neg
  std::vector<std::vector<AuxClause>> aux_clauses;                // per soft aux

  FastWcnf(const WeightedFormula& f, const LinearProgram& lp) {
    std::map<VarId, std::size_t> aux_index;
    for (std::size_t k = 0; k < f.soft.size(); ++k) aux_index[lit_var(f.soft[k].lit)] = k;
    aux_clauses.resize(f.soft.size());
    for (const Clause& c : f.hard) {
      std::uint64_t pos = 0, neg = 0;
      VarId aux = -1;
      for (Lit l : c) {
        const VarInfo& v = lp.var(lit_var(l));
        if (v.kind == VarKind::Package) {
          (l > 0 ? pos : neg) |= std::uint64_t{1} << v.ref0;
        } else {
          aux = lit_var(l);
        }
      }
      if (aux < 0)
        hard_pkg.emplace_back(pos, neg);
      else
        aux_clauses[aux_index.at(aux)].push_back({pos, neg});
    }
  }

  // A clause is falsified when no positive package literal is installed and
  // every negated package is installed.
  bool feasible(std::uint64_t s) const {
    for (const auto& [pos, neg] : hard_pkg)
      if ((s & pos) == 0 && (s & neg) == neg) return false;
    return true;
  }

  Count cost(std::uint64_t s) const {
    Count total = 0;
    for (const auto& clauses : aux_clauses)
      for (const AuxClause& c : clauses)
        if ((s & c.pos) == 0 && (s & c.neg) == c.neg) {
          ++total;
          break;
        }
    return total;
  }
};

void criterion_sat_dominance() {
  Timer timer;
  Request empty;
  bool ok = true;
  std::string detail;
  int instances = 0;
  for (std::uint32_t seed = 1; seed <= 200 && ok; ++seed) {
    auto [u, ignored] = generate_instance(seed, GenParams{.max_packages = 15});
    SourceClusterIndex idx = build_cluster_index(u);
    std::set<std::string> reduced = reduced_sources(idx);
    Installation initial = Installation::initial_of(u);

    for (Criterion kind : {Criterion::UnalignedPackages, Criterion::UnalignedPairs}) {
      LinearProgram lp;
      WeightedFormula f;
      clausify_base(lp, u, empty, f);
      if (kind == Criterion::UnalignedPackages)
        clausify_unaligned_packages(lp, u, idx, reduced, f);
      else
        clausify_unaligned_pairs(lp, u, idx, reduced, f);
      FastWcnf fast(f, lp);

      std::optional<Count> min_cost, min_measure;
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << u.size()); ++mask) {
        if (!fast.feasible(mask)) continue;
        Count c = fast.cost(mask);
        if (!min_cost || c < *min_cost) min_cost = c;
        Installation s = installation_from_mask(mask, u.size());
        Count m = evaluator_measure(kind, u, initial, s, idx);
        if (!min_measure || m < *min_measure) min_measure = m;
        if (c != m) {  // dominance also matches pointwise on this encoding
          ok = false;
          detail = "pointwise cost mismatch at seed " + std::to_string(seed);
          break;
        }
      }
      if (min_cost != min_measure) {
        ok = false;
        detail = "min-cost mismatch at seed " + std::to_string(seed);
      }
      if (!ok) break;
      ++instances;
    }
  }
  report("A4: weighted CNF min cost = minimum measure (packages, pairs), 200 instances", ok,
         timer.seconds(), ok ? std::to_string(instances) + " formulas" : detail);
}

// --- A5: the doc/binary pair needs the alignment level ----------------------

void criterion_doc_binary_pair() {
  Timer timer;
  bool ok = true;
  std::string detail;
  auto [u, req] = parse_cudf(slurp(fs::path(CUALIGN_DATA_DIR) / "doc-binary-pair.cudf"));
  SourceClusterIndex idx = build_cluster_index(u);
  Installation initial = Installation::initial_of(u);

  SolveResult removed_only = solve_lex(assemble(u, req, CriterionSpec{{Criterion::Removed, {}}}));
  if (removed_only.status != SolveStatus::Optimal) {
    ok = false;
    detail = "removed-only solve failed";
  }
  Count removed_opt = ok ? removed_only.objective_values[0] : 0;

  // the removed level alone admits an optimal yet unaligned configuration
  bool admits_unaligned = false;
  for (std::uint64_t mask = 0; ok && mask < (std::uint64_t{1} << u.size()); ++mask) {
    Installation s = installation_from_mask(mask, u.size());
    if (!oracle_feasible(u, req, s)) continue;
    if (oracle_removed(u, initial, s) == removed_opt && oracle_unaligned_packages(u, s) > 0)
      admits_unaligned = true;
  }
  if (ok && !admits_unaligned) {
    ok = false;
    detail = "no unaligned optimum exists under removed alone";
  }

  if (ok) {
    CriterionSpec both{{Criterion::Removed, {}}, {Criterion::UnalignedPackages, {}}};
    SolveResult lex = solve_lex(assemble(u, req, both));
    if (lex.status != SolveStatus::Optimal || lex.objective_values[0] != removed_opt ||
        lex.objective_values[1] != 0 || unaligned_packages(u, *lex.solution, idx) != 0) {
      ok = false;
      detail = "alignment level failed to clean up the pair";
    }
  }
  report("A5: doc/binary pair: removed admits unaligned optimum, alignment level clears it", ok,
         timer.seconds(), detail);
}

// --- A6: emit determinism ----------------------------------------------------

void criterion_emit_determinism() {
  Timer timer;
  bool ok = true;
  std::string detail;
  fs::path base = fs::temp_directory_path() / "cualign-acceptance-emit";
  fs::remove_all(base);

  RunOptions options;
  options.input = (fs::path(CUALIGN_DATA_DIR) / "kernel-mix.cudf").string();
  options.criteria = "-removed,-unaligned(packages),-unaligned(pairs)";
  options.mode = "emit";
  options.emit_formats = {"lp", "opb", "wcnf"};

  std::vector<std::string> rounds;
  for (int round = 0; round < 2 && ok; ++round) {
    options.out_dir = (base / std::to_string(round)).string();
    std::ostringstream out, err;
    if (run(options, out, err) != 0) {
      ok = false;
      detail = "emit run failed: " + err.str();
      break;
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(options.out_dir)) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    bool has_lp = false, has_opb = false, has_wcnf = false;
    std::string all;
    for (const fs::path& p : files) {
      all += p.filename().string() + "\n" + slurp(p);
      has_lp = has_lp || p.extension() == ".lp";
      has_opb = has_opb || p.extension() == ".opb";
      has_wcnf = has_wcnf || p.extension() == ".wcnf";
    }
    if (!has_lp || !has_opb || !has_wcnf) {
      ok = false;
      detail = "missing emitted format";
    }
    rounds.push_back(all);
  }
  if (ok && rounds[0] != rounds[1]) {
    ok = false;
    detail = "outputs differ between runs";
  }
  report("A6: two emit runs produce byte-identical LP, OPB, and WCNF files", ok, timer.seconds(),
         detail);
}

// --- A7: bundled instances within the default budget ------------------------

void criterion_bundled_instances() {
  Timer timer;
  bool ok = true;
  std::string detail;
  int solved = 0, infeasible = 0;
  const Criterion kinds[] = {Criterion::UnalignedPackages, Criterion::UnalignedPairs,
                             Criterion::UnalignedVersionChanges, Criterion::UnalignedClusters};
  for (const fs::path& file : data_files()) {
    auto [u, req] = parse_cudf(slurp(file));
    if (u.size() > 15) {
      ok = false;
      detail = file.filename().string() + " exceeds 15 packages";
      break;
    }
    for (Criterion second : kinds) {
      CriterionSpec spec{{Criterion::Removed, {}}, {second, {}}};
      SolveResult r;
      try {
        r = solve_lex(assemble(u, req, spec));  // default budget
      } catch (const EncodeError&) {
        ++infeasible;
        continue;
      }
      if (r.status == SolveStatus::BudgetExceeded) {
        ok = false;
        detail = file.filename().string() + " blew the default budget";
        break;
      }
      if (r.status == SolveStatus::Optimal) {
        ++solved;
        if (!verify(u, req, *r.solution).empty()) {
          ok = false;
          detail = file.filename().string() + " produced an invalid solution";
          break;
        }
      } else {
        ++infeasible;
      }
    }
    if (!ok) break;
  }
  report("A7: bundled instances solve in the default budget and all solutions verify", ok,
         timer.seconds(),
         ok ? std::to_string(solved) + " solved / " + std::to_string(infeasible) + " infeasible"
            : detail);
}

}  // namespace

int main() {
  criterion_cluster_table();
  criterion_encoding_equivalence();
  criterion_lex_oracle();
  criterion_sat_dominance();
  criterion_doc_binary_pair();
  criterion_emit_determinism();
  criterion_bundled_instances();
  if (g_failures != 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}
