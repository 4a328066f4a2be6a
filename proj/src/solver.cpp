#include "cualign/solver.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <limits>
#include <stdexcept>

#include "cualign/milp.hpp"

namespace cualign {

namespace {

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

struct Row {
  std::vector<std::pair<std::int32_t, std::int64_t>> terms;  // (solver var, coefficient)
  std::int64_t lo = -kInf;
  std::int64_t hi = kInf;
  // Activity range of the current partial assignment.
  std::int64_t min_act = 0;
  std::int64_t max_act = 0;
};

struct ObjTerm {
  std::int64_t coef;  // > 0
  std::int8_t when;   // contributes when the variable takes this value
};

class BudgetExceeded {};

// DFS branch and bound over 0-1 variables with fixpoint bounds propagation.
// All integer bookkeeping variables must have been eliminated by substitution
// before the model is built.
class BinarySolver {
 public:
  BinarySolver(const LinearProgram& lp, std::size_t level, const SolveBudget& budget)
      : lp_(lp), budget_(budget) {
    build(level);
  }

  SolveResult run() {
    SolveResult result;
    auto t0 = std::chrono::steady_clock::now();
    deadline_ = t0 + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                         std::chrono::duration<double>(budget_.max_seconds));
    bool feasible_root = true;
    for (std::size_t i = 0; i < fixed_.size() && feasible_root; ++i)
      if (fixed_[i] >= 0 && !assign(static_cast<std::int32_t>(i), fixed_[i])) feasible_root = false;
    if (feasible_root && !propagate()) feasible_root = false;

    try {
      if (feasible_root) search(0);
    } catch (const BudgetExceeded&) {
      result.status = SolveStatus::BudgetExceeded;
      result.nodes = nodes_;
      result.seconds = elapsed(t0);
      return result;
    }

    result.nodes = nodes_;
    result.seconds = elapsed(t0);
    if (!best_vals_.empty()) {
      result.status = SolveStatus::Optimal;
      result.objective_values.push_back(best_obj_);
      fill_assignment(result);
    } else {
      result.status = SolveStatus::Infeasible;
    }
    return result;
  }

 private:
  static double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }

  void build(std::size_t level) {
    if (level >= lp_.objectives().size()) throw std::logic_error("objective level out of range");
    // Free (non-defined) variables become solver variables; all must be 0-1.
    var_of_.assign(lp_.var_count(), -1);
    for (std::size_t i = 0; i < lp_.var_count(); ++i) {
      VarId v = static_cast<VarId>(i);
      if (lp_.definitions().count(v)) continue;
      const VarInfo& info = lp_.var(v);
      if (!info.is_binary())
        throw std::logic_error("solver requires 0-1 variables after substitution: " + info.tag);
      var_of_[i] = static_cast<std::int32_t>(handles_.size());
      handles_.push_back(v);
    }
    std::size_t n = handles_.size();
    vals_.assign(n, -1);
    fixed_.assign(n, -1);
    pref_.assign(n, 0);
    rows_of_.assign(n, {});
    obj_of_.assign(n, ObjTerm{0, 0});

    for (std::size_t i = 0; i < n; ++i) {
      const VarInfo& info = lp_.var(handles_[i]);
      if (info.lower == info.upper) fixed_[i] = static_cast<std::int8_t>(info.lower);
      if (info.kind == VarKind::Package) pref_[i] = static_cast<std::int8_t>(info.ref1 == 1);
    }

    for (const LinearConstraint& c : lp_.constraints()) add_row(lp_.substitute(c.terms), c.rel, c.rhs);

    // Objective in positive-literal form: coef > 0 counted when val == when.
    obj_const_ = 0;
    std::vector<char> in_obj(n, 0);
    for (const LinearTerm& t : lp_.substitute(lp_.objectives()[level].terms)) {
      std::int32_t x = var_of_[t.var];
      if (x < 0) throw std::logic_error("objective over defined variable after substitution");
      in_obj[static_cast<std::size_t>(x)] = 1;
      if (t.coef > 0) {
        obj_of_[x] = ObjTerm{t.coef, 1};
        pref_[x] = lp_.var(handles_[x]).kind == VarKind::Package ? pref_[x] : std::int8_t{0};
      } else {
        obj_const_ += t.coef;  // c*x = c + |c|*(1-x)
        obj_of_[x] = ObjTerm{-t.coef, 0};
        pref_[x] = lp_.var(handles_[x]).kind == VarKind::Package ? pref_[x] : std::int8_t{1};
      }
    }

    // Branch order: package variables first (they determine every auxiliary
    // through propagation), objective members ahead of the rest, then handle
    // order, i.e. name and version.
    for (std::size_t i = 0; i < n; ++i) order_.push_back(static_cast<std::int32_t>(i));
    std::stable_sort(order_.begin(), order_.end(), [&](std::int32_t a, std::int32_t b) {
      bool pa = lp_.var(handles_[a]).kind == VarKind::Package;
      bool pb = lp_.var(handles_[b]).kind == VarKind::Package;
      if (pa != pb) return pa;
      bool oa = in_obj[static_cast<std::size_t>(a)] != 0;
      bool ob = in_obj[static_cast<std::size_t>(b)] != 0;
      if (oa != ob) return oa;
      return a < b;
    });
  }

  void add_row(const LinearExpr& terms, Cmp rel, std::int64_t rhs) {
    Row row;
    for (const LinearTerm& t : terms) {
      std::int32_t x = var_of_[t.var];
      if (x < 0) throw std::logic_error("constraint over defined variable after substitution");
      row.terms.emplace_back(x, t.coef);
      row.min_act += std::min<std::int64_t>(0, t.coef);
      row.max_act += std::max<std::int64_t>(0, t.coef);
    }
    if (rel != Cmp::Le) row.lo = rhs;
    if (rel != Cmp::Ge) row.hi = rhs;
    std::int32_t r = static_cast<std::int32_t>(rows_.size());
    for (const auto& [x, coef] : row.terms) rows_of_[static_cast<std::size_t>(x)].push_back(r);
    rows_.push_back(std::move(row));
  }

  bool assign(std::int32_t x, std::int8_t value) {
    if (vals_[static_cast<std::size_t>(x)] >= 0)
      return vals_[static_cast<std::size_t>(x)] == value;
    vals_[static_cast<std::size_t>(x)] = value;
    trail_.push_back(x);
    const ObjTerm& o = obj_of_[static_cast<std::size_t>(x)];
    if (o.coef > 0 && o.when == value) obj_lb_ += o.coef;
    for (std::int32_t r : rows_of_[static_cast<std::size_t>(x)]) {
      Row& row = rows_[static_cast<std::size_t>(r)];
      for (const auto& [y, coef] : row.terms)
        if (y == x) {
          row.min_act += coef * value - std::min<std::int64_t>(0, coef);
          row.max_act += coef * value - std::max<std::int64_t>(0, coef);
        }
      pending_.push_back(r);
    }
    return true;
  }

  void undo_to(std::size_t mark) {
    while (trail_.size() > mark) {
      std::int32_t x = trail_.back();
      trail_.pop_back();
      std::int8_t value = vals_[static_cast<std::size_t>(x)];
      const ObjTerm& o = obj_of_[static_cast<std::size_t>(x)];
      if (o.coef > 0 && o.when == value) obj_lb_ -= o.coef;
      for (std::int32_t r : rows_of_[static_cast<std::size_t>(x)]) {
        Row& row = rows_[static_cast<std::size_t>(r)];
        for (const auto& [y, coef] : row.terms)
          if (y == x) {
            row.min_act += std::min<std::int64_t>(0, coef) - coef * value;
            row.max_act += std::max<std::int64_t>(0, coef) - coef * value;
          }
      }
      vals_[static_cast<std::size_t>(x)] = -1;
    }
  }

  // Fixpoint bounds propagation over the pending rows. Returns false on
  // conflict; the trail keeps everything undoable either way.
  bool propagate() {
    while (!pending_.empty()) {
      std::int32_t r = pending_.back();
      pending_.pop_back();
      Row& row = rows_[static_cast<std::size_t>(r)];
      if (row.min_act > row.hi || row.max_act < row.lo) return false;
      for (const auto& [y, coef] : row.terms) {
        if (vals_[static_cast<std::size_t>(y)] >= 0) continue;
        // Value v is impossible if it pushes the row outside [lo, hi].
        std::int64_t min_without = row.min_act - std::min<std::int64_t>(0, coef);
        std::int64_t max_without = row.max_act - std::max<std::int64_t>(0, coef);
        bool zero_ok = min_without <= row.hi && max_without >= row.lo;
        bool one_ok = min_without + coef <= row.hi && max_without + coef >= row.lo;
        if (!zero_ok && !one_ok) return false;
        if (zero_ok != one_ok) {
          if (!assign(y, one_ok ? 1 : 0)) return false;
        }
      }
    }
    return true;
  }

  void check_budget() {
    if (nodes_ > budget_.max_nodes) throw BudgetExceeded{};
    if ((nodes_ & 1023) == 0 && std::chrono::steady_clock::now() > deadline_)
      throw BudgetExceeded{};
  }

  // `from` is a position in order_; everything before it is already assigned.
  void search(std::size_t from) {
    ++nodes_;
    check_budget();
    if (!best_vals_.empty() && obj_lb_ >= best_obj_) return;

    while (from < order_.size() && vals_[static_cast<std::size_t>(order_[from])] >= 0) ++from;
    if (from == order_.size()) {
      best_obj_ = obj_lb_;
      best_vals_ = vals_;
      return;
    }
    std::int32_t x = order_[from];
    std::int8_t first = pref_[static_cast<std::size_t>(x)];
    for (std::int8_t value : {first, static_cast<std::int8_t>(1 - first)}) {
      std::size_t mark = trail_.size();
      pending_.clear();
      if (assign(x, value) && propagate()) search(from + 1);
      undo_to(mark);
    }
  }

  void fill_assignment(SolveResult& result) const {
    result.assignment.assign(lp_.var_count(), 0);
    for (std::size_t i = 0; i < handles_.size(); ++i)
      result.assignment[static_cast<std::size_t>(handles_[i])] = best_vals_[i];
    // Defined variables take the value of their defining expression.
    for (const auto& [v, def] : lp_.definitions()) {
      std::int64_t value = 0;
      for (const LinearTerm& t : lp_.substitute(def))
        value += t.coef * result.assignment[static_cast<std::size_t>(t.var)];
      result.assignment[static_cast<std::size_t>(v)] = value;
    }
    std::size_t pkg_count = 0;
    for (std::size_t i = 0; i < lp_.var_count(); ++i)
      if (lp_.var(static_cast<VarId>(i)).kind == VarKind::Package) ++pkg_count;
    Installation inst(pkg_count);
    for (std::size_t i = 0; i < lp_.var_count(); ++i) {
      const VarInfo& info = lp_.var(static_cast<VarId>(i));
      if (info.kind == VarKind::Package && result.assignment[i] == 1) inst.add(info.ref0);
    }
    result.solution = inst;
  }

  const LinearProgram& lp_;
  SolveBudget budget_;
  std::chrono::steady_clock::time_point deadline_;

  std::vector<VarId> handles_;        // solver var -> VarId
  std::vector<std::int32_t> var_of_;  // VarId -> solver var (-1 for defined)
  std::vector<std::int8_t> vals_;
  std::vector<std::int8_t> fixed_;
  std::vector<std::int8_t> pref_;
  std::vector<std::vector<std::int32_t>> rows_of_;
  std::vector<Row> rows_;
  std::vector<ObjTerm> obj_of_;
  std::vector<std::int32_t> order_;
  std::vector<std::int32_t> trail_;
  std::vector<std::int32_t> pending_;
  std::int64_t obj_const_ = 0;
  std::int64_t obj_lb_ = 0;

  std::int64_t nodes_ = 0;
  std::int64_t best_obj_ = kInf;
  std::vector<std::int8_t> best_vals_;

 public:
  std::int64_t objective_constant() const { return obj_const_; }
};

}  // namespace

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::BudgetExceeded: return "budget_exceeded";
  }
  return "?";
}

SolveResult solve_single(const LinearProgram& lp, std::size_t level, const SolveBudget& budget) {
  BinarySolver solver(lp, level, budget);
  SolveResult result = solver.run();
  if (result.status == SolveStatus::Optimal)
    result.objective_values.back() += solver.objective_constant();
  result.level_seconds.push_back(result.seconds);
  return result;
}

SolveResult solve_lex(const LinearProgram& lp, const SolveBudget& budget) {
  if (lp.objectives().empty()) throw std::logic_error("solve_lex requires at least one objective");
  LinearProgram work = lp;
  SolveResult total;
  for (std::size_t level = 0; level < lp.objectives().size(); ++level) {
    SolveResult r = solve_single(work, level, budget);
    total.nodes += r.nodes;
    total.seconds += r.seconds;
    total.level_seconds.push_back(r.seconds);
    if (r.status != SolveStatus::Optimal) {
      total.status = r.status;
      return total;
    }
    total.objective_values.push_back(r.objective_values.front());
    total.assignment = std::move(r.assignment);
    total.solution = std::move(r.solution);
    if (level + 1 < lp.objectives().size())
      work.add_constraint(work.objectives()[level].terms, Cmp::Le, r.objective_values.front());
  }
  total.status = SolveStatus::Optimal;
  return total;
}

namespace {

// Bitmask model of the direct installability semantics, for universes of at
// most `cap` (<= 63) packages.
struct MaskModel {
  std::vector<std::vector<std::uint64_t>> depends;  // per package, per clause: satisfier mask
  std::vector<std::uint64_t> conflicts;             // per package: conflicting packages
  std::vector<std::uint64_t> install;               // per install atom: any of these
  std::uint64_t removed = 0;                        // none of these
  std::vector<std::uint64_t> upgrade;               // per upgrade atom: exactly one of these
  bool impossible = false;                          // an install/upgrade atom matches nothing

  static MaskModel build(const Universe& u, const Request& req) {
    MaskModel m;
    auto bit = [](PackageId id) { return std::uint64_t{1} << id; };
    m.depends.resize(u.size());
    m.conflicts.assign(u.size(), 0);
    for (std::size_t i = 0; i < u.size(); ++i) {
      const Package& p = u[static_cast<PackageId>(i)];
      for (const DependencyClause& clause : p.depends) {
        std::uint64_t mask = 0;
        for (const VersionConstraint& atom : clause)
          for (PackageId q : expand_constraint(u, atom)) mask |= bit(q);
        m.depends[i].push_back(mask);
      }
      for (const VersionConstraint& atom : p.conflicts)
        for (PackageId q : expand_constraint(u, atom))
          if (q != static_cast<PackageId>(i)) {
            m.conflicts[i] |= bit(q);
            m.conflicts[static_cast<std::size_t>(q)] |= bit(static_cast<PackageId>(i));
          }
    }
    for (const VersionConstraint& atom : req.install) {
      std::uint64_t mask = 0;
      for (PackageId q : expand_constraint(u, atom)) mask |= bit(q);
      if (mask == 0) m.impossible = true;
      m.install.push_back(mask);
    }
    for (const VersionConstraint& atom : req.remove)
      for (PackageId q : expand_constraint(u, atom)) m.removed |= bit(q);
    for (const VersionConstraint& atom : req.upgrade) {
      std::uint64_t mask = 0;
      for (PackageId q : expand_constraint(u, atom)) mask |= bit(q);
      if (mask == 0) m.impossible = true;
      m.upgrade.push_back(mask);
      std::optional<Version> top;
      for (const auto& [version, id] : u.versions_of(atom.name))
        if (u[id].installed && (!top || version > *top)) top = version;
      if (top)
        for (const auto& [version, id] : u.versions_of(atom.name))
          if (version < *top) m.removed |= bit(id);
    }
    return m;
  }

  bool feasible(std::uint64_t s) const {
    if (impossible || (s & removed) != 0) return false;
    for (std::uint64_t mask : install)
      if ((s & mask) == 0) return false;
    for (std::uint64_t mask : upgrade)
      if (std::popcount(s & mask) != 1) return false;
    for (std::uint64_t rest = s; rest != 0;) {
      auto i = static_cast<std::size_t>(std::countr_zero(rest));
      rest &= rest - 1;
      if ((s & conflicts[i]) != 0) return false;
      for (std::uint64_t mask : depends[i])
        if ((s & mask) == 0) return false;
    }
    return true;
  }
};

Count measure_of(Criterion kind, const Universe& u, const Installation& initial,
                 const Installation& sol, const SourceClusterIndex& idx,
                 const ClusterRestriction& r) {
  switch (kind) {
    case Criterion::Removed: return removed_count(u, initial, sol);
    case Criterion::New: return new_count(u, initial, sol);
    case Criterion::Changed: return changed_count(u, initial, sol);
    case Criterion::NotUpToDate: return notuptodate_count(u, sol);
    case Criterion::UnsatRecommends: return unsat_recommends_count(u, sol);
    case Criterion::UnalignedPackages: return unaligned_packages(u, sol, idx, r);
    case Criterion::UnalignedPairs: return unaligned_pairs(u, sol, idx, r);
    case Criterion::UnalignedVersionChanges: return unaligned_version_changes(u, sol, idx, r);
    case Criterion::UnalignedClusters: return unaligned_clusters(u, sol, idx, r);
  }
  return 0;
}

Installation from_mask(std::uint64_t s, std::size_t n) {
  Installation inst(n);
  for (std::size_t i = 0; i < n; ++i)
    if (s & (std::uint64_t{1} << i)) inst.add(static_cast<PackageId>(i));
  return inst;
}

}  // namespace

SolveResult brute_force(const Universe& u, const Request& req, const CriterionSpec& spec,
                        const ClusterRestriction& global, std::size_t cap) {
  if (spec.empty()) throw SpecError("criteria spec must be non-empty");
  for (const CriterionItem& item : spec)
    if (item.restriction && !is_alignment_criterion(item.kind))
      throw SpecError("cluster restriction is only valid on unaligned criteria: " +
                      to_string(item.kind));
  constexpr std::size_t kHardCap = 30;  // 2^30 subsets is already unreasonable
  std::size_t effective_cap = std::min(cap, kHardCap);
  if (u.size() > effective_cap)
    throw std::invalid_argument("brute force cap exceeded: " + std::to_string(u.size()) +
                                " packages, cap " + std::to_string(effective_cap));
  auto t0 = std::chrono::steady_clock::now();

  MaskModel model = MaskModel::build(u, req);
  SourceClusterIndex idx = build_cluster_index(u);
  Installation initial = Installation::initial_of(u);

  std::vector<ClusterRestriction> restrictions;
  for (const CriterionItem& item : spec)
    restrictions.push_back(item.restriction ? item.restriction : global);

  SolveResult result;
  std::vector<Count> best;
  std::uint64_t best_mask = 0;
  std::uint64_t end = std::uint64_t{1} << u.size();
  for (std::uint64_t s = 0; s < end; ++s) {
    ++result.nodes;
    if (!model.feasible(s)) continue;
    Installation sol = from_mask(s, u.size());
    if (best.empty()) {
      best.reserve(spec.size());
      for (std::size_t k = 0; k < spec.size(); ++k)
        best.push_back(measure_of(spec[k].kind, u, initial, sol, idx, restrictions[k]));
      best_mask = s;
      continue;
    }
    // Lexicographic comparison, keeping the first-found installation on ties.
    // Levels before k are equal whenever level k is reached.
    for (std::size_t k = 0; k < spec.size(); ++k) {
      Count v = measure_of(spec[k].kind, u, initial, sol, idx, restrictions[k]);
      if (v > best[k]) break;
      if (v < best[k]) {
        best[k] = v;
        for (std::size_t j = k + 1; j < spec.size(); ++j)
          best[j] = measure_of(spec[j].kind, u, initial, sol, idx, restrictions[j]);
        best_mask = s;
        break;
      }
    }
  }

  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (best.empty()) {
    result.status = SolveStatus::Infeasible;
  } else {
    result.status = SolveStatus::Optimal;
    result.objective_values = best;
    result.solution = from_mask(best_mask, u.size());
  }
  return result;
}

std::vector<std::string> verify(const Universe& u, const Request& req, const Installation& s) {
  std::vector<std::string> violations;
  auto pkg_label = [&](PackageId id) {
    return u[id].name + "=" + std::to_string(u[id].version);
  };

  for (std::size_t i = 0; i < u.size(); ++i) {
    PackageId id = static_cast<PackageId>(i);
    if (!s.contains(id)) continue;
    const Package& p = u[id];
    for (const DependencyClause& clause : p.depends) {
      bool satisfied = false;
      for (const VersionConstraint& atom : clause)
        for (PackageId q : expand_constraint(u, atom)) satisfied = satisfied || s.contains(q);
      if (!satisfied) {
        std::string text;
        for (const VersionConstraint& atom : clause)
          text += (text.empty() ? "" : " | ") + atom.str();
        violations.push_back("package " + pkg_label(id) + ": unsatisfied dependency '" + text +
                             "'");
      }
    }
  }

  std::set<std::pair<PackageId, PackageId>> conflict_pairs;
  for (std::size_t i = 0; i < u.size(); ++i)
    for (const VersionConstraint& atom : u[static_cast<PackageId>(i)].conflicts)
      for (PackageId q : expand_constraint(u, atom))
        if (q != static_cast<PackageId>(i))
          conflict_pairs.insert(std::minmax(static_cast<PackageId>(i), q));
  for (const auto& [a, b] : conflict_pairs)
    if (s.contains(a) && s.contains(b))
      violations.push_back("conflict between " + pkg_label(a) + " and " + pkg_label(b));

  for (const VersionConstraint& atom : req.install) {
    bool satisfied = false;
    for (PackageId q : expand_constraint(u, atom)) satisfied = satisfied || s.contains(q);
    if (!satisfied) violations.push_back("install atom '" + atom.str() + "' not satisfied");
  }
  for (const VersionConstraint& atom : req.remove)
    for (PackageId q : expand_constraint(u, atom))
      if (s.contains(q))
        violations.push_back("remove atom '" + atom.str() + "' violated by " + pkg_label(q));
  for (const VersionConstraint& atom : req.upgrade) {
    int count = 0;
    for (PackageId q : expand_constraint(u, atom)) count += s.contains(q) ? 1 : 0;
    if (count != 1)
      violations.push_back("upgrade atom '" + atom.str() + "' needs exactly one installed version, found " +
                           std::to_string(count));
    std::optional<Version> top;
    for (const auto& [version, id] : u.versions_of(atom.name))
      if (u[id].installed && (!top || version > *top)) top = version;
    if (top)
      for (const auto& [version, id] : u.versions_of(atom.name))
        if (version < *top && s.contains(id))
          violations.push_back("upgrade of " + atom.name + ": version " + std::to_string(version) +
                               " is below initially installed " + std::to_string(*top));
  }
  return violations;
}

}  // namespace cualign
