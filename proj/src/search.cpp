#include "zd/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <optional>
#include <queue>
#include <sstream>

#include "zd/cost.hpp"

namespace zd {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) return std::numeric_limits<std::uint64_t>::max();
  return a * b;
}

// Slack for "bound >= incumbent": keeps rounding noise from defeating pruning.
double prune_slack(double incumbent) { return 1e-9 + 1e-10 * std::abs(incumbent); }

struct Leaf {
  std::optional<SubproblemResult> result;
  bool unconverged = false;
};

Leaf solve_leaf(const SystemCase& sc, const ZoneAssignment& a, const SolveOptions& nlp) {
  Bounds b;
  try {
    b = assignment_bounds(sc, a);
  } catch (const DispatchError& e) {
    if (e.kind() == ErrorKind::Infeasible) return {};
    throw;
  }
  try {
    return {solve_nlp(sc, b, nlp), false};
  } catch (const NotConvergedError& e) {
    if (e.best().balance_residual <= nlp.balance_tol) return {e.best(), true};
    return {std::nullopt, true};
  } catch (const DispatchError& e) {
    if (e.kind() == ErrorKind::Infeasible) return {};
    throw;
  }
}

DispatchSolution make_solution(const SystemCase& sc, const ZoneAssignment& a, const SubproblemResult& r) {
  DispatchSolution s;
  s.p = r.p;
  s.assignment = a;
  s.loss_mw = r.loss_mw;
  s.cost = r.cost;
  s.reserve.resize(sc.size());
  for (std::size_t i = 0; i < sc.size(); ++i) s.reserve[i] = reserve_available(sc.units[i], r.p[i]);
  s.balance_residual = r.balance_residual;
  s.converged = r.converged;
  s.starts_used = r.starts_used;
  return s;
}

std::string describe(const ZoneAssignment& a) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < a.zone_index.size(); ++i) os << (i ? "," : "") << a.zone_index[i];
  os << ']';
  return os.str();
}

// Per-unit reachable zones and the hull of their effective bounds.
struct ZoneTable {
  std::vector<std::vector<int>> reachable;
  std::vector<double> hull_lb, hull_ub;

  explicit ZoneTable(const SystemCase& sc) {
    const std::size_t n = sc.size();
    reachable.resize(n);
    hull_lb.resize(n);
    hull_ub.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      reachable[i] = reachable_zones(sc.units[i]);
      if (reachable[i].empty()) {
        throw DispatchError(ErrorKind::Infeasible, "unit '" + sc.units[i].id + "': no zone reachable within ramp window");
      }
      hull_lb[i] = effective_bounds(sc.units[i], reachable[i].front()).lb;
      hull_ub[i] = effective_bounds(sc.units[i], reachable[i].back()).ub;
    }
  }
};

LambdaDispatch relaxation(const SystemCase& sc, const std::vector<double>& lb, const std::vector<double>& ub) {
  return lambda_dispatch(sc.units, lb, ub, sc.demand, sc.loss.has_value());
}

}  // namespace

AssignmentEnumerator::AssignmentEnumerator(const SystemCase& sc) {
  choices_.reserve(sc.size());
  size_ = 1;
  for (const Unit& u : sc.units) {
    choices_.push_back(reachable_zones(u));
    size_ = saturating_mul(size_, choices_.back().size());
  }
  cursor_.assign(sc.size(), 0);
  done_ = size_ == 0;
}

bool AssignmentEnumerator::next(ZoneAssignment& out) {
  if (done_) return false;
  if (started_) {
    std::size_t i = cursor_.size();
    while (i > 0) {
      --i;
      if (++cursor_[i] < choices_[i].size()) break;
      cursor_[i] = 0;
      if (i == 0) {
        done_ = true;
        return false;
      }
    }
    if (cursor_.empty()) {
      done_ = true;
      return false;
    }
  }
  started_ = true;
  out.zone_index.resize(cursor_.size());
  for (std::size_t i = 0; i < cursor_.size(); ++i) out.zone_index[i] = choices_[i][cursor_[i]];
  return true;
}

std::vector<ZoneAssignment> enumerate_assignments(const SystemCase& sc) {
  std::vector<ZoneAssignment> out;
  AssignmentEnumerator it(sc);
  ZoneAssignment a;
  while (it.next(a)) out.push_back(a);
  return out;
}

std::uint64_t assignment_space_size(const SystemCase& sc) {
  std::uint64_t s = 1;
  for (const Unit& u : sc.units) s = saturating_mul(s, static_cast<std::uint64_t>(u.zone_count()));
  return s;
}

std::uint64_t reachable_assignment_count(const SystemCase& sc) {
  std::uint64_t s = 1;
  for (const Unit& u : sc.units) s = saturating_mul(s, reachable_zones(u).size());
  return s;
}

double lower_bound(const SystemCase& sc, std::span<const int> partial) {
  const std::size_t n = sc.size();
  if (partial.size() != n) throw DispatchError(ErrorKind::DimensionMismatch, "partial assignment size mismatch");
  std::vector<double> lb(n), ub(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Unit& u = sc.units[i];
    if (partial[i] >= 0) {
      if (partial[i] >= u.zone_count()) throw DispatchError(ErrorKind::Infeasible, "zone index out of range");
      const Interval iv = effective_bounds(u, partial[i]);
      if (iv.empty()) throw DispatchError(ErrorKind::Infeasible, "unit '" + u.id + "': zone unreachable");
      lb[i] = iv.lb;
      ub[i] = iv.ub;
    } else {
      const auto r = reachable_zones(u);
      if (r.empty()) throw DispatchError(ErrorKind::Infeasible, "unit '" + u.id + "': no zone reachable");
      lb[i] = effective_bounds(u, r.front()).lb;
      ub[i] = effective_bounds(u, r.back()).ub;
    }
  }
  return relaxation(sc, lb, ub).cost;
}

DispatchSolution enumerate_and_solve(const SystemCase& sc, const SearchOptions& opts) {
  const auto t0 = Clock::now();
  const auto assigns = enumerate_assignments(sc);
  SolveOptions inner = opts.nlp;
  const bool parallel = opts.execution == Execution::Parallel && assigns.size() > 1;
  if (parallel) inner.execution = Execution::Serial;

  std::vector<Leaf> leaves(assigns.size());
  std::vector<std::exception_ptr> errors(assigns.size());
  auto body = [&](std::size_t k) {
    try {
      leaves[k] = solve_leaf(sc, assigns[k], inner);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  if (parallel) {
    const auto count = static_cast<std::int64_t>(assigns.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t k = 0; k < count; ++k) body(static_cast<std::size_t>(k));
  } else {
    for (std::size_t k = 0; k < assigns.size(); ++k) body(k);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  SearchStats stats;
  stats.path = "enumeration";
  stats.assignments_total = assignment_space_size(sc);
  stats.assignments_reachable = assigns.size();
  std::size_t best = assigns.size();
  for (std::size_t k = 0; k < assigns.size(); ++k) {
    const Leaf& leaf = leaves[k];
    if (leaf.unconverged) stats.diagnostics.push_back("subproblem not converged for assignment " + describe(assigns[k]));
    if (!leaf.result) {
      ++stats.assignments_infeasible;
      continue;
    }
    ++stats.assignments_solved;
    if (best == assigns.size() || leaf.result->cost < leaves[best].result->cost) {
      best = k;
      stats.incumbent_history.push_back({leaf.result->cost, seconds_since(t0)});
    }
  }
  if (best == assigns.size()) {
    throw DispatchError(ErrorKind::Infeasible, "no zone assignment admits a feasible dispatch");
  }
  DispatchSolution sol = make_solution(sc, assigns[best], *leaves[best].result);
  sol.converged = !leaves[best].unconverged && leaves[best].result->converged;
  sol.stats = std::move(stats);
  sol.solve_time_s = seconds_since(t0);
  return sol;
}

DispatchSolution branch_and_bound(const SystemCase& sc, const SearchOptions& opts) {
  const auto t0 = Clock::now();
  const std::size_t n = sc.size();
  const ZoneTable table(sc);

  SearchStats stats;
  stats.path = "branch_and_bound";
  stats.assignments_total = assignment_space_size(sc);
  stats.assignments_reachable = 1;
  for (const auto& r : table.reachable) stats.assignments_reachable = saturating_mul(stats.assignments_reachable, r.size());

  // Units with one reachable zone are fixed at the root; the rest branch in
  // order of descending zone count.
  std::vector<int> root(n, -1);
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < n; ++i) {
    if (table.reachable[i].size() == 1) {
      root[i] = table.reachable[i][0];
    } else {
      order.push_back(i);
    }
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return table.reachable[a].size() > table.reachable[b].size();
  });

  std::vector<double> lb(n), ub(n);
  auto bound_of = [&](const std::vector<int>& partial) -> std::optional<LambdaDispatch> {
    for (std::size_t i = 0; i < n; ++i) {
      if (partial[i] >= 0) {
        const Interval iv = effective_bounds(sc.units[i], partial[i]);
        lb[i] = iv.lb;
        ub[i] = iv.ub;
      } else {
        lb[i] = table.hull_lb[i];
        ub[i] = table.hull_ub[i];
      }
    }
    try {
      return relaxation(sc, lb, ub);
    } catch (const DispatchError& e) {
      if (e.kind() == ErrorKind::Infeasible) return std::nullopt;
      throw;
    }
  };

  std::optional<SubproblemResult> incumbent;
  ZoneAssignment incumbent_assignment;
  bool incumbent_unconverged = false;
  bool bound_failed = false;
  auto inc_cost = [&]() { return incumbent ? incumbent->cost : std::numeric_limits<double>::infinity(); };
  auto can_prune = [&](double bound) { return opts.pruning && incumbent && bound >= inc_cost() - prune_slack(inc_cost()); };

  auto evaluate_leaf = [&](const std::vector<int>& partial, double bound) {
    ZoneAssignment a{partial};
    const Leaf leaf = solve_leaf(sc, a, opts.nlp);
    if (leaf.unconverged) stats.diagnostics.push_back("subproblem not converged for assignment " + describe(a));
    if (!leaf.result) {
      ++stats.assignments_infeasible;
      return;
    }
    ++stats.assignments_solved;
    if (leaf.result->cost < bound - prune_slack(bound)) {
      std::ostringstream os;
      os.precision(10);
      os << "lower bound " << bound << " exceeds leaf cost " << leaf.result->cost << " at assignment " << describe(a)
         << "; pruning disabled";
      stats.diagnostics.push_back(os.str());
      bound_failed = true;
    }
    if (!incumbent || leaf.result->cost < incumbent->cost) {
      incumbent = leaf.result;
      incumbent_assignment = a;
      incumbent_unconverged = leaf.unconverged;
      stats.incumbent_history.push_back({incumbent->cost, seconds_since(t0)});
    }
  };

  auto fall_back = [&]() {
    DispatchSolution sol = enumerate_and_solve(sc, opts);
    sol.stats.pruning_disabled = true;
    sol.stats.diagnostics.insert(sol.stats.diagnostics.begin(), stats.diagnostics.begin(), stats.diagnostics.end());
    sol.solve_time_s = seconds_since(t0);
    return sol;
  };

  const auto root_relax = bound_of(root);
  ++stats.nodes_created;
  if (!root_relax) throw DispatchError(ErrorKind::Infeasible, "root relaxation cannot meet demand");

  if (order.empty()) {
    evaluate_leaf(root, root_relax->cost);
  } else {
    // Rounding heuristic: put each free unit in the zone holding its relaxed
    // output, or the nearest one.
    std::vector<int> rounded = root;
    for (std::size_t i : order) {
      const double x = root_relax->p[i];
      int pick = table.reachable[i].front();
      double dist = std::numeric_limits<double>::infinity();
      for (int k : table.reachable[i]) {
        const Interval iv = effective_bounds(sc.units[i], k);
        const double d = x < iv.lb ? iv.lb - x : (x > iv.ub ? x - iv.ub : 0.0);
        if (d < dist) {
          dist = d;
          pick = k;
        }
      }
      rounded[i] = pick;
    }
    if (const auto rb = bound_of(rounded)) evaluate_leaf(rounded, rb->cost);
    if (bound_failed) return fall_back();

    struct Link {
      std::shared_ptr<const Link> parent;
      std::size_t unit;
      int zone;
    };
    struct Node {
      double bound;
      std::uint64_t seq;
      std::size_t depth;
      std::shared_ptr<const Link> chain;
    };
    auto worse = [](const Node& a, const Node& b) {
      return a.bound != b.bound ? a.bound > b.bound : a.seq > b.seq;
    };
    std::priority_queue<Node, std::vector<Node>, decltype(worse)> open(worse);
    std::uint64_t seq = 0;
    open.push({root_relax->cost, seq++, 0, nullptr});

    std::vector<int> partial;
    while (!open.empty()) {
      const Node node = open.top();
      open.pop();
      if (can_prune(node.bound)) {
        ++stats.nodes_pruned;
        stats.pruned_bounds.push_back(node.bound);
        continue;
      }
      partial = root;
      for (const Link* l = node.chain.get(); l; l = l->parent.get()) partial[l->unit] = l->zone;
      const std::size_t unit = order[node.depth];
      const bool leaf_level = node.depth + 1 == order.size();
      for (int k : table.reachable[unit]) {
        partial[unit] = k;
        ++stats.nodes_created;
        const auto relax = bound_of(partial);
        if (!relax) {
          ++stats.nodes_infeasible;
          continue;
        }
        if (can_prune(relax->cost)) {
          ++stats.nodes_pruned;
          stats.pruned_bounds.push_back(relax->cost);
          continue;
        }
        if (leaf_level) {
          if (partial == rounded) continue;  // already solved
          evaluate_leaf(partial, relax->cost);
          if (bound_failed) return fall_back();
        } else {
          auto link = std::make_shared<const Link>(Link{node.chain, unit, k});
          open.push({relax->cost, seq++, node.depth + 1, std::move(link)});
        }
      }
    }
  }

  if (bound_failed) return fall_back();
  if (!incumbent) throw DispatchError(ErrorKind::Infeasible, "no zone assignment admits a feasible dispatch");

  DispatchSolution sol = make_solution(sc, incumbent_assignment, *incumbent);
  sol.converged = !incumbent_unconverged && incumbent->converged;
  sol.stats = std::move(stats);
  sol.solve_time_s = seconds_since(t0);
  return sol;
}

DispatchSolution solve(const SystemCase& sc, const SearchOptions& opts) {
  const auto t0 = Clock::now();
  DispatchSolution sol = assignment_space_size(sc) <= opts.enum_threshold ? enumerate_and_solve(sc, opts)
                                                                           : branch_and_bound(sc, opts);
  sol.solve_time_s = seconds_since(t0);
  return sol;
}

}  // namespace zd
