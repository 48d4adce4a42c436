#include "branched/topology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <set>

#include "branched/errors.hpp"

namespace branched {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void TopologySpec::validate() const {
  if (m < 1) throw std::invalid_argument("branch count must be at least 1");
  std::set<std::pair<int, int>> seen;
  for (const GluePair& p : pairs) {
    if (p.d < 1 || p.d > m || p.k < 1 || p.k > m)
      throw std::invalid_argument("glue pair references unknown branch");
    if (p.d == p.k)
      throw std::invalid_argument("glue pair must join two distinct branches");
    auto key = std::minmax(p.d, p.k);
    if (!seen.insert(key).second)
      throw std::invalid_argument("duplicate glue pair");
    if (p.set.empty())
      throw std::invalid_argument("glue set must have positive measure");
  }
}

const GluePair* TopologySpec::find(int a, int b) const {
  for (const GluePair& p : pairs)
    if ((p.d == a && p.k == b) || (p.d == b && p.k == a)) return &p;
  return nullptr;
}

std::vector<int> TopologySpec::neighbors(int branch) const {
  std::vector<int> out;
  for (const GluePair& p : pairs) {
    if (p.d == branch) out.push_back(p.k);
    if (p.k == branch) out.push_back(p.d);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

// BFS over branch ids; `usable(u, v)` gates each step. Returns parent links.
std::vector<int> bfs_parents(const TopologySpec& t, int from,
                             const std::function<bool(int, int)>& usable) {
  std::vector<int> parent(static_cast<size_t>(t.m) + 1, 0);
  std::deque<int> queue;
  parent[static_cast<size_t>(from)] = from;
  queue.push_back(from);
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    for (int v : t.neighbors(u)) {
      if (parent[static_cast<size_t>(v)] != 0) continue;
      if (!usable(u, v)) continue;
      parent[static_cast<size_t>(v)] = u;
      queue.push_back(v);
    }
  }
  return parent;
}

std::optional<std::vector<int>> path_from_parents(const std::vector<int>& parent,
                                                  int from, int to) {
  if (parent[static_cast<size_t>(to)] == 0) return std::nullopt;
  std::vector<int> path{to};
  int cur = to;
  while (cur != from) {
    cur = parent[static_cast<size_t>(cur)];
    path.push_back(cur);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

std::optional<std::vector<int>> reaches(const TopologySpec& t, int from,
                                        int to) {
  t.validate();
  if (from < 1 || from > t.m || to < 1 || to > t.m)
    throw std::invalid_argument("branch id out of range");
  if (from == to) return std::vector<int>{from};
  auto parent = bfs_parents(t, from, [](int, int) { return true; });
  return path_from_parents(parent, from, to);
}

bool check_condition1(const TopologySpec& t) {
  t.validate();
  return std::all_of(t.pairs.begin(), t.pairs.end(),
                     [](const GluePair& p) { return is_identity(p.op); });
}

namespace {

// Branches reachable from `seed` branches without stepping on branch 1,
// excluding the seeds themselves.
std::vector<int> closure_without_root(const TopologySpec& t,
                                      const std::vector<int>& seeds) {
  std::vector<char> visited(static_cast<size_t>(t.m) + 1, 0);
  std::deque<int> queue;
  for (int s : seeds) {
    visited[static_cast<size_t>(s)] = 1;
    queue.push_back(s);
  }
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    for (int v : t.neighbors(u)) {
      if (v == 1 || visited[static_cast<size_t>(v)]) continue;
      // Only pairs not incident to the root participate in closures.
      const GluePair* p = t.find(u, v);
      if (p->d == 1 || p->k == 1) continue;
      visited[static_cast<size_t>(v)] = 1;
      queue.push_back(v);
    }
  }
  std::vector<int> out;
  for (int b = 2; b <= t.m; ++b)
    if (visited[static_cast<size_t>(b)] &&
        std::find(seeds.begin(), seeds.end(), b) == seeds.end())
      out.push_back(b);
  return out;
}

struct RootEdge {
  int branch = 0;
  OperatorSpec op = Identity{};
  bool to_root = false;  // stored as (branch, 1)
};

bool same_group_key(const RootEdge& a, const RootEdge& b) {
  return a.to_root == b.to_root && op_equal(a.op, b.op);
}

ConditionReport fail2(ConditionReport r, std::string clause, std::string detail) {
  r.condition2 = false;
  r.groups.clear();
  r.failed_clause = std::move(clause);
  r.detail = std::move(detail);
  return r;
}

}  // namespace

ConditionReport check_condition2(const TopologySpec& t, const GridSpec& grid,
                                 const std::optional<IntervalSet>& domain) {
  t.validate();
  grid.validate();
  ConditionReport report;
  report.condition1 = check_condition1(t);

  // Clause (v): away from the root every glue operator must be the identity.
  for (const GluePair& p : t.pairs) {
    if (p.d != 1 && p.k != 1 && !is_identity(p.op))
      return fail2(std::move(report), "(v)",
                   "non-identity operator between branches " +
                       std::to_string(p.d) + " and " + std::to_string(p.k));
  }

  std::vector<RootEdge> roots;
  for (const GluePair& p : t.pairs) {
    if (p.d == 1)
      roots.push_back({p.k, p.op, false});
    else if (p.k == 1)
      roots.push_back({p.d, p.op, true});
  }
  std::sort(roots.begin(), roots.end(),
            [](const RootEdge& a, const RootEdge& b) { return a.branch < b.branch; });

  // Maximal consecutive runs of equal operators form the initial groups.
  std::vector<WitnessGroup> groups;
  std::vector<RootEdge> group_edge;
  for (const RootEdge& e : roots) {
    if (!groups.empty() && same_group_key(group_edge.back(), e)) {
      groups.back().members.push_back(e.branch);
    } else {
      WitnessGroup g;
      g.members = {e.branch};
      g.op = e.op;
      g.op_points_to_root = e.to_root;
      groups.push_back(std::move(g));
      group_edge.push_back(e);
    }
  }
  for (size_t i = 0; i < groups.size(); ++i)
    groups[i].closure = closure_without_root(t, groups[i].members);

  // Clauses (ii)/(iii): territories must not collide; same-operator groups
  // are merged instead of failing.
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t i = 0; i < groups.size() && !changed; ++i) {
      for (size_t j = i + 1; j < groups.size() && !changed; ++j) {
        auto territory = [](const WitnessGroup& g) {
          std::vector<int> all = g.members;
          all.insert(all.end(), g.closure.begin(), g.closure.end());
          std::sort(all.begin(), all.end());
          return all;
        };
        std::vector<int> ti = territory(groups[i]);
        std::vector<int> tj = territory(groups[j]);
        std::vector<int> common;
        std::set_intersection(ti.begin(), ti.end(), tj.begin(), tj.end(),
                              std::back_inserter(common));
        if (common.empty()) continue;
        if (same_group_key(group_edge[i], group_edge[j])) {
          groups[i].members.insert(groups[i].members.end(),
                                   groups[j].members.begin(),
                                   groups[j].members.end());
          std::sort(groups[i].members.begin(), groups[i].members.end());
          groups[i].closure = closure_without_root(t, groups[i].members);
          groups.erase(groups.begin() + static_cast<long>(j));
          group_edge.erase(group_edge.begin() + static_cast<long>(j));
          changed = true;
        } else {
          bool hits_members =
              std::any_of(common.begin(), common.end(), [&](int b) {
                auto& mi = groups[i].members;
                auto& mj = groups[j].members;
                return std::find(mi.begin(), mi.end(), b) != mi.end() ||
                       std::find(mj.begin(), mj.end(), b) != mj.end();
              });
          return fail2(std::move(report), hits_members ? "(iii)" : "(ii)",
                       "groups with different operators share branch " +
                           std::to_string(common.front()));
        }
      }
    }
  }

  // Clause (iv): every branch touched by a glue pair must sit in a territory.
  std::vector<char> covered(static_cast<size_t>(t.m) + 1, 0);
  covered[1] = 1;
  for (const WitnessGroup& g : groups) {
    for (int b : g.members) covered[static_cast<size_t>(b)] = 1;
    for (int b : g.closure) covered[static_cast<size_t>(b)] = 1;
  }
  for (const GluePair& p : t.pairs) {
    for (int b : {p.d, p.k}) {
      if (!covered[static_cast<size_t>(b)])
        return fail2(std::move(report), "(iv)",
                     "branch " + std::to_string(b) +
                         " is glued but not reachable from branch 1");
    }
  }

  // Clause (vi)(b): each group operator needs a frequency action staying
  // above the invertibility floor on a common domain D.
  std::vector<SpectralAction> actions;
  for (const WitnessGroup& g : groups) {
    std::optional<SpectralAction> a;
    try {
      a = spectral_action(g.op, grid);
    } catch (const IncommensurateMap& e) {
      return fail2(std::move(report), "(vi)(b)", e.what());
    }
    if (!a)
      return fail2(std::move(report), "(vi)(b)",
                   "operator '" + op_label(g.op) +
                       "' has no invertible frequency action");
    actions.push_back(*a);
  }

  auto factor_floor_ok = [&](double w) {
    for (const SpectralAction& a : actions)
      if (std::abs(a.factor(w)) < kInvertibilityFloor) return false;
    return true;
  };

  IntervalSet d_set;
  if (domain) {
    if (!(domain->measure() > 0.0))
      return fail2(std::move(report), "(vi)(b)",
                   "supplied domain has zero measure");
    for (int j = 0; j < grid.n; ++j) {
      double w = grid.omega(j);
      if (domain->contains(w) && !factor_floor_ok(w))
        return fail2(std::move(report), "(vi)(b)",
                     "factor drops below the invertibility floor inside the "
                     "supplied domain");
    }
    d_set = *domain;
  } else {
    // Longest run of admissible bins in ascending frequency order.
    int best_len = 0, best_start = 0, run_len = 0, run_start = 0;
    for (int s = 0; s < grid.n; ++s) {
      int j = grid.bin_of(s - grid.n / 2);
      if (factor_floor_ok(grid.omega(j))) {
        if (run_len == 0) run_start = s;
        ++run_len;
        if (run_len > best_len) {
          best_len = run_len;
          best_start = run_start;
        }
      } else {
        run_len = 0;
      }
    }
    if (best_len == 0)
      return fail2(std::move(report), "(vi)(b)",
                   "no frequency interval keeps every factor invertible");
    if (best_len == grid.n) {
      d_set = IntervalSet::whole_line();
    } else {
      double lo = grid.domega() * (best_start - grid.n / 2);
      double hi = grid.domega() * (best_start - grid.n / 2 + best_len);
      d_set = IntervalSet::of(lo, hi);
    }
  }

  for (size_t i = 0; i < groups.size(); ++i) {
    double worst = 0.0;
    for (int j = 0; j < grid.n; ++j) {
      double w = grid.omega(j);
      if (!d_set.contains(w)) continue;
      worst = std::max(worst, 1.0 / std::abs(actions[i].factor(w)));
    }
    groups[i].inv_bound = worst;
  }

  report.condition2 = true;
  report.groups = std::move(groups);
  report.domain = std::move(d_set);
  return report;
}

namespace {

// Whether a chain may traverse the pair from u to v. Against the stored
// orientation the operator must relocate samples pointwise in time;
// convolution-type glue only transports values forward.
bool step_usable(const GluePair& p, int u, int v) {
  if (p.d == u && p.k == v) return true;
  if (std::holds_alternative<Identity>(p.op) ||
      std::holds_alternative<TimeReversal>(p.op))
    return true;
  if (const auto* f = std::get_if<Affine>(&p.op))
    return (f->b == 1.0 || f->b == -1.0) && std::abs(f->a) >= kInvertibilityFloor;
  return false;
}

}  // namespace

ChainReport check_thm1_chain_condition(const TopologySpec& t, const GapSpec& g) {
  t.validate();
  ChainReport report;
  report.chains.resize(static_cast<size_t>(t.m));
  auto usable = [&](int u, int v) {
    const GluePair* p = t.find(u, v);
    if (!step_usable(*p, u, v)) return false;
    return p->set.unite(g.gap(v)).measure() == kInf;
  };
  auto parent = bfs_parents(t, 1, usable);
  report.all_ok = true;
  report.chains[0] = std::vector<int>{1};
  for (int b = 2; b <= t.m; ++b) {
    report.chains[static_cast<size_t>(b - 1)] = path_from_parents(parent, 1, b);
    if (!report.chains[static_cast<size_t>(b - 1)]) {
      report.all_ok = false;
      report.notes.push_back("no admissible chain from branch 1 to branch " +
                             std::to_string(b));
    }
  }
  return report;
}

std::vector<PairwiseFinding> check_pairwise_implications(const TopologySpec& t,
                                                         const GapSpec& g) {
  t.validate();
  std::vector<PairwiseFinding> out;
  for (const GluePair& p : t.pairs) {
    const IntervalSet& gd = g.gap(p.d);
    const IntervalSet& gk = g.gap(p.k);
    if (p.set.intersect(gk).measure() == kInf)
      out.push_back({p.d, p.k, PairwiseKind::Determined,
                     "branch " + std::to_string(p.k) +
                         " is determined by branch " + std::to_string(p.d) +
                         " through this pair"});
    if (p.set.intersect(gd).measure() == kInf)
      out.push_back({p.k, p.d, PairwiseKind::Determined,
                     "branch " + std::to_string(p.d) +
                         " is determined by branch " + std::to_string(p.k) +
                         " through this pair"});
    double overlap = gd.intersect(gk).measure();
    if (p.set.classify() == SetClass::HalfLine && overlap > 0.0)
      out.push_back({p.d, p.k, PairwiseKind::Coincide,
                     "branches " + std::to_string(p.d) + " and " +
                         std::to_string(p.k) +
                         " coincide (unbounded glue, overlapping gaps)"});
    if (overlap == kInf)
      out.push_back({p.d, p.k, PairwiseKind::Redundant,
                     "gap overlap of infinite measure makes branch " +
                         std::to_string(p.k) + " redundant"});
  }
  return out;
}

double residual(const TopologySpec& t, const std::vector<SampledSignal>& xs,
                const GluePair& pair) {
  if (static_cast<int>(xs.size()) != t.m)
    throw std::invalid_argument("one signal per branch required");
  const SampledSignal& xd = xs[static_cast<size_t>(pair.d - 1)];
  const SampledSignal& xk = xs[static_cast<size_t>(pair.k - 1)];
  if (!(xd.grid == xk.grid))
    throw std::invalid_argument("branch signals must share one grid");
  SampledSignal hx = apply_operator(pair.op, xd);
  const GridSpec& grid = xd.grid;
  double num = 0.0;
  for (int n : clip_to_grid(pair.set, grid.t0, grid.dt, grid.n))
    num += std::norm(xk.v[static_cast<size_t>(n)] - hx.v[static_cast<size_t>(n)]);
  num = std::sqrt(num * grid.dt);
  double den = l2_norm(xk);
  return den > 0.0 ? num / den : num;
}

std::vector<double> residual_all(const TopologySpec& t,
                                 const std::vector<SampledSignal>& xs) {
  std::vector<double> out;
  out.reserve(t.pairs.size());
  for (const GluePair& p : t.pairs) out.push_back(residual(t, xs, p));
  return out;
}

}  // namespace branched
