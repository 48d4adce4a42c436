#pragma once

#include <optional>
#include <string>
#include <vector>

#include "branched/interval_set.hpp"
#include "branched/operators.hpp"
#include "branched/signal.hpp"

namespace branched {

// One glue constraint: x_k = h(x_d) almost everywhere on `set`.
// Pairs are stored once; lookups treat (d,k) and (k,d) as the same edge.
struct GluePair {
  int d = 0;
  int k = 0;
  IntervalSet set;
  OperatorSpec op = Identity{};
};

struct TopologySpec {
  int m = 0;                    // number of branches, ids 1..m
  std::vector<GluePair> pairs;

  void validate() const;        // throws ConditionViolated / invalid_argument
  const GluePair* find(int a, int b) const;  // symmetric; nullptr if absent
  std::vector<int> neighbors(int branch) const;  // sorted, deduplicated
};

// Shortest glue chain between two branches (pairs treated symmetrically),
// BFS with ascending neighbor order so ties are deterministic.
std::optional<std::vector<int>> reaches(const TopologySpec& t, int from, int to);

// All glue operators are the identity.
bool check_condition1(const TopologySpec& t);

struct WitnessGroup {
  std::vector<int> members;   // M_p, root-glued branches sharing one operator
  std::vector<int> closure;   // A(M_p): reachable from M_p with branch 1 removed
  OperatorSpec op = Identity{};   // h_p, oriented 1 -> member
  bool op_points_to_root = false; // stored pair was (d,1); factor must be inverted
  double inv_bound = 1.0;     // sup over D of 1/|H_p|
};

struct ConditionReport {
  bool condition1 = false;
  bool condition2 = false;
  std::vector<WitnessGroup> groups;
  IntervalSet domain;         // D where every group factor stays invertible
  std::string failed_clause;  // set when condition2 is false, e.g. "(v)"
  std::string detail;
};

// Witness search: root-glued branches are sorted and split into maximal
// consecutive runs with structurally equal operators; closures are grown
// through the remaining pairs; same-operator runs merge if their closures
// collide. The domain defaults to the largest frequency interval of the grid
// on which every group factor stays above the invertibility floor (the whole
// line when every factor has constant modulus).
ConditionReport check_condition2(
    const TopologySpec& t, const GridSpec& grid,
    const std::optional<IntervalSet>& domain = std::nullopt);

struct ChainReport {
  bool all_ok = false;
  // chains[b-1] for branch b: glue chain from branch 1 where every step
  // (u,v) satisfies measure(I_{u,v} union G_v) = +inf; empty optional when
  // no such chain exists. Branch 1 holds the trivial chain {1}.
  std::vector<std::optional<std::vector<int>>> chains;
  std::vector<std::string> notes;
};

ChainReport check_thm1_chain_condition(const TopologySpec& t, const GapSpec& g);

enum class PairwiseKind {
  Determined,   // mes(I ∩ G_k) = +inf: x_k is pinned by x_d across the pair
  Coincide,     // glue set unbounded and mes(G_d ∩ G_k) > 0: branches equal
  Redundant,    // mes(G_d ∩ G_k) = +inf: branches equal, gap overlap redundant
};

struct PairwiseFinding {
  int d = 0;
  int k = 0;
  PairwiseKind kind;
  std::string text;
};

std::vector<PairwiseFinding> check_pairwise_implications(const TopologySpec& t,
                                                         const GapSpec& g);

// Relative L2 defect of one glue constraint: ||x_k - h(x_d)|| restricted to
// the clipped glue set, divided by ||x_k|| over the window (absolute norm
// when x_k vanishes identically).
double residual(const TopologySpec& t, const std::vector<SampledSignal>& xs,
                const GluePair& pair);
std::vector<double> residual_all(const TopologySpec& t,
                                 const std::vector<SampledSignal>& xs);

}  // namespace branched
