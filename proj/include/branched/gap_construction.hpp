#pragma once

#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "branched/signal.hpp"
#include "branched/topology.hpp"

namespace branched {

// Placement of the spectral gaps: one open interval (center-delta, center+delta)
// per branch, except that branch 1 may instead carry a caller-fixed set.
struct GapPlan {
  std::map<int, double> centers;        // branch id -> interval center
  double delta = 0.1;                   // half-width, > 0
  std::optional<IntervalSet> fixed_g1;  // when set, branch 1 keeps exactly this gap
};

// Diagnostics attached to every construction. Branch-indexed vectors store
// branch d at [d-1]; pair-indexed vectors follow TopologySpec::pairs order.
struct ConstructionReport {
  bool used_grouping = false;        // grouped-operator variant vs all-identity
  std::vector<double> gap_energies;  // fraction of branch energy left in its gap
  std::vector<double> residuals_in;  // glue residuals of the inputs
  std::vector<double> residuals_out;
  std::vector<double> l2_errors;      // ||x_d - out_d||_2
  std::vector<double> rel_l2_errors;  // relative when ||x_d|| > 0, else absolute
  std::vector<double> sup_errors;     // max_n |x_d(t_n) - out_d(t_n)|
  std::vector<double> sup_bounds;     // (1/2pi) * sum_j |E_d(w_j)| * dw, >= sup_errors
  std::vector<PairwiseFinding> warnings;
};

struct Construction {
  std::vector<SampledSignal> xs;
  GapSpec gaps;
  ConstructionReport report;
};

// Defect of branch k relative to branch d: dft(x_k - h(x_d)) using the stored
// pair operator when (d,k) is glued, the identity otherwise. The stored
// orientation is required; asking for the reverse of a glued pair throws.
Spectrum compute_glue_defect(const TopologySpec& t, const std::vector<SampledSignal>& xs,
                             int k, int d);

// Spreads centers evenly over the widest positive band admissible for the
// topology (inside the invertibility domain, off a fixed branch-1 gap).
// Branch 1 receives a center only when fixed_g1 is absent.
GapPlan default_plan(const TopologySpec& t, const GridSpec& grid, double delta,
                     std::optional<IntervalSet> fixed_g1 = {});

// The gap set each branch will end up declaring: (center-delta, center+delta)
// per planned center, or the fixed branch-1 set. Throws when the plan lacks a
// center it needs. construct() realizes exactly these sets.
GapSpec planned_gaps(const TopologySpec& t, const GapPlan& plan);

// Rebuilds the family so every branch gains the planned spectral gap while
// all glue constraints keep their input residuals. Output branch d differs
// from input branch d only by the branch-1 edit carried through branch d's
// root operator, so the edit never touches a constraint.
Construction construct(const TopologySpec& t, const std::vector<SampledSignal>& xs,
                       const GapPlan& plan);

struct ConvergenceRow {
  double delta = 0;
  double max_l2_error = 0;
  std::vector<double> l2_errors;  // per branch
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  bool monotone = false;  // max error non-increasing row to row, 5% slack
};

// Runs construct over a strictly decreasing delta sequence and tabulates the
// per-branch approximation errors. Inputs get the 5% edge taper first unless
// taper is false; residual checks stay relative to the tapered inputs.
// Throws NotConverged when final_tol is finite and the last row misses it.
ConvergenceTable convergence_study(const TopologySpec& t, const std::vector<SampledSignal>& xs,
                                   GapPlan plan, const std::vector<double>& deltas,
                                   bool taper = true,
                                   double final_tol = std::numeric_limits<double>::infinity());

}  // namespace branched
