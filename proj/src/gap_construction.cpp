#include "branched/gap_construction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

#include "branched/errors.hpp"

namespace branched {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

IntervalSet complement(const IntervalSet& s) {
  std::vector<Interval> out;
  double lo = -kInf;
  for (const Interval& p : s.parts()) {
    if (p.lo > lo) out.push_back({lo, p.lo});
    lo = p.hi;
  }
  if (lo < kInf) out.push_back({lo, kInf});
  return IntervalSet(std::move(out));
}

IntervalSet set_difference(const IntervalSet& a, const IntervalSet& b) {
  return a.intersect(complement(b));
}

// The edit each output branch carries relative to the branch-1 edit.
struct Carrier {
  SpectralAction fwd;
  SpectralAction inv;
  bool reflection = false;
};

void assign_carrier(std::vector<Carrier>& u, int branch, const SpectralAction& a) {
  Carrier c;
  c.fwd = a;
  c.inv = invert_action(a);
  c.reflection = a.kind == ActionKind::Reflection;
  u[static_cast<size_t>(branch)] = std::move(c);
}

// Absolute L2 defect of one glue pair over the clipped glue set.
double clipped_defect(const GluePair& p, const std::vector<SampledSignal>& xs) {
  const SampledSignal& xk = xs[static_cast<size_t>(p.k - 1)];
  SampledSignal hd = apply_operator(p.op, xs[static_cast<size_t>(p.d - 1)]);
  const GridSpec& g = xk.grid;
  double s = 0.0;
  for (int i : clip_to_grid(p.set, g.t0, g.dt, g.n))
    s += std::norm(xk.v[static_cast<size_t>(i)] - hd.v[static_cast<size_t>(i)]);
  return std::sqrt(s * g.dt);
}

GridSpec common_grid(const std::vector<SampledSignal>& xs, int m) {
  if (static_cast<int>(xs.size()) != m)
    throw std::invalid_argument("need one signal per branch");
  const GridSpec& g = xs.front().grid;
  g.validate();
  for (const SampledSignal& x : xs) {
    if (!(x.grid == g)) throw std::invalid_argument("branches must share a grid");
    if (static_cast<int>(x.v.size()) != g.n)
      throw std::invalid_argument("sample count does not match grid");
  }
  return g;
}

}  // namespace

Spectrum compute_glue_defect(const TopologySpec& t, const std::vector<SampledSignal>& xs,
                             int k, int d) {
  t.validate();
  const GridSpec g = common_grid(xs, t.m);
  if (k < 1 || k > t.m || d < 1 || d > t.m || k == d)
    throw std::invalid_argument("defect needs two distinct branch ids in range");
  const GluePair* p = t.find(d, k);
  if (p && p->d != d)
    throw std::invalid_argument("glue stores the orientation x_" + std::to_string(p->k) +
                                " = h(x_" + std::to_string(p->d) + "); swap the arguments");
  SampledSignal hd = p ? apply_operator(p->op, xs[static_cast<size_t>(d - 1)])
                       : xs[static_cast<size_t>(d - 1)];
  SampledSignal diff{g, xs[static_cast<size_t>(k - 1)].v};
  for (int i = 0; i < g.n; ++i) diff.v[static_cast<size_t>(i)] -= hd.v[static_cast<size_t>(i)];
  return dft(diff);
}

GapPlan default_plan(const TopologySpec& t, const GridSpec& grid, double delta,
                     std::optional<IntervalSet> fixed_g1) {
  t.validate();
  grid.validate();
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw std::invalid_argument("gap half-width must be positive and finite");

  ConditionReport rep = check_condition2(t, grid);
  IntervalSet dom = rep.condition2 ? rep.domain : IntervalSet::whole_line();
  IntervalSet allowed = fixed_g1 ? set_difference(dom, *fixed_g1) : dom;
  // Positive frequencies only: keeps every interval clear of its own mirror
  // image, which matters once a reversal-type operator is in play.
  double nyq = std::numbers::pi / grid.dt;
  IntervalSet band = allowed.intersect(IntervalSet::of(grid.domega(), nyq));
  if (band.empty())
    throw ConditionViolated("no admissible positive-frequency band for gap placement");

  Interval widest = band.parts().front();
  for (const Interval& p : band.parts())
    if (p.hi - p.lo > widest.hi - widest.lo) widest = p;

  std::vector<int> ids;
  if (!fixed_g1) ids.push_back(1);
  for (int d = 2; d <= t.m; ++d) ids.push_back(d);

  double step = (widest.hi - widest.lo) / (static_cast<double>(ids.size()) + 1.0);
  if (!(step > 2.5 * delta))
    throw DisjointnessViolated("admissible band too narrow for the requested half-width");

  GapPlan plan;
  plan.delta = delta;
  plan.fixed_g1 = std::move(fixed_g1);
  for (size_t i = 0; i < ids.size(); ++i)
    plan.centers[ids[i]] = widest.lo + step * (static_cast<double>(i) + 1.0);
  return plan;
}

GapSpec planned_gaps(const TopologySpec& t, const GapPlan& plan) {
  t.validate();
  if (!(plan.delta > 0.0) || !std::isfinite(plan.delta))
    throw std::invalid_argument("gap half-width must be positive and finite");
  GapSpec out;
  for (int d = 1; d <= t.m; ++d) {
    if (d == 1 && plan.fixed_g1) {
      out.set_gap(1, *plan.fixed_g1);
      continue;
    }
    auto it = plan.centers.find(d);
    if (it == plan.centers.end())
      throw std::invalid_argument("plan lacks a gap center for branch " + std::to_string(d));
    if (!std::isfinite(it->second))
      throw std::invalid_argument("gap center must be finite");
    out.set_gap(d, IntervalSet::of(it->second - plan.delta, it->second + plan.delta));
  }
  return out;
}

Construction construct(const TopologySpec& t, const std::vector<SampledSignal>& xs,
                       const GapPlan& plan) {
  t.validate();
  const GridSpec g = common_grid(xs, t.m);
  if (!(plan.delta > 0.0) || !std::isfinite(plan.delta))
    throw std::invalid_argument("gap half-width must be positive and finite");

  ConditionReport rep = check_condition2(t, g);
  const bool grouped = rep.condition2;
  if (!grouped && !check_condition1(t))
    throw ConditionViolated("operators admit no grouping, clause " + rep.failed_clause +
                            ": " + rep.detail);

  const size_t m = static_cast<size_t>(t.m);
  std::vector<Carrier> u(m + 1);  // index by branch id; branch 1 stays identity
  if (grouped) {
    for (const WitnessGroup& grp : rep.groups) {
      auto act = spectral_action(grp.op, g);
      if (!act)
        throw ConditionViolated("group operator lost its spectral form");
      SpectralAction fwd = grp.op_points_to_root ? invert_action(*act) : *act;
      for (int d : grp.members) assign_carrier(u, d, fwd);
      for (int d : grp.closure) assign_carrier(u, d, fwd);
    }
  }

  if (plan.fixed_g1) {
    IntervalSet dom = grouped ? rep.domain : IntervalSet::whole_line();
    if (!(set_difference(dom, *plan.fixed_g1).measure() > 0.0))
      throw ConditionViolated("fixed branch-1 gap leaves no admissible band");
  }

  const GapSpec planned = planned_gaps(t, plan);
  std::vector<IntervalSet> mask(m + 1);
  for (int d = 1; d <= t.m; ++d) mask[static_cast<size_t>(d)] = planned.gap(d);

  // Regions that must stay private to each branch: its own gap, plus the
  // mirror image that a reversal-type carrier reads corrections from.
  std::vector<IntervalSet> region(m + 1);
  for (size_t d = 1; d <= m; ++d) {
    region[d] = mask[d];
    if (u[d].reflection) region[d] = region[d].unite(mask[d].reflect(0.0));
  }
  for (size_t a = 1; a <= m; ++a)
    for (size_t b = a + 1; b <= m; ++b)
      if (region[a].intersects(region[b]))
        throw DisjointnessViolated("gap regions of branches " + std::to_string(a) +
                                   " and " + std::to_string(b) + " overlap");

  std::vector<std::vector<int>> mbins(m + 1);
  std::vector<char> zeroed(static_cast<size_t>(g.n), 0);
  for (size_t d = 1; d <= m; ++d) {
    mbins[d] = freq_bins(mask[d], g);
    for (int j : mbins[d]) {
      zeroed[static_cast<size_t>(j)] = 1;
      if (u[d].reflection) {
        if (j == g.n / 2)
          throw DisjointnessViolated("branch " + std::to_string(d) +
                                     " gap touches the fold-over bin");
        zeroed[static_cast<size_t>(reflected_bin(g, j))] = 1;
      }
    }
  }

  std::vector<Spectrum> spec;
  spec.reserve(m);
  for (const SampledSignal& x : xs) spec.push_back(dft(x));

  std::vector<Spectrum> defect(m + 1, Spectrum{g, {}});
  for (size_t d = 2; d <= m; ++d) {
    Spectrum carried = apply_action(u[d].fwd, spec[0]);
    defect[d] = spec[d - 1];
    for (int j = 0; j < g.n; ++j)
      defect[d].v[static_cast<size_t>(j)] -= carried.v[static_cast<size_t>(j)];
  }

  Spectrum x1 = spec[0];
  for (int j = 0; j < g.n; ++j)
    if (zeroed[static_cast<size_t>(j)]) x1.v[static_cast<size_t>(j)] = cplx(0.0, 0.0);
  // Corrections live on each branch's private region, so plain writes cannot
  // collide. Inverse factors are evaluated only where they are needed.
  for (size_t d = 2; d <= m; ++d) {
    for (int j : mbins[d]) {
      cplx y = defect[d].v[static_cast<size_t>(j)];
      if (u[d].reflection) {
        int i = reflected_bin(g, j);
        x1.v[static_cast<size_t>(i)] -= u[d].inv.factor(g.omega(i)) * y;
      } else {
        x1.v[static_cast<size_t>(j)] -= u[d].inv.factor(g.omega(j)) * y;
      }
    }
  }

  Construction out;
  out.xs.reserve(m);
  std::vector<Spectrum> outspec;
  outspec.reserve(m);
  outspec.push_back(x1);
  for (size_t d = 2; d <= m; ++d) {
    Spectrum xd = apply_action(u[d].fwd, x1);
    for (int j = 0; j < g.n; ++j)
      xd.v[static_cast<size_t>(j)] += defect[d].v[static_cast<size_t>(j)];
    outspec.push_back(std::move(xd));
  }
  for (const Spectrum& s : outspec) out.xs.push_back(idft(s));
  for (int d = 1; d <= t.m; ++d) out.gaps.set_gap(d, mask[static_cast<size_t>(d)]);

  ConstructionReport& r = out.report;
  r.used_grouping = grouped;
  for (size_t d = 1; d <= m; ++d) {
    double e = gap_energy(outspec[d - 1], mask[d]);
    r.gap_energies.push_back(e);
    if (e > 1e-10)
      throw NumericalFailure("gap energy " + std::to_string(e) + " on branch " +
                             std::to_string(d));
  }
  r.residuals_in = residual_all(t, xs);
  r.residuals_out = residual_all(t, out.xs);
  for (const GluePair& p : t.pairs) {
    double before = clipped_defect(p, xs);
    double after = clipped_defect(p, out.xs);
    double slack = 1e-9 * (1.0 + l2_norm(xs[static_cast<size_t>(p.k - 1)]));
    if (after > before + slack)
      throw NumericalFailure("glue defect grew on pair (" + std::to_string(p.d) + "," +
                             std::to_string(p.k) + ")");
  }
  const double dw = g.domega();
  for (size_t d = 1; d <= m; ++d) {
    double l2 = 0.0, l1 = 0.0;
    for (int j = 0; j < g.n; ++j) {
      cplx e = outspec[d - 1].v[static_cast<size_t>(j)] - spec[d - 1].v[static_cast<size_t>(j)];
      l2 += std::norm(e);
      l1 += std::abs(e);
    }
    double err = std::sqrt(l2 * dw / (2.0 * std::numbers::pi));
    double bound = l1 * dw / (2.0 * std::numbers::pi);
    double sup = 0.0;
    for (int i = 0; i < g.n; ++i)
      sup = std::max(sup, std::abs(out.xs[d - 1].v[static_cast<size_t>(i)] -
                                   xs[d - 1].v[static_cast<size_t>(i)]));
    double denom = l2_norm(xs[d - 1]);
    r.l2_errors.push_back(err);
    r.rel_l2_errors.push_back(denom > 0.0 ? err / denom : err);
    r.sup_errors.push_back(sup);
    r.sup_bounds.push_back(bound);
    if (sup > bound * (1.0 + 1e-9) + 1e-12 * (1.0 + sup_norm(xs[d - 1])))
      throw NumericalFailure("uniform error exceeded its spectral bound on branch " +
                             std::to_string(d));
  }
  for (const PairwiseFinding& f : check_pairwise_implications(t, out.gaps))
    if (f.kind != PairwiseKind::Determined) r.warnings.push_back(f);
  return out;
}

ConvergenceTable convergence_study(const TopologySpec& t, const std::vector<SampledSignal>& xs,
                                   GapPlan plan, const std::vector<double>& deltas,
                                   bool taper, double final_tol) {
  if (deltas.empty()) throw std::invalid_argument("need at least one half-width");
  for (size_t i = 0; i + 1 < deltas.size(); ++i)
    if (!(deltas[i + 1] < deltas[i]))
      throw std::invalid_argument("half-widths must strictly decrease");

  std::vector<SampledSignal> in;
  in.reserve(xs.size());
  for (const SampledSignal& x : xs) in.push_back(taper ? edge_taper(x) : x);

  ConvergenceTable table;
  for (double d : deltas) {
    plan.delta = d;
    Construction c = construct(t, in, plan);
    ConvergenceRow row;
    row.delta = d;
    row.l2_errors = c.report.l2_errors;
    row.max_l2_error = *std::max_element(row.l2_errors.begin(), row.l2_errors.end());
    table.rows.push_back(std::move(row));
  }
  table.monotone = true;
  for (size_t i = 0; i + 1 < table.rows.size(); ++i)
    if (table.rows[i + 1].max_l2_error > table.rows[i].max_l2_error * 1.05)
      table.monotone = false;
  if (!table.monotone)
    throw NumericalFailure("approximation error failed to shrink with the gap width");
  if (std::isfinite(final_tol) && table.rows.back().max_l2_error > final_tol)
    throw NotConverged("final approximation error " +
                       std::to_string(table.rows.back().max_l2_error) +
                       " above the requested tolerance");
  return table;
}

}  // namespace branched
