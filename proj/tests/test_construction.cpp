#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "branched/errors.hpp"
#include "branched/fixtures.hpp"
#include "branched/gap_construction.hpp"
#include "branched/generators.hpp"
#include "branched/operators.hpp"

using namespace branched;

namespace {

const double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;

double sup_diff(const SampledSignal& a, const SampledSignal& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.v.size(); ++i) m = std::max(m, std::abs(a.v[i] - b.v[i]));
  return m;
}

// Maclaurin sine integral, accurate to ~1e-12 for |a| <= 1.
double si(double a) {
  return a - std::pow(a, 3) / 18.0 + std::pow(a, 5) / 600.0 -
         std::pow(a, 7) / 35280.0;
}

// L2 mass of the unit-box spectrum |(1-e^{-iw})/(iw)|^2 = (2-2cos w)/w^2
// over (-a, a), with the 1/2pi Plancherel weight:
//   integral = 4*Si(a) - 4*(1-cos a)/a.
double box_mass_bound(double a) {
  if (a <= 0.0) return 0.0;
  return std::sqrt((4.0 * si(a) - 4.0 * (1.0 - std::cos(a)) / a) / (2.0 * kPi));
}

}  // namespace

TEST_CASE("glue defect against direct subtraction") {
  Fixture f = make_fixture("toy");
  Spectrum y = compute_glue_defect(f.topology, f.inputs, 2, 1);
  Spectrum x2 = dft(f.inputs[1]);
  for (int j = 0; j < f.grid.n; ++j)
    CHECK(std::abs(y.v[j] - x2.v[j]) <= 1e-12);  // x1 is zero

  // A branch equal to h(x_d) on the whole line has no defect at all.
  Fixture a = make_fixture("example_A");
  std::vector<SampledSignal> xs = a.inputs;
  xs[2] = apply_operator(TimeReversal{6.0}, xs[0]);
  Spectrum z = compute_glue_defect(a.topology, xs, 3, 1);
  double scale = 0.0;
  for (const cplx& v : dft(xs[0]).v) scale = std::max(scale, std::abs(v));
  for (const cplx& v : z.v) CHECK(std::abs(v) <= 1e-11 * scale);

  // Unglued branches default to the identity law.
  Spectrum w = compute_glue_defect(a.topology, a.inputs, 5, 2);
  Spectrum direct = dft(a.inputs[4]);
  Spectrum x2a = dft(a.inputs[1]);
  for (int j = 0; j < a.grid.n; ++j)
    CHECK(std::abs(w.v[j] - (direct.v[j] - x2a.v[j])) <= 1e-12);

  // Stored orientation is (1,3); the reverse request must throw.
  CHECK_THROWS_AS(compute_glue_defect(a.topology, a.inputs, 1, 3),
                  std::invalid_argument);
}

TEST_CASE("closed-form gaps on the two-branch box family") {
  Fixture f = make_fixture("toy");
  Construction c = construct(f.topology, f.inputs, f.plan);

  Spectrum x2 = dft(f.inputs[1]);
  double scale = 0.0;
  for (const cplx& v : x2.v) scale = std::max(scale, std::abs(v));

  Spectrum got1 = dft(c.xs[0]);
  Spectrum got2 = dft(c.xs[1]);
  const double delta = f.plan.delta;
  for (int j = 0; j < f.grid.n; ++j) {
    const double w = f.grid.omega(j);
    const cplx want1 = (std::abs(w) <= delta) ? -x2.v[j] : cplx{0.0, 0.0};
    const cplx want2 = (std::abs(w) <= delta) ? cplx{0.0, 0.0} : x2.v[j];
    CHECK(std::abs(got1.v[j] - want1) <= 1e-10 * scale);
    CHECK(std::abs(got2.v[j] - want2) <= 1e-10 * scale);
  }

  // Off [0,1) the two output branches agree pointwise.
  double sup2 = sup_norm(c.xs[1]);
  for (int i = 0; i < f.grid.n; ++i) {
    const double t = f.grid.t(i);
    if (t >= 0.0 && t <= 1.0) continue;
    CHECK(std::abs(c.xs[0].v[i] - c.xs[1].v[i]) <= 1e-10 * sup2);
  }

  CHECK(c.report.used_grouping);
  CHECK(c.report.warnings.empty());
  REQUIRE(c.report.gap_energies.size() == 2);
  for (double e : c.report.gap_energies) CHECK(e <= 1e-10);
  for (double r : c.report.residuals_out) CHECK(r <= 1e-10);
  CHECK(c.gaps.gap(1) == *f.plan.fixed_g1);
  CHECK(c.gaps.gap(2) == IntervalSet::of(-0.25, 0.25));
}

TEST_CASE("construction is idempotent once the gaps exist") {
  Fixture f = make_fixture("toy");
  Construction first = construct(f.topology, f.inputs, f.plan);
  Construction second = construct(f.topology, first.xs, f.plan);
  double scale = std::max(sup_norm(first.xs[0]), sup_norm(first.xs[1]));
  CHECK(sup_diff(first.xs[0], second.xs[0]) <= 1e-12 * scale);
  CHECK(sup_diff(first.xs[1], second.xs[1]) <= 1e-12 * scale);
  // Already-gapped inputs cost nothing to rebuild.
  for (double e : second.report.l2_errors) CHECK(e <= 1e-10);
}

TEST_CASE("every bundled constructible fixture reaches spec accuracy") {
  for (const char* name : {"toy", "example_A", "two_interval_star", "decoys"}) {
    CAPTURE(name);
    Fixture f = make_fixture(name);
    Construction c = construct(f.topology, f.inputs, f.plan);
    for (double e : c.report.gap_energies) CHECK(e <= 1e-10);
    for (double r : c.report.residuals_out) CHECK(r <= 1e-10);
    for (size_t i = 0; i < c.report.sup_errors.size(); ++i)
      CHECK(c.report.sup_errors[i] <=
            c.report.sup_bounds[i] * (1.0 + 1e-9) + 1e-12);
    // The planned gap really is spectrally silent branch by branch.
    for (int d = 1; d <= f.topology.m; ++d)
      CHECK(gap_energy(dft(c.xs[d - 1]), c.gaps.gap(d)) <= 1e-10);
  }
}

TEST_CASE("reversal carrier writes its corrections at mirrored bins") {
  Fixture f = make_fixture("example_A");
  Construction c = construct(f.topology, f.inputs, f.plan);

  // x_3 keeps its defect: out_3 - rev(out_1) == in_3 - rev(in_1) pointwise.
  SampledSignal rev_out = apply_operator(TimeReversal{6.0}, c.xs[0]);
  SampledSignal rev_in = apply_operator(TimeReversal{6.0}, f.inputs[0]);
  double scale = sup_norm(f.inputs[2]);
  for (int i = 0; i < f.grid.n; ++i) {
    const cplx before = f.inputs[2].v[i] - rev_in.v[i];
    const cplx after = c.xs[2].v[i] - rev_out.v[i];
    CHECK(std::abs(after - before) <= 1e-9 * scale);
  }

  // Branch 4 rides the same reversal carrier: its gap sits at its own
  // planned interval even though the glue chain passes through branch 3.
  CHECK(c.gaps.gap(4) == IntervalSet::of(3.7 - 0.1, 3.7 + 0.1));
  CHECK(gap_energy(dft(c.xs[3]), c.gaps.gap(4)) <= 1e-10);
}

TEST_CASE("box-family convergence matches the integrated spectral mass") {
  Fixture f = make_fixture("toy");
  const std::vector<double> deltas{0.4, 0.2, 0.1, 0.05};
  ConvergenceTable tab = convergence_study(f.topology, f.inputs, f.plan, deltas);
  CHECK(tab.monotone);
  REQUIRE(tab.rows.size() == 4);
  for (size_t r = 1; r < tab.rows.size(); ++r)
    CHECK(tab.rows[r].max_l2_error <= tab.rows[r - 1].max_l2_error);

  const double dw = f.grid.domega();
  for (size_t r = 0; r < deltas.size(); ++r) {
    const double d = deltas[r];
    const double lo = box_mass_bound(std::max(d - dw, 0.0)) * (1.0 - 1e-3);
    const double hi = box_mass_bound(d + dw) * (1.0 + 1e-3);
    CAPTURE(d);
    CHECK(tab.rows[r].max_l2_error >= lo);
    CHECK(tab.rows[r].max_l2_error <= hi);
  }

  CHECK_THROWS_AS(
      convergence_study(f.topology, f.inputs, f.plan, {0.1, 0.2}),
      std::invalid_argument);
  CHECK_THROWS_AS(convergence_study(f.topology, f.inputs, f.plan, deltas, true,
                                    tab.rows.back().max_l2_error * 0.5),
                  NotConverged);
}

TEST_CASE("seven-branch convergence shrinks with the gap width") {
  Fixture f = make_fixture("example_A");
  ConvergenceTable tab =
      convergence_study(f.topology, f.inputs, f.plan, {0.4, 0.2, 0.1, 0.05});
  CHECK(tab.monotone);
  CHECK(tab.rows.back().max_l2_error <= 0.8 * tab.rows.front().max_l2_error);
  CHECK(tab.rows.back().max_l2_error > 0.0);
}

TEST_CASE("error scales like the square root of the gap width") {
  GridSpec grid;
  TopologySpec t;
  t.m = 3;
  t.pairs = {{1, 2, IntervalSet{{-kInf, 0.0}}, Identity{}},
             {1, 3, IntervalSet{{-kInf, 0.0}}, Identity{}}};
  std::vector<SampledSignal> xs;
  for (int d = 0; d < 3; ++d)
    xs.push_back(sinc_pulse(grid, 3.0, 0.4 * d, 1.0));
  GapPlan plan;
  plan.centers = {{1, 1.0}, {2, 2.0}, {3, 3.0}};

  const std::vector<double> deltas{0.4, 0.2, 0.1, 0.05};
  ConvergenceTable tab = convergence_study(t, xs, plan, deltas);
  CHECK(tab.monotone);

  double mx = 0.0, my = 0.0;
  for (size_t r = 0; r < deltas.size(); ++r) {
    mx += std::log(deltas[r]);
    my += std::log(tab.rows[r].max_l2_error);
  }
  mx /= deltas.size();
  my /= deltas.size();
  double sxy = 0.0, sxx = 0.0;
  for (size_t r = 0; r < deltas.size(); ++r) {
    const double dx = std::log(deltas[r]) - mx;
    sxy += dx * (std::log(tab.rows[r].max_l2_error) - my);
    sxx += dx * dx;
  }
  const double slope = sxy / sxx;
  CHECK(slope >= 0.3);
  CHECK(slope <= 0.7);
}

TEST_CASE("default plans spread centers over the admissible band") {
  Fixture dc = make_fixture("decoys");
  GapPlan p = default_plan(dc.topology, dc.grid, 0.1, dc.plan.fixed_g1);
  CHECK(p.centers.count(1) == 0);
  REQUIRE(p.centers.size() == 3);
  for (auto& [d, c] : p.centers) {
    CHECK(c > 0.0);
    CHECK(c + p.delta <= kPi / 2.0);
  }
  Construction c = construct(dc.topology, dc.inputs, p);
  for (double e : c.report.gap_energies) CHECK(e <= 1e-10);

  Fixture ea = make_fixture("example_A");
  GapPlan q = default_plan(ea.topology, ea.grid, 0.1);
  CHECK(q.centers.size() == 7);
  Construction c2 = construct(ea.topology, ea.inputs, q);
  for (double e : c2.report.gap_energies) CHECK(e <= 1e-10);

  // Band too narrow for the requested half-width.
  CHECK_THROWS_AS(default_plan(dc.topology, dc.grid, 0.3, dc.plan.fixed_g1),
                  DisjointnessViolated);
}

TEST_CASE("construction failure modes") {
  Fixture f = make_fixture("toy");

  GapPlan overlap = f.plan;
  overlap.fixed_g1 = IntervalSet{{-kInf, -0.2}, {0.2, kInf}};
  CHECK_THROWS_AS(construct(f.topology, f.inputs, overlap), DisjointnessViolated);

  GapPlan missing = f.plan;
  missing.centers.clear();
  CHECK_THROWS_AS(construct(f.topology, f.inputs, missing), std::invalid_argument);

  GapPlan no_room = f.plan;
  no_room.fixed_g1 = IntervalSet::whole_line();
  CHECK_THROWS_AS(construct(f.topology, f.inputs, no_room), ConditionViolated);

  Fixture lp = make_fixture("loop");
  try {
    construct(lp.topology, lp.inputs, lp.plan);
    FAIL("loop fixture must not construct");
  } catch (const ConditionViolated& e) {
    CHECK(std::string(e.what()).find("(vi)(b)") != std::string::npos);
  }

  Fixture dl = make_fixture("dummy_loop");
  try {
    construct(dl.topology, dl.inputs, dl.plan);
    FAIL("dummy_loop fixture must not construct");
  } catch (const ConditionViolated& e) {
    CHECK(std::string(e.what()).find("(v)") != std::string::npos);
  }

  // A gap planted where the convolution factor is below the floor needs an
  // inverse that does not exist.
  Fixture ts = make_fixture("two_interval_star");
  GapPlan far = ts.plan;
  far.centers[4] = 13.5;
  CHECK_THROWS_AS(construct(ts.topology, ts.inputs, far), NonInvertible);
}

TEST_CASE("construction is bit-for-bit deterministic") {
  Fixture a = make_fixture("decoys");
  Fixture b = make_fixture("decoys");
  REQUIRE(a.inputs.size() == b.inputs.size());
  for (size_t d = 0; d < a.inputs.size(); ++d)
    CHECK(sup_diff(a.inputs[d], b.inputs[d]) == 0.0);

  Construction ca = construct(a.topology, a.inputs, a.plan);
  Construction cb = construct(b.topology, b.inputs, b.plan);
  for (size_t d = 0; d < ca.xs.size(); ++d)
    CHECK(sup_diff(ca.xs[d], cb.xs[d]) == 0.0);
}
