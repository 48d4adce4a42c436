#include "branched/fixtures.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "branched/generators.hpp"
#include "branched/operators.hpp"

namespace branched {
namespace {

constexpr double kPi = 3.14159265358979323846;
const double kInf = std::numeric_limits<double>::infinity();

IntervalSet halfline_below(double b) { return IntervalSet{{-kInf, b}}; }
IntervalSet halfline_above(double a) { return IntervalSet{{a, kInf}}; }

// Values of `from` on the clipped set, `base` elsewhere.
SampledSignal splice(const SampledSignal& base, const SampledSignal& from,
                     const IntervalSet& where) {
  SampledSignal out = base;
  for (int i : clip_to_grid(where, base.grid.t0, base.grid.dt, base.grid.n))
    out.v[static_cast<size_t>(i)] = from.v[static_cast<size_t>(i)];
  return out;
}

Fixture make_toy() {
  Fixture f;
  f.name = "toy";
  f.summary = "two branches glued off [0,1); unit-box deviation, closed-form gaps";
  f.topology.m = 2;
  f.topology.pairs = {
      {1, 2, IntervalSet{{-kInf, 0.0}, {1.0, kInf}}, Identity{}},
  };
  f.plan.delta = 0.25;
  f.plan.fixed_g1 = IntervalSet{{-kInf, -1.0}, {1.0, kInf}};
  f.plan.centers = {{2, 0.0}};
  f.inputs.push_back(zero_signal(f.grid));
  f.inputs.push_back(indicator_signal(f.grid, 0.0, 1.0));
  return f;
}

Fixture make_example_a() {
  Fixture f;
  f.name = "example_A";
  f.summary = "seven-branch tree with one time reversal and a finite glue interval";
  f.topology.m = 7;
  const OperatorSpec rev = TimeReversal{6.0};
  f.topology.pairs = {
      {1, 2, halfline_below(0.0), Identity{}},
      {1, 3, halfline_above(3.0), rev},
      {1, 6, halfline_above(5.0), Identity{}},
      {1, 7, halfline_below(6.0), Identity{}},
      {3, 4, halfline_below(4.0), Identity{}},
      {4, 5, IntervalSet{{6.0, 7.0}}, Identity{}},
  };
  f.plan.delta = 0.1;
  for (int d = 1; d <= 7; ++d) f.plan.centers[d] = 0.7 + 1.0 * (d - 1);

  const SampledSignal x1 = random_bandlimited(f.grid, 8.0, 4101u, 3.0);
  // Deviations live strictly inside the complement of each glue set, so the
  // constraints hold to rounding error without any projection step.
  const SampledSignal w2 =
      add_signals(smooth_bump(f.grid, 20.0, 12.0, cplx{0.04, 0.02}, 1.2),
                  smooth_bump(f.grid, 45.0, 10.0, cplx{0.03, 0.0}, 3.4));
  const SampledSignal w3 = smooth_bump(f.grid, -25.0, 20.0, cplx{0.05, 0.0}, 2.1);
  const SampledSignal w4 = smooth_bump(f.grid, 25.0, 15.0, cplx{0.04, -0.01}, 4.2);
  const SampledSignal w5 =
      add_signals(smooth_bump(f.grid, -20.0, 18.0, cplx{0.03, 0.0}, 0.8),
                  smooth_bump(f.grid, 30.0, 16.0, cplx{0.02, 0.03}, 5.1));
  const SampledSignal w6 = smooth_bump(f.grid, -30.0, 25.0, cplx{0.05, 0.0}, 2.8);
  const SampledSignal w7 = smooth_bump(f.grid, 35.0, 20.0, cplx{0.04, 0.0}, 1.6);

  const SampledSignal x3 = add_signals(apply_operator(rev, x1), w3);
  const SampledSignal x4 = add_signals(x3, w4);
  f.inputs = {x1,
              add_signals(x1, w2),
              x3,
              x4,
              add_signals(x4, w5),
              add_signals(x1, w6),
              add_signals(x1, w7)};
  return f;
}

Fixture make_loop() {
  Fixture f;
  f.name = "loop";
  f.summary = "piecewise glue law with no frequency action; grouping check fails";
  f.topology.m = 2;
  Piecewise pw;
  pw.pieces = {{halfline_below(0.0), Identity{}},
               {halfline_above(0.0), TimeReversal{1.0}}};
  f.topology.pairs = {
      {1, 2, IntervalSet{{-kInf, 0.0}, {1.0, kInf}}, pw},
  };
  f.plan.delta = 0.1;
  f.plan.centers = {{1, 0.5}, {2, 1.2}};

  const SampledSignal x1 = gaussian_mixture(
      f.grid, {{1.0, -15.0, 6.0, 0.4}, {0.5, 8.0, 5.0, -0.3}});
  f.inputs = {x1, add_signals(apply_operator(OperatorSpec{pw}, x1),
                              smooth_bump(f.grid, 0.5, 0.35, cplx{0.3, 0.0}))};
  return f;
}

Fixture make_dummy_loop() {
  Fixture f;
  f.name = "dummy_loop";
  f.summary = "three-branch cycle whose non-root edge carries a reversal";
  f.topology.m = 3;
  const OperatorSpec rev = TimeReversal{1.0};
  f.topology.pairs = {
      {1, 2, halfline_below(0.0), Identity{}},
      {3, 1, halfline_below(0.0), Identity{}},
      {2, 3, halfline_above(0.0), rev},
  };
  f.plan.delta = 0.1;
  f.plan.centers = {{1, 0.5}, {2, 1.2}, {3, 1.9}};

  const SampledSignal x1 = gaussian_mixture(
      f.grid, {{1.0, -12.0, 5.0, 0.5}, {0.6, 10.0, 7.0, -0.2}});
  const SampledSignal x2 =
      add_signals(x1, smooth_bump(f.grid, 25.0, 15.0, cplx{0.2, 0.0}, 0.9));
  // x3 copies x1 below zero and the reversed x2 above; both cycle legs then
  // hold exactly.
  const SampledSignal x3 =
      splice(x1, apply_operator(rev, x2), halfline_above(0.0));
  f.inputs = {x1, x2, x3};
  return f;
}

Fixture make_two_interval_star() {
  Fixture f;
  f.name = "two_interval_star";
  f.summary = "four-branch star glued off [0,1) through affine and convolution laws";
  f.topology.m = 4;
  const IntervalSet glue{{-kInf, 0.0}, {1.0, kInf}};
  const OperatorSpec aff = Affine{0.75, 1.0, 0.5};
  SampledSignal ker = zero_signal(f.grid);
  for (int i = 0; i < f.grid.n; ++i) {
    const double t = f.grid.t(i);
    ker.v[static_cast<size_t>(i)] = cplx{std::exp(-2.0 * t * t), 0.0};
  }
  const OperatorSpec conv = Convolution{ker};
  f.topology.pairs = {
      {1, 2, glue, Identity{}},
      {1, 3, glue, aff},
      {1, 4, glue, conv},
  };
  f.plan.delta = 0.15;
  f.plan.centers = {{1, 0.9}, {2, 1.7}, {3, 2.5}, {4, 3.3}};

  const SampledSignal x1 = gaussian_mixture(
      f.grid,
      {{1.0, -12.0, 5.0, 0.6}, {0.7, 14.0, 6.0, -1.1}, {0.3, 2.0, 3.0, 2.3}});
  f.inputs = {
      x1,
      add_signals(x1, smooth_bump(f.grid, 0.5, 0.40, cplx{0.06, 0.0})),
      add_signals(apply_operator(aff, x1),
                  smooth_bump(f.grid, 0.5, 0.38, cplx{0.0, 0.05}, 2.0)),
      add_signals(apply_operator(conv, x1),
                  smooth_bump(f.grid, 0.5, 0.42, cplx{0.04, 0.0}, -1.5)),
  };
  // Updates creep once the recoverable part is in place; stop at 1e-6.
  f.pocs.tolerance = 1e-6;
  return f;
}

Fixture make_decoys() {
  Fixture f;
  f.name = "decoys";
  f.summary = "four identical-law branches split at t=0; band-limited parent";
  // The split side (-inf,0) covers three quarters of this window, leaving a
  // quarter-window to extrapolate, which is what one-sided recovery can
  // actually deliver at the bundled thresholds.
  f.grid.t0 = -96.0;
  f.topology.m = 4;
  for (int k = 2; k <= 4; ++k)
    f.topology.pairs.push_back({1, k, halfline_below(0.0), Identity{}});
  f.plan.delta = 0.1;
  f.plan.fixed_g1 = IntervalSet{{-kInf, -kPi / 2.0}, {kPi / 2.0, kInf}};
  // Notches sit above the atoms' spectral support, so carving them out of the
  // parent removes next to nothing and the carved parent stays extrapolable
  // from one-sided samples.
  f.plan.centers = {{2, 0.95}, {3, 1.20}, {4, 1.45}};

  // Pulse-train parent: atoms concentrate on the split side, and the fixed
  // anchor near t=-8 keeps a tangible, smoothly decaying tail inside the
  // unsplit quarter. Band content stays strictly inside (-pi/2, pi/2).
  const SampledSignal x1 = bandlimited_pulse_train(
      f.grid, 1.45, 7001u, 11, -82.0, -14.0, 4.5, 7.0, 0.45,
      {PulseAtom{cplx{1.0, 0.5}, -8.0, 5.0, 0.3}}, 2.0);
  f.inputs.push_back(x1);
  // Post-split deviations: wide smooth bumps with low carriers, so nearly
  // all of their energy stays inside the parent band.
  const double nu[3] = {0.30, 0.45, 0.60};
  for (int k = 2; k <= 4; ++k) {
    const SampledSignal w = add_signals(
        smooth_bump(f.grid, 15.0, 12.0, cplx{0.006, 0.003}, nu[k - 2]),
        smooth_bump(f.grid, 22.0, 8.0, cplx{0.004, 0.0}, 0.2));
    f.inputs.push_back(add_signals(x1, w));
  }

  // End-to-end defaults: one-sided samples up to t=0, recovery gaps widened
  // by the band complement, updates plateau near 1e-5 of the norm.
  f.sampling = SamplingSpec{kPi / 2.0, 1.0, 0};
  f.pocs.max_iterations = 20000;
  f.pocs.tolerance = 1e-5;
  f.widen_gaps_with_g1 = true;
  return f;
}

}  // namespace

std::vector<std::string> fixture_names() {
  return {"toy",  "example_A",         "loop",
          "dummy_loop", "two_interval_star", "decoys"};
}

Fixture make_fixture(const std::string& name) {
  if (name == "toy") return make_toy();
  if (name == "example_A") return make_example_a();
  if (name == "loop") return make_loop();
  if (name == "dummy_loop") return make_dummy_loop();
  if (name == "two_interval_star") return make_two_interval_star();
  if (name == "decoys") return make_decoys();
  throw std::invalid_argument("unknown fixture: " + name);
}

}  // namespace branched
