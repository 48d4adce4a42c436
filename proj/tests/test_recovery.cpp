#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "branched/errors.hpp"
#include "branched/fixtures.hpp"
#include "branched/gap_construction.hpp"
#include "branched/generators.hpp"
#include "branched/operators.hpp"
#include "branched/recovery.hpp"

using namespace branched;

namespace {

const double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;

double sup_diff(const SampledSignal& a, const SampledSignal& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.v.size(); ++i) m = std::max(m, std::abs(a.v[i] - b.v[i]));
  return m;
}

// Relative L2 distance over grid points with t in [lo, hi).
double rel_l2_on(const SampledSignal& a, const SampledSignal& b, double lo,
                 double hi) {
  double num = 0.0, den = 0.0;
  for (int i = 0; i < a.grid.n; ++i) {
    const double t = a.grid.t(i);
    if (t < lo || t >= hi) continue;
    num += std::norm(a.v[static_cast<size_t>(i)] - b.v[static_cast<size_t>(i)]);
    den += std::norm(b.v[static_cast<size_t>(i)]);
  }
  REQUIRE(den > 0.0);
  return std::sqrt(num / den);
}

double rel_l2(const SampledSignal& a, const SampledSignal& b) {
  return rel_l2_on(a, b, -kInf, kInf);
}

// One-sided test family: seeded atoms well behind the cutoff at t = 0 plus a
// fixed anchor just before it, so the unobserved quarter holds a smoothly
// decaying, extrapolable tail.
SampledSignal one_sided_family(const GridSpec& g, unsigned seed, double scale) {
  return bandlimited_pulse_train(g, 1.45, seed, 11, g.t0 + 14.0, -14.0, 4.5, 7.0,
                                 0.45, {PulseAtom{cplx{1.0, 0.5}, -8.0, 5.0, 0.3}},
                                 scale);
}

IntervalSet whole_window(const GridSpec& g) {
  return IntervalSet::of(g.t0, g.window_end());
}

// Both projection gauges contract, interleaved:
// dist_gap[0] >= dist_obs[0] >= dist_gap[1] >= ...
void check_interleaved_monotone(const GapRecovery& r) {
  REQUIRE(r.dist_gap.size() == static_cast<size_t>(r.iterations));
  REQUIRE(r.dist_obs.size() == static_cast<size_t>(r.iterations));
  double prev = kInf;
  for (size_t k = 0; k < r.dist_gap.size(); ++k) {
    CHECK(r.dist_gap[k] <= prev * (1.0 + 1e-9) + 1e-12);
    CHECK(r.dist_obs[k] <= r.dist_gap[k] * (1.0 + 1e-9) + 1e-12);
    prev = r.dist_obs[k];
  }
}

}  // namespace

TEST_CASE("sampling spec validation") {
  CHECK_NOTHROW((SamplingSpec{kPi / 2.0, 1.0, {}}).validate());
  CHECK_NOTHROW((SamplingSpec{kPi / 2.0, 2.0, {}}).validate());  // critical spacing
  CHECK_THROWS_AS((SamplingSpec{0.0, 1.0, {}}).validate(), std::invalid_argument);
  CHECK_THROWS_AS((SamplingSpec{kPi / 2.0, 0.0, {}}).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS((SamplingSpec{kPi / 2.0, 2.1, {}}).validate(),
                  std::invalid_argument);
}

TEST_CASE("take_samples lands on grid points") {
  GridSpec g;
  const SampledSignal x = indicator_signal(g, -2.0, 2.0);

  SampleSeq s = take_samples(x, 1.0);
  REQUIRE(s.size() == 128);
  CHECK(s.front().first == -64);
  CHECK(s.back().first == 63);
  for (const auto& [k, v] : s) {
    const double expect = (k >= -2 && k < 2) ? 1.0 : 0.0;
    CHECK(std::abs(v - cplx{expect, 0.0}) == 0.0);
  }

  SampleSeq h = take_samples(x, 1.0, 0);
  REQUIRE(h.size() == 65);
  CHECK(h.back().first == 0);

  // Spacing 0.75 = 48 grid steps: every instant tau*k must be a grid point.
  SampleSeq q = take_samples(x, 0.75, {});
  REQUIRE(!q.empty());
  long prev_k = q.front().first - 1;
  for (const auto& [k, v] : q) {
    CHECK(k == prev_k + 1);
    prev_k = k;
    const double pos = (0.75 * static_cast<double>(k) - g.t0) / g.dt;
    CHECK(std::abs(pos - std::round(pos)) <= 1e-9);
    CHECK(v == x.v[static_cast<size_t>(std::lround(pos))]);
  }

  CHECK_THROWS_AS(take_samples(x, 1.0 / 3.0), IncommensurateMap);
  CHECK_THROWS_AS(take_samples(x, -1.0), std::invalid_argument);
  GridSpec off = g;
  off.t0 = 0.013;  // not a multiple of dt
  CHECK_THROWS_AS(take_samples(SampledSignal{off, x.v}, 1.0), IncommensurateMap);
}

TEST_CASE("cardinal series reproduces shifted atoms exactly") {
  GridSpec g;
  auto card = [](double u) {
    const double p = kPi * u;
    return std::abs(p) < 1e-12 ? 1.0 : std::sin(p) / p;
  };
  SampledSignal x = zero_signal(g);
  for (int i = 0; i < g.n; ++i) {
    const double t = g.t(i);
    x.v[static_cast<size_t>(i)] =
        2.0 * card(t - 3.0) + cplx{0.5, -0.25} * card(t + 7.0);
  }

  const SamplingSpec spec{kPi, 1.0, {}};
  SampledSignal out = sinc_reconstruct(g, spec, take_samples(x, 1.0));
  CHECK(sup_diff(out, x) <= 1e-9);

  SampledSignal zero = sinc_reconstruct(g, spec, {});
  CHECK(sup_diff(zero, zero_signal(g)) == 0.0);

  CHECK_THROWS_AS(sinc_reconstruct(g, SamplingSpec{kPi, 1.0, 0}, {}),
                  std::invalid_argument);
}

TEST_CASE("cardinal series captures a banded signal inside the window") {
  GridSpec g;
  auto bump = [](double u) {
    return std::abs(u) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - u * u)) : 0.0;
  };
  Spectrum S{g, std::vector<cplx>(static_cast<size_t>(g.n), cplx{0.0, 0.0})};
  for (int j = 0; j < g.n; ++j) {
    const double w = g.omega(j);
    S.v[static_cast<size_t>(j)] = cplx{1.5, 0.5} * bump((w - 0.4) / 1.4) +
                                  cplx{0.7, -0.9} * bump((w + 0.9) / 1.2);
  }
  const SampledSignal x = idft(S);
  SampledSignal out = sinc_reconstruct(g, {kPi, 1.0, {}}, take_samples(x, 1.0));

  // Missing out-of-window samples only matter near the edges; the inner 80%
  // of the window reconstructs to well below 1e-6.
  double sup_err = 0.0, sup_x = 0.0;
  for (int i = 0; i < g.n; ++i)
    sup_x = std::max(sup_x, std::abs(x.v[static_cast<size_t>(i)]));
  for (int i = 0; i < g.n; ++i) {
    if (std::abs(g.t(i)) > 51.2) continue;
    sup_err = std::max(
        sup_err, std::abs(out.v[static_cast<size_t>(i)] - x.v[static_cast<size_t>(i)]));
  }
  CHECK(sup_err <= 1e-6 * sup_x);
  CHECK(rel_l2_on(out, x, -51.2, 51.2) <= 1e-6);
}

TEST_CASE("one-sided reconstruction from half-window samples") {
  GridSpec g;
  const SampledSignal x = one_sided_family(g, 4242u, 1.0);
  const SamplingSpec spec{kPi / 2.0, 1.0, 0};
  SampleSeq samples = take_samples(x, 1.0, 0);
  REQUIRE(samples.size() == 65);

  OneSidedReport rep = one_sided_reconstruct(g, spec, samples);
  CHECK(rep.equations == 65);
  CHECK(rep.unknowns == 65);
  CHECK(rel_l2_on(rep.x, x, -64.0, 0.5 * g.dt) <= 1e-3);
  CHECK(rel_l2_on(rep.x, x, 0.5 * g.dt, 32.0 + 0.5 * g.dt) <= 5e-2);

  // The reconstruction lives on the band bins exactly.
  IntervalSet off_band{{-kInf, -kPi / 2.0 - 0.01}, {kPi / 2.0 + 0.01, kInf}};
  CHECK(gap_energy(dft(rep.x), off_band) <= 1e-16);

  CHECK_THROWS_AS(one_sided_reconstruct(g, SamplingSpec{kPi / 2.0, 1.0, {}}, samples),
                  std::invalid_argument);
  CHECK_THROWS_AS(one_sided_reconstruct(g, spec, {}), std::invalid_argument);
  CHECK_THROWS_AS(one_sided_reconstruct(g, SamplingSpec{kPi / 2.0, 1.0, -1}, samples),
                  std::invalid_argument);
}

TEST_CASE("critical spacing flags the design") {
  GridSpec g;
  const SampledSignal x = one_sided_family(g, 4242u, 1.0);
  OneSidedReport rep =
      one_sided_reconstruct(g, {kPi / 2.0, 2.0, 0}, take_samples(x, 2.0, 0));
  CHECK(rep.equations == 33);
  CHECK(rep.unknowns == 65);
  CHECK(rep.ill_conditioned);
  CHECK(!(rep.condition <= 1e12));
}

TEST_CASE("extrapolation across a short time gap") {
  GridSpec g;
  const SampledSignal truth = random_bandlimited(g, 1.0, 11u, 1.0);
  SampledSignal input = truth;
  for (int i = 0; i < g.n; ++i)
    if (g.t(i) >= 0.0 && g.t(i) < 2.5) input.v[static_cast<size_t>(i)] = 0.0;

  const ObservationSpec obs{IntervalSet{{-kInf, 0.0}, {2.5, kInf}},
                            IntervalSet{{-kInf, -1.05}, {1.05, kInf}}};
  GapRecovery rec = gap_extrapolate(input, obs);
  CHECK(rec.converged);
  CHECK(rec.iterations < 500);
  CHECK(rel_l2(rec.x, truth) <= 1e-8);
  check_interleaved_monotone(rec);

  // Over-relaxed variant converges to the same point without the
  // monotonicity bookkeeping.
  PocsOptions relaxed;
  relaxed.relaxation = 1.3;
  GapRecovery rr = gap_extrapolate(input, obs, relaxed);
  CHECK(rr.converged);
  CHECK(rel_l2(rr.x, truth) <= 1e-6);

  // A tiny cap is reported, not thrown.
  PocsOptions capped;
  capped.max_iterations = 3;
  GapRecovery rc = gap_extrapolate(input, obs, capped);
  CHECK(!rc.converged);
  CHECK(rc.iterations == 3);
}

TEST_CASE("feasible input is a fixed point") {
  GridSpec g;
  const SampledSignal x = random_bandlimited(g, 1.0, 5u, 2.0);
  const ObservationSpec obs{IntervalSet::whole_line(),
                            IntervalSet{{-kInf, -1.05}, {1.05, kInf}}};
  GapRecovery rec = gap_extrapolate(x, obs);
  CHECK(rec.iterations == 1);
  CHECK(rec.converged);
  CHECK(sup_diff(rec.x, x) == 0.0);
}

TEST_CASE("fully observed input comes back verbatim") {
  GridSpec g;
  const SampledSignal x = indicator_signal(g, 0.0, 1.0);
  const ObservationSpec obs{whole_window(g), IntervalSet::of(-0.25, 0.25)};
  GapRecovery rec = gap_extrapolate(x, obs);
  CHECK(rec.iterations == 1);
  CHECK(rec.converged);
  CHECK(sup_diff(rec.x, x) == 0.0);
  CHECK(rec.dist_gap[0] > 0.0);  // the request was infeasible and stays so
}

TEST_CASE("gap extrapolation input guards") {
  GridSpec g;
  const SampledSignal x = indicator_signal(g, 0.0, 1.0);
  const IntervalSet gap = IntervalSet::of(-0.25, 0.25);
  CHECK_THROWS_AS(gap_extrapolate(x, {IntervalSet{}, gap}), std::invalid_argument);
  CHECK_THROWS_AS(gap_extrapolate(x, {IntervalSet::of(1000.0, 1001.0), gap}),
                  std::invalid_argument);

  PocsOptions bad;
  bad.relaxation = 0.0;
  CHECK_THROWS_AS(gap_extrapolate(x, {whole_window(g), gap}, bad),
                  std::invalid_argument);
  bad.relaxation = 2.5;
  CHECK_THROWS_AS(gap_extrapolate(x, {whole_window(g), gap}, bad),
                  std::invalid_argument);
  PocsOptions zero_cap;
  zero_cap.max_iterations = 0;
  CHECK_THROWS_AS(gap_extrapolate(x, {whole_window(g), gap}, zero_cap),
                  std::invalid_argument);
  PocsOptions neg_tol;
  neg_tol.tolerance = -1.0;
  CHECK_THROWS_AS(gap_extrapolate(x, {whole_window(g), gap}, neg_tol),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      gap_extrapolate(SampledSignal{g, std::vector<cplx>(3)}, {whole_window(g), gap}),
      std::invalid_argument);
}

TEST_CASE("underdetermined gap leaves the hole unresolved") {
  GridSpec g;
  const SampledSignal truth = random_bandlimited(g, 1.0, 13u, 1.0);
  SampledSignal input = truth;
  for (int i = 0; i < g.n; ++i)
    if (g.t(i) >= 0.0 && g.t(i) < 16.0) input.v[static_cast<size_t>(i)] = 0.0;

  // 1024 missing samples against an 11-bin spectral gap: the projection
  // angle is tiny, the iteration crawls, and the truth stays out of reach.
  const ObservationSpec obs{IntervalSet{{-kInf, 0.0}, {16.0, kInf}},
                            IntervalSet::of(-0.27, 0.27)};
  PocsOptions opt;
  opt.max_iterations = 500;
  GapRecovery rec = gap_extrapolate(input, obs, opt);
  CHECK(!rec.converged);
  CHECK(rec.iterations == 500);
  CHECK(rec.dist_gap.back() >= 1e-2);
  CHECK(rel_l2(rec.x, truth) >= 1e-2);
}

TEST_CASE("uniqueness oracle hand cases at n = 4") {
  std::vector<int> all{0, 1, 2, 3};
  UniquenessVerdict v = uniqueness_oracle(4, all, {});
  CHECK(v.unique);
  CHECK(v.nullspace_dim == 0);

  // (0, 1, 0, -1) vanishes at indices {0, 2} and on DFT bins {0, 2}.
  v = uniqueness_oracle(4, {0, 2}, {0, 2});
  CHECK(!v.unique);
  CHECK(v.nullspace_dim == 1);

  v = uniqueness_oracle(4, {0, 1}, {0, 1});
  CHECK(v.unique);
  CHECK(v.sigma_ratio > 1e-2);

  v = uniqueness_oracle(4, {}, {});
  CHECK(v.nullspace_dim == 4);

  // Duplicates collapse.
  v = uniqueness_oracle(4, {0, 0, 1, 1}, {0, 1, 0});
  CHECK(v.unique);

  CHECK_THROWS_AS(uniqueness_oracle(0, {}, {}), std::invalid_argument);
  CHECK_THROWS_AS(uniqueness_oracle(65, {}, {}), std::invalid_argument);
  CHECK_THROWS_AS(uniqueness_oracle(4, {4}, {}), std::invalid_argument);
  CHECK_THROWS_AS(uniqueness_oracle(4, {}, {-1}), std::invalid_argument);
}

TEST_CASE("uniqueness sweep at n = 32") {
  const int n = 32;
  auto suffix = [&](int len) {
    std::vector<int> s;
    for (int i = n - len; i < n; ++i) s.push_back(i);
    return s;
  };
  auto bins = [&](int off, int len) {
    std::vector<int> b;
    for (int j = off; j < off + len; ++j) b.push_back(j);
    return b;
  };

  // Suffix observation of length L plus 32-L consecutive spectrum bins pins
  // the vector: the missing-sample block meets a full Vandermonde system.
  for (int L : {16, 20, 24, 28, 31}) {
    const int gl = n - L;
    for (int off : {0, 5, 11, 16}) {
      if (off + gl > n) continue;
      UniquenessVerdict v = uniqueness_oracle(n, suffix(L), bins(off, gl));
      CHECK(v.unique);
      CHECK(v.nullspace_dim == 0);
      CHECK(v.sigma_ratio >= 1e-9);  // far above the rank cutoff
    }
  }
  // Extra bins only help.
  for (int L : {16, 24})
    for (int extra : {2, 6})
      CHECK(uniqueness_oracle(n, suffix(L), bins(0, n - L + extra)).unique);

  // Too little data in total: the count bound already decides.
  for (int L = 1; L <= 4; ++L)
    for (int gl = 1; L + gl < 8; ++gl) {
      UniquenessVerdict v = uniqueness_oracle(n, suffix(L), bins(0, gl));
      CHECK(!v.unique);
      CHECK(v.nullspace_dim == n - L - gl);
    }
}

TEST_CASE("gap extrapolation agrees with the oracle at n = 32") {
  GridSpec g;
  g.t0 = -16.0;
  g.dt = 1.0;
  g.n = 32;
  const double dw = g.domega();

  struct Instance {
    std::vector<int> observed;  // time indices
    std::vector<int> gap;       // natural spectrum bins
    unsigned seed;
  };
  auto range = [](int lo, int hi) {
    std::vector<int> r;
    for (int i = lo; i < hi; ++i) r.push_back(i);
    return r;
  };
  const std::vector<Instance> instances = {
      {range(4, 32), range(0, 16), 3u},   // pinned: converges to the truth
      {range(28, 32), {0, 1, 2}, 3u},     // 25-dimensional slack: it cannot
  };

  for (const Instance& inst : instances) {
    UniquenessVerdict v = uniqueness_oracle(g.n, inst.observed, inst.gap);

    // Truth: random spectrum zeroed on the gap bins.
    std::mt19937 rng{inst.seed};
    std::normal_distribution<double> n01{0.0, 1.0};
    Spectrum S{g, std::vector<cplx>(static_cast<size_t>(g.n))};
    for (auto& c : S.v) c = cplx{n01(rng), n01(rng)};
    for (int j : inst.gap) S.v[static_cast<size_t>(j)] = cplx{0.0, 0.0};
    const SampledSignal truth = idft(S);

    // Observed indices are contiguous in both instances.
    const IntervalSet obs_set = IntervalSet::of(
        g.t(inst.observed.front()), g.t(inst.observed.back()) + g.dt);
    IntervalSet gap_set;
    for (int j : inst.gap) {
      const double w = g.omega(j);
      gap_set = gap_set.unite(IntervalSet::of(w - 0.5 * dw, w + 0.5 * dw));
    }
    REQUIRE(freq_bins(gap_set, g) == inst.gap);

    SampledSignal input = zero_signal(g);
    for (int i : inst.observed)
      input.v[static_cast<size_t>(i)] = truth.v[static_cast<size_t>(i)];

    PocsOptions opt;
    opt.max_iterations = 20000;
    opt.tolerance = 1e-12;
    GapRecovery rec = gap_extrapolate(input, {obs_set, gap_set}, opt);
    const double err = rel_l2(rec.x, truth);
    if (v.unique) {
      CHECK(err <= 1e-6);
    } else {
      CHECK(err >= 1e-2);
    }
    // The solver's outcome matches the certificate on every tested instance.
    CHECK((err <= 1e-3) == v.unique);
  }
}

TEST_CASE("propagation transports exactly through inverted glue") {
  GridSpec g;

  // Stored pair (2, 1): x1 = 2 * x2(0.5 - t) on t < 0, so reaching branch 2
  // needs the inverse map and the reflected glue image.
  TopologySpec affine_t;
  affine_t.m = 2;
  affine_t.pairs.push_back({2, 1, IntervalSet::of(-kInf, 0.0), Affine{2.0, -1.0, 0.5}});
  const SampledSignal x2 = random_bandlimited(g, 1.0, 21u, 1.0);
  const SampledSignal x1 = apply_operator(Affine{2.0, -1.0, 0.5}, x2);
  GapSpec gaps;
  gaps.set_gap(1, IntervalSet{{-kInf, -1.05}, {1.05, kInf}});
  gaps.set_gap(2, IntervalSet{{-kInf, -1.05}, {1.05, kInf}});

  BranchRecovery out = propagate_branches(affine_t, gaps, x1, whole_window(g));
  REQUIRE(out.xs.size() == 2);
  CHECK(out.iterations[0] == 1);
  CHECK(sup_diff(out.xs[0], x1) == 0.0);
  CHECK(rel_l2(out.xs[1], x2) <= 1e-10);
  CHECK(out.chains[1] == std::vector<int>{1, 2});
  for (double r : out.residuals) CHECK(r <= 1e-12);
  for (double e : out.gap_energies) CHECK(e <= 1e-12);

  // Reversal glue transports backward unchanged (it is its own inverse).
  TopologySpec rev_t;
  rev_t.m = 2;
  rev_t.pairs.push_back({2, 1, IntervalSet::of(3.0, kInf), TimeReversal{3.0}});
  const SampledSignal y2 = random_bandlimited(g, 0.8, 22u, 1.0);
  const SampledSignal y1 = apply_operator(TimeReversal{3.0}, y2);
  GapSpec rgaps;
  rgaps.set_gap(1, IntervalSet{{-kInf, -0.85}, {0.85, kInf}});
  rgaps.set_gap(2, IntervalSet{{-kInf, -0.85}, {0.85, kInf}});
  BranchRecovery rout = propagate_branches(rev_t, rgaps, y1, whole_window(g));
  CHECK(rel_l2(rout.xs[1], y2) <= 1e-10);
}

TEST_CASE("propagation guards") {
  // Finite gaps strand branch 5 of the bundled seven-branch family.
  Fixture a = make_fixture("example_A");
  Construction c = construct(a.topology, a.inputs, a.plan);
  try {
    propagate_branches(a.topology, c.gaps, c.xs[0], whole_window(a.grid));
    FAIL("expected ChainUnavailable");
  } catch (const ChainUnavailable& e) {
    CHECK(std::string(e.what()).find("branch 5") != std::string::npos);
  }

  // No spectral gap and an incomplete observation cannot determine branch 1.
  TopologySpec solo;
  solo.m = 1;
  GridSpec g;
  CHECK_THROWS_AS(propagate_branches(solo, GapSpec{}, zero_signal(g),
                                     IntervalSet::of(-64.0, 0.0)),
                  ConditionViolated);
}

TEST_CASE("propagation fills the unsplit quarter of the decoys family") {
  Fixture f = make_fixture("decoys");
  Construction c = construct(f.topology, f.inputs, f.plan);

  // Recovery-side gap declarations: each branch keeps its carved notch and
  // adds the shared band complement, which the construction outputs satisfy
  // up to the deviations' out-of-band tails.
  GapSpec rg = c.gaps;
  for (int d = 2; d <= 4; ++d)
    rg.set_gap(d, c.gaps.gap(d).unite(*f.plan.fixed_g1));

  // The glue and gap constraint sets meet only up to the deviations'
  // out-of-band tails, so updates plateau near 1e-5 of the signal norm.
  PocsOptions opt;
  opt.max_iterations = 20000;
  opt.tolerance = 1e-5;
  BranchRecovery out =
      propagate_branches(f.topology, rg, c.xs[0], whole_window(f.grid), opt);

  CHECK(out.iterations[0] == 1);
  CHECK(sup_diff(out.xs[0], c.xs[0]) == 0.0);
  for (int d = 2; d <= 4; ++d) {
    CHECK(out.converged[static_cast<size_t>(d - 1)]);
    CHECK(rel_l2(out.xs[static_cast<size_t>(d - 1)], c.xs[static_cast<size_t>(d - 1)]) <=
          2e-2);
    CHECK(out.chains[static_cast<size_t>(d - 1)] == std::vector<int>{1, d});
  }
  for (double r : out.residuals) CHECK(r <= 1e-9);
  for (double e : out.gap_energies) CHECK(e <= 1e-8);
}

TEST_CASE("one-sided sampling recovers the decoys family end to end") {
  Fixture f = make_fixture("decoys");
  Construction c = construct(f.topology, f.inputs, f.plan);
  GapSpec rg = c.gaps;
  for (int d = 2; d <= 4; ++d)
    rg.set_gap(d, c.gaps.gap(d).unite(*f.plan.fixed_g1));

  const SamplingSpec spec{kPi / 2.0, 1.0, 0};
  PocsOptions opt;
  opt.max_iterations = 20000;
  opt.tolerance = 1e-5;
  SampleRecovery r = sample_and_recover(f.topology, rg, c.xs[0], spec, opt);

  CHECK(r.head.equations == 97);
  CHECK(r.head.unknowns == 65);
  CHECK(rel_l2_on(r.head.x, c.xs[0], -96.0, 0.5 * f.grid.dt) <= 1e-3);
  CHECK(rel_l2_on(r.head.x, c.xs[0], 0.5 * f.grid.dt, 32.0) <= 5e-2);

  REQUIRE(r.branches.xs.size() == 4);
  for (int d = 1; d <= 4; ++d)
    CHECK(rel_l2(r.branches.xs[static_cast<size_t>(d - 1)],
                 c.xs[static_cast<size_t>(d - 1)]) <= 5e-2);
  for (double res : r.branches.residuals) CHECK(res <= 1e-9);

  // Same seed, same bytes.
  SampleRecovery r2 = sample_and_recover(f.topology, rg, c.xs[0], spec, opt);
  for (int d = 1; d <= 4; ++d)
    CHECK(sup_diff(r.branches.xs[static_cast<size_t>(d - 1)],
                   r2.branches.xs[static_cast<size_t>(d - 1)]) == 0.0);
}

TEST_CASE("one-sided sampling guards") {
  Fixture f = make_fixture("decoys");
  Construction c = construct(f.topology, f.inputs, f.plan);

  // Critical spacing loses uniqueness and is rejected outright.
  CHECK_THROWS_AS(
      sample_and_recover(f.topology, c.gaps, c.xs[0], SamplingSpec{kPi / 2.0, 2.0, 0}),
      std::invalid_argument);
  CHECK_THROWS_AS(
      sample_and_recover(f.topology, c.gaps, c.xs[0], SamplingSpec{kPi / 2.0, 1.0, {}}),
      std::invalid_argument);

  // Branch 1 must declare a gap covering the band complement.
  GapSpec notch_only = c.gaps;
  notch_only.set_gap(1, IntervalSet::of(0.3, 0.5));
  CHECK_THROWS_AS(sample_and_recover(f.topology, notch_only, c.xs[0],
                                     SamplingSpec{kPi / 2.0, 1.0, 0}),
                  ConditionViolated);
}
