#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "branched/signal.hpp"
#include "branched/topology.hpp"

namespace branched {

// Uniform sampling of a band-limited branch: values at t = tau*k, k integer.
// With `s` set, only the one-sided subsequence k <= s is available.
struct SamplingSpec {
  double omega = 0.0;     // band half-width, > 0
  double tau = 0.0;       // sample spacing, 0 < tau <= pi/omega
  std::optional<long> s;  // one-sided cutoff index

  void validate() const;  // throws std::invalid_argument
};

// Where a signal is trusted (time) and where its spectrum vanishes (frequency).
struct ObservationSpec {
  IntervalSet observed;
  IntervalSet gap;
};

struct PocsOptions {
  int max_iterations = 50000;
  double tolerance = 1e-10;  // relative update per iteration
  double relaxation = 1.0;   // 1.0 is pure alternating projections
};

// (k, value) pairs with t = tau*k. Sample instants must land on grid points.
using SampleSeq = std::vector<std::pair<long, cplx>>;

// All in-window samples of x at spacing tau, keeping k <= s when s is set.
SampleSeq take_samples(const SampledSignal& x, double tau,
                       std::optional<long> s = std::nullopt);

// Truncated cardinal-series interpolation x(t) = sum v_k sinc((t - tau*k)/tau)
// on the working grid. spec.s must be empty: this is the two-sided classical
// reconstruction. Exact for band content strictly inside (-pi/tau, pi/tau) up
// to window truncation.
SampledSignal sinc_reconstruct(const GridSpec& g, const SamplingSpec& spec,
                               const SampleSeq& samples);

struct OneSidedReport {
  SampledSignal x;
  double condition = 0.0;  // sigma_max / sigma_min of the design matrix
  bool ill_conditioned = false;  // condition above 1e12
  int equations = 0;
  int unknowns = 0;
};

// Regularized least squares for the band-limited signal matching a one-sided
// sample sequence: unknowns are the spectrum bins with |omega_j| <= spec.omega,
// Tikhonov weight 1e-10 * sigma_max. spec.s must be set. Runs (and flags)
// even at the tau = pi/omega edge, where conditioning collapses.
OneSidedReport one_sided_reconstruct(const GridSpec& g, const SamplingSpec& spec,
                                     const SampleSeq& samples);

struct GapRecovery {
  SampledSignal x;
  int iterations = 0;
  double final_update = 0.0;
  bool converged = false;
  // Distance to the spectral subspace before, and to the observation set
  // after, each spectral projection; both provably non-increasing.
  std::vector<double> dist_gap;
  std::vector<double> dist_obs;
};

// Alternating projections between {agree with `observed` values on
// obs.observed} and {spectrum zero on obs.gap}. Monotonicity of both distance
// sequences is asserted every iteration. A cap hit returns converged = false.
GapRecovery gap_extrapolate(const SampledSignal& observed, const ObservationSpec& obs,
                            const PocsOptions& opt = {});

struct BranchRecovery {
  std::vector<SampledSignal> xs;        // [d-1] is branch d
  std::vector<std::vector<int>> chains;
  std::vector<int> iterations;
  std::vector<bool> converged;
  std::vector<double> residuals;        // glue residuals of the result
  std::vector<double> gap_energies;     // per branch, against g
};

// Chain propagation: recover branch 1 from its observed region and
// gap, then walk each admissible glue chain, recovering every branch from the
// transported values on the glue set plus its own gap.
// Throws ChainUnavailable when some branch has no admissible chain, and
// ConditionViolated when branch 1's gap has finite measure while the observed
// set is not a half-line.
BranchRecovery propagate_branches(const TopologySpec& t, const GapSpec& g,
                                  const SampledSignal& x1_observed,
                                  const IntervalSet& observed,
                                  const PocsOptions& opt = {});

struct SampleRecovery {
  OneSidedReport head;  // branch-1 reconstruction from the sample sequence
  BranchRecovery branches;
};

// One-sided sampling recovery of the whole family: samples of branch 1 at
// t = tau*k, k <= spec.s, feed one_sided_reconstruct; the result propagates
// through the glue chains. Requires tau * omega < pi strictly and a branch-1
// gap covering the band complement.
SampleRecovery sample_and_recover(const TopologySpec& t, const GapSpec& g,
                                  const SampledSignal& x1, const SamplingSpec& spec,
                                  const PocsOptions& opt = {});

struct UniquenessVerdict {
  bool unique = false;
  int nullspace_dim = 0;
  double sigma_ratio = 0.0;  // smallest/largest singular value of the stack
};

// Desk-scale certificate: the only n-vector vanishing on `observed` (time
// indices) with zero spectrum on `gap` (frequency bins) is zero. Stacks
// identity and DFT rows and counts singular values above 1e-10 * sigma_max.
// n must be at most 64.
UniquenessVerdict uniqueness_oracle(int n, const std::vector<int>& observed,
                                    const std::vector<int>& gap);

}  // namespace branched
