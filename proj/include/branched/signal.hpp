#pragma once

#include <complex>
#include <vector>

#include "branched/interval_set.hpp"

namespace branched {

using cplx = std::complex<double>;

// Uniform time grid t_i = t0 + i*dt, i in [0, n). n must be a power of two.
// The matching frequency grid is omega_j = 2*pi*j'/(n*dt) with j' the signed
// alias of j in [-n/2, n/2); spectra are stored in natural DFT bin order.
struct GridSpec {
  double t0 = -64.0;
  double dt = 1.0 / 64.0;
  int n = 8192;

  double t(int i) const { return t0 + i * dt; }
  double domega() const;
  int signed_bin(int j) const { return j < n / 2 ? j : j - n; }
  // Natural bin index for a signed alias in [-n/2, n/2).
  int bin_of(int signed_j) const { return signed_j >= 0 ? signed_j : signed_j + n; }
  double omega(int j) const;
  double window_end() const { return t0 + n * dt; }

  void validate() const;  // throws std::invalid_argument
  bool operator==(const GridSpec&) const = default;
};

struct SampledSignal {
  GridSpec grid;
  std::vector<cplx> v;
};

struct Spectrum {
  GridSpec grid;
  std::vector<cplx> v;
};

SampledSignal zero_signal(const GridSpec& g);

// Forward transform approximating (Fx)(i*omega) = integral e^{-i*omega*t} x(t) dt:
// X(omega_j) = dt * sum_i x(t_i) e^{-i*omega_j*t_i}. idft is its exact inverse.
Spectrum dft(const SampledSignal& x);
SampledSignal idft(const Spectrum& X);

// L2 norms with the grid weights that make Parseval exact:
// norm(x)^2 = sum |x_i|^2 dt,  norm(X)^2 = sum |X_j|^2 domega / (2*pi).
double l2_norm(const SampledSignal& x);
double l2_norm(const Spectrum& X);
double sup_norm(const SampledSignal& x);

// Bins whose omega_j lies in the set (half-open membership), natural order.
std::vector<int> freq_bins(const IntervalSet& s, const GridSpec& g);

// Fraction of spectral energy inside the gap; 0 for an identically zero input.
double gap_energy(const Spectrum& X, const IntervalSet& gap);

// Raised-cosine ramp over the first and last `fraction` of the window.
// Suppresses truncation leakage in convergence studies; not used anywhere a
// constraint residual is checked, since tapering perturbs the constraints.
SampledSignal edge_taper(const SampledSignal& x, double fraction = 0.05);

// Spectral gaps per branch, 1-based branch ids; absent branch means no gap.
struct GapSpec {
  std::vector<IntervalSet> gaps;  // index 0 <-> branch 1

  const IntervalSet& gap(int branch) const;
  void set_gap(int branch, IntervalSet s);
  int max_branch() const { return static_cast<int>(gaps.size()); }
};

}  // namespace branched
