#pragma once

#include <vector>

#include "branched/signal.hpp"

namespace branched {

// Deterministic test-signal builders. Everything seeded is reproducible
// bit for bit on one platform.

// 1 on [a, b), 0 elsewhere.
SampledSignal indicator_signal(const GridSpec& g, double a, double b);

// amp * exp(1 - 1/(1 - s^2)) * e^{i*carrier*t} with s = (t-center)/halfwidth;
// identically zero outside (center-halfwidth, center+halfwidth).
SampledSignal smooth_bump(const GridSpec& g, double center, double halfwidth,
                          cplx amp, double carrier = 0.0);

// amp * (sin(b*u)/(b*u))^3 with u = t - center; cubed so the tails decay
// fast enough to ignore window truncation.
SampledSignal sinc_pulse(const GridSpec& g, double b, double center,
                         double amp = 1.0);

struct GaussComponent {
  double amp = 1.0;
  double center = 0.0;
  double width = 1.0;
  double carrier = 0.0;
};

SampledSignal gaussian_mixture(const GridSpec& g,
                               const std::vector<GaussComponent>& parts);

// Spectral synthesis: bins with |omega| < omega_max get seeded complex
// gaussians under a cos^2 envelope vanishing at the band edge; the result is
// scaled to L2 norm `scale`. Exactly band-limited on the grid by build.
SampledSignal random_bandlimited(const GridSpec& g, double omega_max,
                                 unsigned seed, double scale = 1.0);

struct PulseAtom {
  cplx amp{1.0, 0.0};
  double center = 0.0;
  double sigma = 1.0;
  double carrier = 0.0;
};

// Mixture of gaussian pulses assembled directly in the band: each atom adds
// amp * sigma * sqrt(2pi) * exp(-sigma^2 (w-carrier)^2 / 2) * e^{-i(w-carrier)c}
// to every bin |omega_j| <= omega_max, so the result is exactly band-limited
// on the grid while staying time-concentrated near the atom centers. `count`
// seeded atoms (drawn per atom in the order center, sigma, carrier, amp real,
// amp imaginary) precede the fixed `anchors`; the sum is scaled to L2 norm
// `scale`.
SampledSignal bandlimited_pulse_train(const GridSpec& g, double omega_max,
                                      unsigned seed, int count, double t_lo,
                                      double t_hi, double sigma_lo,
                                      double sigma_hi, double carrier_max,
                                      const std::vector<PulseAtom>& anchors = {},
                                      double scale = 1.0);

SampledSignal add_signals(SampledSignal a, const SampledSignal& b);

}  // namespace branched
