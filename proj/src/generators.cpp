#include "branched/generators.hpp"

#include "branched/errors.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace branched {

SampledSignal indicator_signal(const GridSpec& g, double a, double b) {
  SampledSignal x = zero_signal(g);
  for (int i = 0; i < g.n; ++i) {
    const double t = g.t(i);
    if (t >= a && t < b) x.v[static_cast<size_t>(i)] = cplx{1.0, 0.0};
  }
  return x;
}

SampledSignal smooth_bump(const GridSpec& g, double center, double halfwidth,
                          cplx amp, double carrier) {
  if (!(halfwidth > 0)) throw std::invalid_argument("bump halfwidth must be positive");
  SampledSignal x = zero_signal(g);
  for (int i = 0; i < g.n; ++i) {
    const double s = (g.t(i) - center) / halfwidth;
    if (std::abs(s) >= 1.0) continue;
    const double env = std::exp(1.0 - 1.0 / (1.0 - s * s));
    const double ph = carrier * g.t(i);
    x.v[static_cast<size_t>(i)] = amp * env * cplx{std::cos(ph), std::sin(ph)};
  }
  return x;
}

SampledSignal sinc_pulse(const GridSpec& g, double b, double center, double amp) {
  if (!(b > 0)) throw std::invalid_argument("sinc bandwidth must be positive");
  SampledSignal x = zero_signal(g);
  for (int i = 0; i < g.n; ++i) {
    const double u = b * (g.t(i) - center);
    const double s = (u == 0.0) ? 1.0 : std::sin(u) / u;
    x.v[static_cast<size_t>(i)] = cplx{amp * s * s * s, 0.0};
  }
  return x;
}

SampledSignal gaussian_mixture(const GridSpec& g,
                               const std::vector<GaussComponent>& parts) {
  SampledSignal x = zero_signal(g);
  for (const auto& p : parts) {
    if (!(p.width > 0)) throw std::invalid_argument("gaussian width must be positive");
    for (int i = 0; i < g.n; ++i) {
      const double t = g.t(i);
      const double u = (t - p.center) / p.width;
      const double env = p.amp * std::exp(-0.5 * u * u);
      const double ph = p.carrier * t;
      x.v[static_cast<size_t>(i)] += env * cplx{std::cos(ph), std::sin(ph)};
    }
  }
  return x;
}

SampledSignal random_bandlimited(const GridSpec& g, double omega_max,
                                 unsigned seed, double scale) {
  if (!(omega_max > 0)) throw std::invalid_argument("band edge must be positive");
  std::mt19937 rng{seed};
  std::normal_distribution<double> n01{0.0, 1.0};
  Spectrum s{g, std::vector<cplx>(static_cast<size_t>(g.n), cplx{0.0, 0.0})};
  const double pi = 3.14159265358979323846;
  // Bins visited in storage order: the draw sequence is part of the contract.
  for (int j = 0; j < g.n; ++j) {
    const double w = g.omega(j);
    if (std::abs(w) >= omega_max) continue;
    const double c = std::cos(pi * w / (2.0 * omega_max));
    const double env = c * c;
    s.v[static_cast<size_t>(j)] = env * cplx{n01(rng), n01(rng)};
  }
  SampledSignal x = idft(s);
  const double nrm = l2_norm(x);
  if (nrm == 0.0) throw std::invalid_argument("band holds no grid bins");
  const double f = scale / nrm;
  for (auto& v : x.v) v *= f;
  return x;
}

SampledSignal bandlimited_pulse_train(const GridSpec& g, double omega_max,
                                      unsigned seed, int count, double t_lo,
                                      double t_hi, double sigma_lo,
                                      double sigma_hi, double carrier_max,
                                      const std::vector<PulseAtom>& anchors,
                                      double scale) {
  if (!(omega_max > 0)) throw std::invalid_argument("band edge must be positive");
  if (count < 0) throw std::invalid_argument("atom count must be non-negative");
  if (count > 0 && !(t_lo < t_hi))
    throw std::invalid_argument("atom center range is empty");
  if (count > 0 && !(sigma_lo > 0 && sigma_lo <= sigma_hi))
    throw std::invalid_argument("atom width range is invalid");
  if (carrier_max < 0) throw std::invalid_argument("carrier bound must be non-negative");

  Spectrum s{g, std::vector<cplx>(static_cast<size_t>(g.n), cplx{0.0, 0.0})};
  const double root_2pi = std::sqrt(2.0 * 3.14159265358979323846);
  auto add_atom = [&](cplx amp, double c, double sg, double nu) {
    if (!(sg > 0)) throw std::invalid_argument("atom width must be positive");
    for (int j = 0; j < g.n; ++j) {
      const double w = g.omega(j);
      if (std::abs(w) > omega_max * (1.0 + 1e-12)) continue;
      const double d = w - nu;
      const double mag = sg * root_2pi * std::exp(-0.5 * sg * sg * d * d);
      const double ph = -d * c;
      s.v[static_cast<size_t>(j)] += amp * mag * cplx{std::cos(ph), std::sin(ph)};
    }
  };

  std::mt19937 rng{seed};
  std::uniform_real_distribution<double> uc{t_lo, t_hi};
  std::uniform_real_distribution<double> us{sigma_lo, sigma_hi};
  std::uniform_real_distribution<double> uk{-carrier_max, carrier_max};
  std::normal_distribution<double> n01{0.0, 1.0};
  for (int a = 0; a < count; ++a) {
    const double c = uc(rng);
    const double sg = us(rng);
    const double nu = uk(rng);
    const double re = n01(rng);
    const double im = n01(rng);
    add_atom(cplx{re, im}, c, sg, nu);
  }
  for (const PulseAtom& a : anchors) add_atom(a.amp, a.center, a.sigma, a.carrier);

  SampledSignal x = idft(s);
  const double nrm = l2_norm(x);
  if (nrm == 0.0) throw std::invalid_argument("pulse train is empty");
  const double f = scale / nrm;
  for (auto& v : x.v) v *= f;
  return x;
}

SampledSignal add_signals(SampledSignal a, const SampledSignal& b) {
  if (!(a.grid == b.grid)) throw IncommensurateMap{"adding signals from different grids"};
  for (size_t i = 0; i < a.v.size(); ++i) a.v[i] += b.v[i];
  return a;
}

}  // namespace branched
