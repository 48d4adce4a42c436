#include "branched/signal.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace branched {

namespace {

// Plan cache keyed by (n, sign). Plans are created unaligned so they can run
// on plain vector storage; creation is serialized, execution is re-entrant.
class FftEngine {
 public:
  static FftEngine& instance() {
    static FftEngine e;
    return e;
  }

  void run(std::vector<cplx>& data, int sign) {
    fftw_plan plan = nullptr;
    {
      std::scoped_lock lock(mu_);
      auto key = std::make_pair(static_cast<int>(data.size()), sign);
      auto it = plans_.find(key);
      if (it == plans_.end()) {
        std::vector<cplx> probe(data.size());
        auto* p = reinterpret_cast<fftw_complex*>(probe.data());
        plan = fftw_plan_dft_1d(static_cast<int>(data.size()), p, p, sign,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!plan) throw std::runtime_error("fftw plan creation failed");
        plans_.emplace(key, plan);
      } else {
        plan = it->second;
      }
    }
    auto* d = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, d, d);
  }

 private:
  FftEngine() = default;
  std::mutex mu_;
  std::map<std::pair<int, int>, fftw_plan> plans_;
};

}  // namespace

double GridSpec::domega() const { return 2.0 * std::numbers::pi / (n * dt); }

double GridSpec::omega(int j) const { return domega() * signed_bin(j); }

void GridSpec::validate() const {
  if (n <= 0 || (n & (n - 1)) != 0)
    throw std::invalid_argument("grid size must be a positive power of two");
  if (!(dt > 0.0) || !std::isfinite(dt) || !std::isfinite(t0))
    throw std::invalid_argument("grid step and origin must be finite, dt > 0");
}

SampledSignal zero_signal(const GridSpec& g) {
  return SampledSignal{g, std::vector<cplx>(static_cast<size_t>(g.n))};
}

Spectrum dft(const SampledSignal& x) {
  x.grid.validate();
  if (static_cast<int>(x.v.size()) != x.grid.n)
    throw std::invalid_argument("sample count does not match grid");
  Spectrum out{x.grid, x.v};
  FftEngine::instance().run(out.v, FFTW_FORWARD);
  const double dt = x.grid.dt;
  for (int j = 0; j < x.grid.n; ++j) {
    double phase = -x.grid.omega(j) * x.grid.t0;
    out.v[j] *= dt * std::polar(1.0, phase);
  }
  return out;
}

SampledSignal idft(const Spectrum& X) {
  X.grid.validate();
  if (static_cast<int>(X.v.size()) != X.grid.n)
    throw std::invalid_argument("bin count does not match grid");
  SampledSignal out{X.grid, X.v};
  for (int j = 0; j < X.grid.n; ++j) {
    double phase = X.grid.omega(j) * X.grid.t0;
    out.v[j] *= std::polar(1.0, phase);
  }
  FftEngine::instance().run(out.v, FFTW_BACKWARD);
  const double scale = 1.0 / (X.grid.n * X.grid.dt);
  for (auto& v : out.v) v *= scale;
  return out;
}

double l2_norm(const SampledSignal& x) {
  double s = 0.0;
  for (const cplx& v : x.v) s += std::norm(v);
  return std::sqrt(s * x.grid.dt);
}

double l2_norm(const Spectrum& X) {
  double s = 0.0;
  for (const cplx& v : X.v) s += std::norm(v);
  return std::sqrt(s * X.grid.domega() / (2.0 * std::numbers::pi));
}

double sup_norm(const SampledSignal& x) {
  double m = 0.0;
  for (const cplx& v : x.v) m = std::max(m, std::abs(v));
  return m;
}

std::vector<int> freq_bins(const IntervalSet& s, const GridSpec& g) {
  std::vector<int> bins;
  for (int j = 0; j < g.n; ++j)
    if (s.contains(g.omega(j))) bins.push_back(j);
  return bins;
}

double gap_energy(const Spectrum& X, const IntervalSet& gap) {
  double total = 0.0;
  for (const cplx& v : X.v) total += std::norm(v);
  if (total == 0.0) return 0.0;
  double inside = 0.0;
  for (int j : freq_bins(gap, X.grid)) inside += std::norm(X.v[j]);
  return inside / total;
}

SampledSignal edge_taper(const SampledSignal& x, double fraction) {
  if (!(fraction >= 0.0) || fraction > 0.5)
    throw std::invalid_argument("taper fraction must lie in [0, 0.5]");
  SampledSignal out = x;
  const int n = static_cast<int>(out.v.size());
  const int ramp = static_cast<int>(std::lround(fraction * n));
  for (int i = 0; i < ramp; ++i) {
    double w = 0.5 - 0.5 * std::cos(std::numbers::pi * (i + 0.5) / ramp);
    out.v[static_cast<size_t>(i)] *= w;
    out.v[static_cast<size_t>(n - 1 - i)] *= w;
  }
  return out;
}

const IntervalSet& GapSpec::gap(int branch) const {
  static const IntervalSet empty;
  if (branch < 1 || branch > static_cast<int>(gaps.size())) return empty;
  return gaps[static_cast<size_t>(branch - 1)];
}

void GapSpec::set_gap(int branch, IntervalSet s) {
  if (branch < 1) throw std::invalid_argument("branch ids are 1-based");
  if (branch > static_cast<int>(gaps.size()))
    gaps.resize(static_cast<size_t>(branch));
  gaps[static_cast<size_t>(branch - 1)] = std::move(s);
}

}  // namespace branched
