#include "branched/operators.hpp"

#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>

#include "branched/errors.hpp"

namespace branched {

namespace {

// Grid-commensurate integer for v = (shift)/dt; rejects anything off-grid.
long long exact_steps(double v, const char* what) {
  double r = std::round(v);
  if (!(std::abs(v - r) <= 1e-9 * std::max(1.0, std::abs(v))))
    throw IncommensurateMap(std::string(what) +
                            " does not land on the sample grid");
  return static_cast<long long>(r);
}

size_t wrap(long long i, int n) {
  long long m = i % n;
  if (m < 0) m += n;
  return static_cast<size_t>(m);
}

SampledSignal reversal_on_grid(const SampledSignal& x, double tau, double a) {
  const GridSpec& g = x.grid;
  // Needed so the time map and its frequency reflection agree at every bin
  // including the Nyquist alias.
  exact_steps(g.t0 / g.dt, "grid origin under reversal");
  long long M = exact_steps((tau - 2.0 * g.t0) / g.dt, "reversal pivot");
  SampledSignal out = zero_signal(g);
  for (int n = 0; n < g.n; ++n) out.v[n] = a * x.v[wrap(M - n, g.n)];
  return out;
}

SampledSignal shift_on_grid(const SampledSignal& x, double c, double a) {
  const GridSpec& g = x.grid;
  long long K = exact_steps(c / g.dt, "shift");
  SampledSignal out = zero_signal(g);
  for (int n = 0; n < g.n; ++n) out.v[n] = a * x.v[wrap(n + K, g.n)];
  return out;
}

}  // namespace

bool is_identity(const OperatorSpec& op) {
  return std::holds_alternative<Identity>(op);
}

bool op_equal(const OperatorSpec& a, const OperatorSpec& b) {
  if (a.index() != b.index()) return false;
  if (std::holds_alternative<Identity>(a)) return true;
  if (const auto* ra = std::get_if<TimeReversal>(&a))
    return *ra == std::get<TimeReversal>(b);
  if (const auto* fa = std::get_if<Affine>(&a))
    return *fa == std::get<Affine>(b);
  if (const auto* ca = std::get_if<Convolution>(&a)) {
    const auto& cb = std::get<Convolution>(b);
    return ca->kernel.grid == cb.kernel.grid && ca->kernel.v == cb.kernel.v;
  }
  if (const auto* ma = std::get_if<FreqMultiplier>(&a))
    return ma->label == std::get<FreqMultiplier>(b).label;
  const auto& pa = std::get<Piecewise>(a);
  const auto& pb = std::get<Piecewise>(b);
  if (pa.pieces.size() != pb.pieces.size()) return false;
  for (size_t i = 0; i < pa.pieces.size(); ++i) {
    if (!(pa.pieces[i].first == pb.pieces[i].first)) return false;
    OperatorSpec sa = std::visit(
        [](const auto& v) { return OperatorSpec(v); }, pa.pieces[i].second);
    OperatorSpec sb = std::visit(
        [](const auto& v) { return OperatorSpec(v); }, pb.pieces[i].second);
    if (!op_equal(sa, sb)) return false;
  }
  return true;
}

std::string op_label(const OperatorSpec& op) {
  char buf[96];
  if (std::holds_alternative<Identity>(op)) return "identity";
  if (const auto* r = std::get_if<TimeReversal>(&op)) {
    std::snprintf(buf, sizeof buf, "reverse(tau=%g)", r->tau);
    return buf;
  }
  if (const auto* f = std::get_if<Affine>(&op)) {
    std::snprintf(buf, sizeof buf, "affine(a=%g,b=%g,c=%g)", f->a, f->b, f->c);
    return buf;
  }
  if (std::holds_alternative<Convolution>(op)) return "conv";
  if (const auto* m = std::get_if<FreqMultiplier>(&op))
    return "freqmul:" + m->label;
  return "piecewise";
}

SampledSignal apply_operator(const OperatorSpec& op, const SampledSignal& x) {
  x.grid.validate();
  if (std::holds_alternative<Identity>(op)) return x;
  if (const auto* r = std::get_if<TimeReversal>(&op))
    return reversal_on_grid(x, r->tau, 1.0);
  if (const auto* f = std::get_if<Affine>(&op)) {
    if (f->b == 1.0) return shift_on_grid(x, f->c, f->a);
    if (f->b == -1.0) return reversal_on_grid(x, f->c, f->a);
    throw IncommensurateMap("affine time scaling requires b in {+1,-1}");
  }
  if (const auto* c = std::get_if<Convolution>(&op)) {
    if (!(c->kernel.grid == x.grid))
      throw std::invalid_argument("convolution kernel grid mismatch");
    Spectrum H = dft(c->kernel);
    Spectrum X = dft(x);
    for (int j = 0; j < X.grid.n; ++j) X.v[j] *= H.v[j];
    return idft(X);
  }
  if (const auto* m = std::get_if<FreqMultiplier>(&op)) {
    Spectrum X = dft(x);
    for (int j = 0; j < X.grid.n; ++j) X.v[j] *= m->h(X.grid.omega(j));
    return idft(X);
  }
  const auto& pw = std::get<Piecewise>(op);
  SampledSignal out = zero_signal(x.grid);
  for (const auto& [region, sub] : pw.pieces) {
    OperatorSpec sub_op =
        std::visit([](const auto& v) { return OperatorSpec(v); }, sub);
    SampledSignal y = apply_operator(sub_op, x);
    for (int n : clip_to_grid(region, x.grid.t0, x.grid.dt, x.grid.n))
      out.v[n] = y.v[n];
  }
  return out;
}

int reflected_bin(const GridSpec& g, int j) {
  if (j == 0 || j == g.n / 2) return j;
  return g.n - j;
}

std::optional<SpectralAction> spectral_action(const OperatorSpec& op,
                                              const GridSpec& grid) {
  if (std::holds_alternative<Identity>(op))
    return SpectralAction{ActionKind::Multiplier,
                          [](double) { return cplx(1.0, 0.0); }};
  if (const auto* r = std::get_if<TimeReversal>(&op)) {
    double tau = r->tau;
    exact_steps(grid.t0 / grid.dt, "grid origin under reversal");
    exact_steps((tau - 2.0 * grid.t0) / grid.dt, "reversal pivot");
    return SpectralAction{ActionKind::Reflection, [tau](double w) {
                            return std::polar(1.0, -w * tau);
                          }};
  }
  if (const auto* f = std::get_if<Affine>(&op)) {
    double a = f->a, c = f->c;
    if (f->b == 1.0) {
      exact_steps(c / grid.dt, "shift");
      return SpectralAction{ActionKind::Multiplier, [a, c](double w) {
                              return a * std::polar(1.0, w * c);
                            }};
    }
    if (f->b == -1.0) {
      exact_steps(grid.t0 / grid.dt, "grid origin under reversal");
      exact_steps((c - 2.0 * grid.t0) / grid.dt, "reversal pivot");
      return SpectralAction{ActionKind::Reflection, [a, c](double w) {
                              return a * std::polar(1.0, -w * c);
                            }};
    }
    return std::nullopt;
  }
  if (const auto* c = std::get_if<Convolution>(&op)) {
    if (!(c->kernel.grid == grid))
      throw std::invalid_argument("convolution kernel grid mismatch");
    auto table = std::make_shared<Spectrum>(dft(c->kernel));
    return SpectralAction{
        ActionKind::Multiplier, [table](double w) {
          const GridSpec& g = table->grid;
          long long j = std::llround(w / g.domega());
          if (j < -g.n / 2 || j >= g.n / 2)
            throw std::invalid_argument("frequency outside kernel grid");
          return table->v[static_cast<size_t>(g.bin_of(static_cast<int>(j)))];
        }};
  }
  if (const auto* m = std::get_if<FreqMultiplier>(&op))
    return SpectralAction{ActionKind::Multiplier, m->h};
  return std::nullopt;  // piecewise glue has no frequency action
}

SpectralAction invert_action(const SpectralAction& a) {
  auto f = a.factor;
  if (a.kind == ActionKind::Multiplier)
    return SpectralAction{ActionKind::Multiplier, [f](double w) {
                            cplx v = f(w);
                            if (std::abs(v) < kInvertibilityFloor)
                              throw NonInvertible(
                                  "frequency factor below invertibility floor");
                            return cplx(1.0, 0.0) / v;
                          }};
  return SpectralAction{ActionKind::Reflection, [f](double w) {
                          cplx v = f(-w);
                          if (std::abs(v) < kInvertibilityFloor)
                            throw NonInvertible(
                                "frequency factor below invertibility floor");
                          return cplx(1.0, 0.0) / v;
                        }};
}

Spectrum apply_action(const SpectralAction& a, const Spectrum& X) {
  Spectrum out{X.grid, std::vector<cplx>(X.v.size())};
  if (a.kind == ActionKind::Multiplier) {
    for (int j = 0; j < X.grid.n; ++j)
      out.v[j] = a.factor(X.grid.omega(j)) * X.v[j];
  } else {
    for (int j = 0; j < X.grid.n; ++j)
      out.v[j] = a.factor(X.grid.omega(j)) * X.v[reflected_bin(X.grid, j)];
  }
  return out;
}

}  // namespace branched
