#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "branched/interval_set.hpp"
#include "branched/signal.hpp"

namespace branched {

// Glue operators between branches. All act linearly on signals over the
// periodized window; shifts/reversals must land on grid points.

struct Identity {
  bool operator==(const Identity&) const = default;
};

// (h x)(t) = x(tau - t)
struct TimeReversal {
  double tau = 0.0;
  bool operator==(const TimeReversal&) const = default;
};

// (h x)(t) = a * x(b*t + c), with b restricted to {+1, -1}
struct Affine {
  double a = 1.0;
  double b = 1.0;
  double c = 0.0;
  bool operator==(const Affine&) const = default;
};

// y = idft(dft(kernel) . dft(x)) on the kernel's own grid; the kernel is
// expected to decay inside the window (lag indexing is circular).
struct Convolution {
  SampledSignal kernel;
};

// Pointwise spectral factor X(i*omega) -> h(omega) * X(i*omega). The label
// identifies the factor for grouping and reports; callables themselves are
// not comparable.
struct FreqMultiplier {
  std::function<cplx(double)> h;
  std::string label;
};

using BasicOperator =
    std::variant<Identity, TimeReversal, Affine, Convolution, FreqMultiplier>;

// Different sub-operator on each region; samples outside every region map
// to zero. Exists to express glue laws that change form across the axis.
struct Piecewise {
  std::vector<std::pair<IntervalSet, BasicOperator>> pieces;
};

using OperatorSpec =
    std::variant<Identity, TimeReversal, Affine, Convolution, FreqMultiplier,
                 Piecewise>;

bool is_identity(const OperatorSpec& op);
bool op_equal(const OperatorSpec& a, const OperatorSpec& b);
std::string op_label(const OperatorSpec& op);

SampledSignal apply_operator(const OperatorSpec& op, const SampledSignal& x);

// Action of an operator on spectra, when it has one:
//   Multiplier:  (U X)(w) = factor(w) * X(w)
//   Reflection:  (U X)(w) = factor(w) * X(-w)
// Piecewise glue has no such action and yields nullopt.
enum class ActionKind { Multiplier, Reflection };

struct SpectralAction {
  ActionKind kind = ActionKind::Multiplier;
  std::function<cplx(double)> factor = [](double) { return cplx(1.0, 0.0); };
};

std::optional<SpectralAction> spectral_action(const OperatorSpec& op,
                                              const GridSpec& grid);

SpectralAction invert_action(const SpectralAction& a);

Spectrum apply_action(const SpectralAction& a, const Spectrum& X);

// Natural bin holding -omega_j (the n/2 alias maps to itself).
int reflected_bin(const GridSpec& g, int j);

}  // namespace branched
