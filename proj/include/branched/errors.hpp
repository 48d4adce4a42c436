#pragma once

#include <stdexcept>
#include <string>

namespace branched {

// Scenario/config text could not be parsed or is structurally invalid.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Operator parameters do not map the grid onto itself (e.g. a shift that is
// not a multiple of dt, or |b| != 1).
struct IncommensurateMap : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A frequency factor fell below the invertibility floor where its inverse
// was required. No pseudo-inverse fallback exists by design.
struct NonInvertible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Requested gap intervals (including reflected copies) overlap.
struct DisjointnessViolated : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Topology/conditions reject the requested operation.
struct ConditionViolated : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// No admissible recovery chain to a target branch.
struct ChainUnavailable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An iterative solver hit its cap before meeting the update tolerance.
struct NotConverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Hard numeric failure (a diagnostic bound was violated at run time).
struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Factors whose modulus drops below this are treated as non-invertible.
inline constexpr double kInvertibilityFloor = 1e-9;

}  // namespace branched
