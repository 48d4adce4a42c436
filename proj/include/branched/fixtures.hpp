#pragma once

#include <string>
#include <vector>

#include "branched/gap_construction.hpp"
#include "branched/recovery.hpp"
#include "branched/signal.hpp"
#include "branched/topology.hpp"

namespace branched {

// Bundled, fully deterministic configurations: a glue topology, input
// signals consistent with it (exactly, up to rounding), and a gap plan.
// They double as CLI scenarios and as test material.
struct Fixture {
  std::string name;
  std::string summary;
  GridSpec grid;
  TopologySpec topology;
  GapPlan plan;
  std::vector<SampledSignal> inputs;  // inputs[d-1] is branch d
  // Recovery defaults for fixtures meant to run end to end.
  std::optional<SamplingSpec> sampling;
  PocsOptions pocs;
  bool widen_gaps_with_g1 = false;  // recovery gaps gain fixed_g1 on d >= 2
};

std::vector<std::string> fixture_names();

// Throws std::invalid_argument for a name not in fixture_names().
Fixture make_fixture(const std::string& name);

}  // namespace branched
