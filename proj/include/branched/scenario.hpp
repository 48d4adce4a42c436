#pragma once

#include <optional>
#include <string>
#include <vector>

#include "branched/gap_construction.hpp"
#include "branched/recovery.hpp"
#include "branched/signal.hpp"
#include "branched/topology.hpp"

namespace branched {

// Options coming from the command line; they override scenario defaults.
struct RunOptions {
  std::string out_dir;  // empty keeps the scenario's own outputs directory
  unsigned seed = 0;    // base seed for generators without an explicit one
  bool quiet = false;   // suppress the stdout summary; errors still print
};

// One fully materialized run: every signal is already on the grid, every
// seeded generator has been drawn. A scenario comes either from a JSON file
// or from a bundled fixture name.
struct Scenario {
  std::string name;
  GridSpec grid;
  TopologySpec topology;
  GapPlan plan;
  std::vector<SampledSignal> inputs;  // inputs[d-1] is branch d
  std::vector<std::string> input_notes;  // source of each input, seeds included
  std::vector<double> deltas;         // non-empty runs a convergence study
  std::optional<SamplingSpec> sampling;
  std::optional<ObservationSpec> observation;
  PocsOptions pocs;
  bool widen_gaps_with_g1 = false;  // recovery gaps on d >= 2 gain fixed_g1
  std::string outputs = "runs/scenario";
  unsigned base_seed = 0;
};

// Resolves a bundled fixture name first, then a JSON file path.
// Throws ParseError for unreadable or malformed files and for a target that
// is neither; std::invalid_argument for semantic problems.
Scenario load_scenario(const std::string& target, const RunOptions& opt);

// CSV with header "t,re,im", one row per grid point, %.17g throughout.
void write_signal_csv(const std::string& path, const SampledSignal& x);
// CSV with header "omega,re,im", rows in ascending-frequency order.
void write_spectrum_csv(const std::string& path, const Spectrum& X);
// Inverse of write_signal_csv; the time column must match the grid.
SampledSignal read_signal_csv(const std::string& path, const GridSpec& g);

// Command bodies. They write artifacts under the resolved output directory
// and print a short summary unless opt.quiet. Exceptions escape; use
// run_scenario_command for the exit-code contract.
int cmd_validate(const Scenario& sc, const RunOptions& opt);
int cmd_construct(const Scenario& sc, const RunOptions& opt);
int cmd_recover(const Scenario& sc, const RunOptions& opt);
int cmd_sample_recover(const Scenario& sc, const RunOptions& opt);

// Index lists like "0-15", "4,7,20-23", or "none".
std::vector<int> parse_index_spec(const std::string& text, int n);

// Exit codes: 0 success, 2 validation failure, 3 numerical failure,
// 4 I/O or parse failure. command is one of validate, construct, recover,
// sample-recover.
int run_scenario_command(const std::string& command, const std::string& target,
                         const RunOptions& opt);
int run_oracle_command(int n, const std::string& observed_spec,
                       const std::string& gap_spec, const RunOptions& opt);

}  // namespace branched
