#include <string>

#include <CLI11.hpp>

#include "branched/scenario.hpp"

// Exit codes: 0 success, 2 validation failure (including usage errors),
// 3 numerical failure, 4 I/O or parse failure.
int main(int argc, char** argv) {
  CLI::App app{"branched-process toolkit: gap construction and recovery"};
  app.require_subcommand(1);

  branched::RunOptions opt;
  app.fallthrough();
  app.add_option("--out", opt.out_dir, "output directory (overrides the scenario)");
  app.add_option("--seed", opt.seed, "base seed for generators without one");
  app.add_flag("--quiet", opt.quiet, "suppress the stdout summary");

  std::string target;
  const char* target_help = "bundled fixture name or scenario JSON path";
  CLI::App* validate =
      app.add_subcommand("validate", "check constructibility conditions");
  validate->add_option("scenario", target, target_help)->required();
  CLI::App* construct =
      app.add_subcommand("construct", "build the gapped family and reports");
  construct->add_option("scenario", target, target_help)->required();
  CLI::App* recover =
      app.add_subcommand("recover", "propagate branch 1 through the glue chains");
  recover->add_option("scenario", target, target_help)->required();
  CLI::App* sample_recover = app.add_subcommand(
      "sample-recover", "recover every branch from one-sided samples of branch 1");
  sample_recover->add_option("scenario", target, target_help)->required();

  CLI::App* oracle =
      app.add_subcommand("oracle", "certify uniqueness of a discrete instance");
  int n = 0;
  std::string observed_spec, gap_spec;
  oracle->add_option("n", n, "vector length, at most 64")->required();
  oracle->add_option("observed", observed_spec, "time indices, e.g. 4-31 or none")
      ->required();
  oracle->add_option("gap", gap_spec, "spectrum bins, e.g. 0-15,20")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  for (CLI::App* cmd : {validate, construct, recover, sample_recover})
    if (cmd->parsed())
      return branched::run_scenario_command(cmd->get_name(), target, opt);
  return branched::run_oracle_command(n, observed_spec, gap_spec, opt);
}
