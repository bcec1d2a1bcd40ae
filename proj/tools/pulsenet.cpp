// pulsenet: simulate pulse-coupled networks and check their coalition
// properties.
//
//   pulsenet simulate|verify|sweep --config FILE (--max-time T | --max-events K)
//            [--trials N] [--seed S] [--sample DT] [--out DIR]

#include <iostream>

#include "CLI11.hpp"

#include "pulsenet/cli.hpp"

int main(int argc, char **argv) {
  using pulsenet::Command;

  CLI::App app{"Event-driven simulator for pulse-coupled networks"};
  app.require_subcommand(1);

  pulsenet::RunSpec spec;
  std::string config, out = ".", events;

  auto add_common = [&](CLI::App *sub) {
    sub->add_option("--config", config, "Network config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    auto *t = sub->add_option("--max-time", spec.max_time, "Time horizon");
    auto *k = sub->add_option("--max-events", spec.max_events, "Event horizon");
    t->excludes(k);
    sub->add_option("--trials", spec.trials, "Number of trials")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", spec.seed, "Base seed");
    sub->add_option("--out", out, "Output directory");
  };

  auto *simulate = app.add_subcommand("simulate", "Write event traces");
  add_common(simulate);
  simulate->add_option("--sample", spec.sample,
                       "Also write satisfactions every DT time units");

  auto *verify = app.add_subcommand("verify", "Check the coalition theorems");
  add_common(verify);
  verify->add_option("--min-recurrences", spec.min_recurrences,
                     "Grand coalitions required to confirm recurrence");
  verify->add_option("--events", events,
                     "Verify an existing events.csv instead of simulating")
      ->check(CLI::ExistingFile);

  auto *sweep = app.add_subcommand("sweep", "Grid over the config's sweep axes");
  add_common(sweep);
  sweep->add_option("--min-recurrences", spec.min_recurrences,
                    "Grand coalitions required to confirm recurrence");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return pulsenet::kExitUsage;
  }

  spec.config_path = config;
  spec.out_dir = out;
  if (!events.empty())
    spec.events_path = events;
  if (*simulate)
    spec.command = Command::Simulate;
  else if (*verify)
    spec.command = Command::Verify;
  else
    spec.command = Command::Sweep;
  return pulsenet::dispatch(spec, std::cout, std::cerr);
}
