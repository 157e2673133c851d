#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "fksteer/error.hpp"
#include "fksteer/worker.hpp"
#include "json.hpp"

namespace {

void add_common(CLI::App* app, fks::cli::CommonArgs& args, bool config_required) {
  auto* opt = app->add_option("--config", args.config, "key = value config file");
  if (config_required) opt->required()->check(CLI::ExistingFile);
  else opt->check(CLI::ExistingFile);
  app->add_option("--set", args.sets, "override a config key (key=value, repeatable)");
  app->add_option("--out", args.out, "output directory");
  app->add_option("--seed", args.seed, "master seed");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace fks::cli;
  CLI::App app{"Feynman-Kac steering of toy reverse-diffusion chains"};
  app.require_subcommand(1);
  app.set_version_flag("--version", FKSTEER_VERSION);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "steered run, optionally with an unguided baseline");
  add_common(run_cmd, run.common, true);
  run_cmd->add_flag("--baseline", run.baseline, "also run the unguided chain into <out>/baseline");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "vary one parameter over several seeds");
  add_common(sweep_cmd, sweep.common, false);
  sweep_cmd->add_option("--axis", sweep.axis, "n_particles, tau, t_start, dt, potential or n_evals")->required();
  sweep_cmd->add_option("--values", sweep.values, "comma-separated values")->required()->delimiter(',');
  sweep_cmd->add_option("--seeds", sweep.seeds, "repetitions per value")->check(CLI::PositiveNumber);
  sweep_cmd->add_flag("--baseline", sweep.baseline, "also run the unguided chain per cell");
  sweep_cmd->add_flag("--stop-on-error", sweep.stop_on_error, "abort at the first failed cell");

  OracleArgs oracle;
  auto* oracle_cmd = app.add_subcommand("oracle", "compare a steered run against the exact tilted law");
  add_common(oracle_cmd, oracle.common, false);
  oracle_cmd->add_option("--tolerance", oracle.tolerance, "pass threshold");

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "summary tables from a run directory");
  report_cmd->add_option("run_dir", report.run_dir, "directory holding trajectory.csv and terminal.csv")
      ->required()
      ->check(CLI::ExistingDirectory);
  report_cmd->add_option("--out", report.out, "destination (defaults to the run directory)");

  EchoArgs echo;
  auto* echo_cmd = app.add_subcommand("worker-echo", "reference reward worker on stdin/stdout");
  echo_cmd->add_option("--reward", echo.reward, "zero or charge");
  echo_cmd->add_option("--q-star", echo.q_star, "target net charge for --reward charge");
  echo_cmd->add_option("--die-after", echo.die_after, "exit after this many requests");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return report_error("usage", e.what(), kExitValidation);
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*sweep_cmd) return cmd_sweep(sweep);
    if (*oracle_cmd) return cmd_oracle(oracle);
    if (*report_cmd) return cmd_report(report);
    if (*echo_cmd) return cmd_worker_echo(echo);
  } catch (const fks::ConfigError& e) {
    return report_error("validation", e.what(), kExitValidation);
  } catch (const fks::WorkerError& e) {
    nlohmann::json detail{{"failure", fks::to_string(e.failure())},
                          {"particle_id", e.particle_id()},
                          {"t", e.step()}};
    return report_error("worker", e.what(), kExitRuntime, detail.dump());
  } catch (const std::exception& e) {
    return report_error("runtime", e.what(), kExitRuntime);
  }
  return kExitValidation;
}
