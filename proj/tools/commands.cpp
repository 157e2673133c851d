#include "commands.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>

#include "fksteer/config.hpp"
#include "fksteer/csv.hpp"
#include "fksteer/engine.hpp"
#include "fksteer/error.hpp"
#include "fksteer/oracle.hpp"
#include "fksteer/reporting.hpp"
#include "fksteer/sweep.hpp"
#include "fksteer/worker.hpp"
#include "json.hpp"

namespace fks::cli {
namespace {

RunConfig build_config(const CommonArgs& args, RunConfig base) {
  RunConfig config = args.config.empty() ? std::move(base) : load_config(args.config, std::move(base));
  for (const auto& s : args.sets) apply_override(config, s);
  if (!args.out.empty()) config.out = args.out;
  if (args.seed) config.seed = *args.seed;
  validate(config);
  return config;
}

void print_run(const std::string& label, const RunResult& r) {
  std::cout << label << ": mean terminal reward=" << csv::format_double(r.mean_terminal_reward());
  const double div = terminal_diversity(r.terminal);
  if (!std::isnan(div)) std::cout << " diversity=" << csv::format_double(div);
  std::cout << " events=" << r.log.events.size() << " seconds=" << csv::format_double(r.seconds) << '\n';
}

// The oracle's default scenario: a small random chain, difference potential,
// resampling at every step and the exact terminal correction.
RunConfig oracle_defaults() {
  RunConfig c;
  c.backend = BackendKind::discrete;
  c.states = 5;
  c.steps = 8;
  c.t_start = 8;
  c.dt = 1;
  c.tau = 1.0;
  c.potential = PotentialKind::difference;
  c.terminal_correction = true;
  c.reward = RewardKind::state_table;
  c.n_particles = 100000;
  c.record_trajectory = false;
  return c;
}

}  // namespace

int report_error(const std::string& kind, const std::string& message, int code, const std::string& extra_json) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  j["exit_code"] = code;
  if (!extra_json.empty()) j["detail"] = nlohmann::json::parse(extra_json);
  std::cerr << j.dump() << '\n';
  return code;
}

int cmd_run(const RunArgs& args) {
  RunConfig config = build_config(args.common, {});
  if (config.out.empty()) config.out = "out";
  const std::filesystem::path dir = config.out;
  const auto engine = Engine::from_config(config);
  const auto steered = engine.run_steered();
  print_run("steered", steered);
  if (config.record_trajectory) write_report(dir, steered.log, steered.terminal);
  if (args.baseline) {
    RunConfig plain = config;
    plain.out = (dir / "baseline").string();
    const auto unguided = Engine::from_config(plain).run_unguided();
    print_run("unguided", unguided);
    if (plain.record_trajectory) write_report(plain.out, unguided.log, unguided.terminal);
  }
  std::cout << "artifacts: " << dir.string() << '\n';
  return kExitOk;
}

int cmd_sweep(const SweepArgs& args) {
  RunConfig base = build_config(args.common, sweep_defaults());
  if (base.out.empty()) base.out = "sweep_" + args.axis;
  SweepOptions options;
  options.seeds = args.seeds;
  options.baseline = args.baseline;
  options.continue_on_error = !args.stop_on_error;
  const auto report = run_sweep(base, args.axis, args.values, options);
  write_sweep_csv(base.out, report);
  for (const auto& s : report.summary()) {
    std::cout << args.axis << '=' << s.value << " runs=" << s.runs << " failed=" << s.failed
              << " mean_reward=" << csv::format_double(s.mean_reward)
              << " sd=" << csv::format_double(s.sd_reward)
              << " diversity=" << csv::format_double(s.mean_diversity);
    if (s.baseline_reward) std::cout << " unguided=" << csv::format_double(*s.baseline_reward);
    std::cout << '\n';
  }
  for (const auto& c : report.cells) {
    if (!c.ok) std::cerr << "failed: " << c.error << '\n';
  }
  std::cout << "summary: " << (std::filesystem::path(base.out) / "summary.csv").string() << '\n';
  return report.all_ok() ? kExitOk : kExitRuntime;
}

int cmd_oracle(const OracleArgs& args) {
  RunConfig config = build_config(args.common, oracle_defaults());
  const std::string out = config.out;
  config.out.clear();
  const auto engine = Engine::from_config(config);
  const auto spec = config.potential_spec();
  if (!spec.terminal_correction && spec.kind != PotentialKind::difference) {
    std::cerr << "note: only the difference potential with terminal correction targets the exact tilt\n";
  }
  const auto result = engine.run_steered();

  bool pass = false;
  if (config.backend == BackendKind::discrete) {
    if (config.reward != RewardKind::state_table) {
      throw ConfigError("oracle on the discrete backend needs reward=state_table");
    }
    const auto& backend = dynamic_cast<const DiscreteChainBackend&>(engine.backend());
    const auto& rewards = engine.pipeline().spec().state_rewards;
    const auto exact = exact_tilted_discrete(backend, rewards, spec.lambda());
    std::vector<std::size_t> symbols;
    symbols.reserve(result.terminal.size());
    for (const auto& rec : result.terminal) symbols.push_back(rec.state.symbol());
    const auto empirical = empirical_distribution(symbols, backend.states());
    const double tv = total_variation(exact.probabilities, empirical);
    pass = tv < args.tolerance;
    std::cout << "TV=" << csv::format_double(tv) << ' ' << (pass ? "PASS" : "FAIL") << '\n';
    if (!out.empty()) {
      std::filesystem::create_directories(out);
      write_marginal_csv(std::filesystem::path(out) / "oracle.csv", exact, empirical);
    }
  } else if (config.backend == BackendKind::gaussian) {
    if (config.reward != RewardKind::linear) {
      throw ConfigError("oracle on the gaussian backend needs reward=linear");
    }
    const auto exact = exact_tilted_gaussian(0.0, 1.0, config.slope, spec.lambda());
    double mean = 0.0, sq = 0.0;
    const double n = static_cast<double>(result.terminal.size());
    for (const auto& rec : result.terminal) mean += rec.state.values().front();
    mean /= n;
    for (const auto& rec : result.terminal) {
      const double d = rec.state.values().front() - mean;
      sq += d * d;
    }
    const double var = sq / (n - 1.0);
    const double err = std::max(std::abs(mean - exact.mean), std::abs(var - exact.variance) / 2.0);
    pass = err < args.tolerance;
    std::cout << "mean=" << csv::format_double(mean) << " (exact " << csv::format_double(exact.mean)
              << ") variance=" << csv::format_double(var) << " (exact " << csv::format_double(exact.variance)
              << ") " << (pass ? "PASS" : "FAIL") << '\n';
    if (!out.empty()) {
      std::filesystem::create_directories(out);
      write_marginal_csv(std::filesystem::path(out) / "oracle.csv", exact);
    }
  } else {
    throw ConfigError("oracle needs the discrete or gaussian backend");
  }
  if (!pass) {
    return report_error("tolerance", "oracle comparison above tolerance " + csv::format_double(args.tolerance),
                        kExitTolerance);
  }
  return kExitOk;
}

int cmd_report(const ReportArgs& args) {
  const std::filesystem::path dir = args.run_dir;
  const auto log = read_trajectory_csv(dir / "trajectory.csv");
  const auto terminal = read_terminal_csv(dir / "terminal.csv");
  const std::filesystem::path out = args.out.empty() ? dir : std::filesystem::path(args.out);
  write_report(out, log, terminal);
  std::cout << "wrote diversity.csv, rewards_long.csv, ss_fractions.csv to " << out.string() << '\n';
  return kExitOk;
}

int cmd_worker_echo(const EchoArgs& args) {
  EchoWorkerOptions options;
  if (args.reward == "zero") {
    options.mode = EchoWorkerOptions::Mode::zero;
  } else if (args.reward == "charge") {
    options.mode = EchoWorkerOptions::Mode::charge;
  } else {
    throw ConfigError("worker-echo --reward must be zero or charge");
  }
  options.q_star = args.q_star;
  options.die_after = args.die_after;
  return serve_echo_worker(std::cin, std::cout, options);
}

}  // namespace fks::cli
