#pragma once

// Run configuration: a flat key = value schema (L_binder, tau, n_particles,
// t_start, dt, potential, ...). Config files and `--set key=value` overrides
// go through the same parser, so both routes produce identical runs.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fksteer/backend.hpp"
#include "fksteer/potentials.hpp"
#include "fksteer/resampling.hpp"
#include "fksteer/rewards.hpp"

namespace fks {

struct RunConfig {
  // Backend
  BackendKind backend = BackendKind::chainmol;
  int steps = 50;
  std::size_t states = 5;
  std::string kernel_file;
  std::vector<double> pi_T;
  std::uint64_t backend_seed = 7;
  double dirichlet = 1.0;
  double rho = 0.9;
  std::size_t dim = 1;
  ChainMolParams chain;

  // Steering
  std::size_t n_particles = 20;
  double tau = 10.0;
  int t_start = 50;
  int dt = 2;
  PotentialKind potential = PotentialKind::immediate;
  std::optional<bool> terminal_correction;
  ResampleMethod resample_method = ResampleMethod::multinomial;

  // Reward pipeline
  RewardKind reward = RewardKind::binding;
  std::size_t n_evals = 1;
  Aggregation aggregation = Aggregation::mean;
  double refiner_temperature = 0.2;
  int q_star = 0;
  SecondaryStructureTargets ss_targets;
  std::string target_file;
  std::vector<double> reward_values;
  double slope = 1.0;
  std::string worker_command;
  int worker_timeout_ms = 10000;

  // Execution and output
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  bool log_every_step = false;
  bool record_trajectory = true;
  bool snapshot_states = false;
  std::string out;
  std::string run_id = "run";

  PotentialSpec potential_spec() const {
    return make_potential_spec(potential, tau, terminal_correction);
  }
  ResampleSchedule schedule() const { return {t_start, dt}; }
};

// Keys accepted by apply_setting, in manifest order.
const std::vector<std::string>& config_keys();

// Throws ConfigError for unknown keys or unparseable values.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);
// Parses "key=value".
void apply_override(RunConfig& config, const std::string& assignment);

// Reads `key = value` lines; '#' starts a comment. Relative file paths in the
// config are resolved against the config file's directory.
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

// Canonical key/value echo of every setting (the manifest body).
std::vector<std::pair<std::string, std::string>> describe(const RunConfig& config);

// Cross-field checks. Throws ConfigError.
void validate(const RunConfig& config);

std::unique_ptr<Backend> make_backend(const RunConfig& config);
RewardPipelineSpec make_reward_spec(const RunConfig& config);

// Sweep defaults: L_binder 15, tau 10, 20 particles, onset 50, interval 2,
// immediate potential, chain backend with the binding reward.
RunConfig sweep_defaults();

}  // namespace fks
