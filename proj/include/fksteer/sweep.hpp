#pragma once

// One-parameter sweeps: every value of one axis is run with several seeds
// while everything else stays at the base configuration.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fksteer/config.hpp"

namespace fks {

// n_particles, tau, t_start, dt, potential, n_evals
const std::vector<std::string>& sweep_axes();

struct SweepOptions {
  std::size_t seeds = 3;  // base.seed, base.seed + 1, ...
  bool baseline = false;  // also run the unguided chain per cell
  bool continue_on_error = true;
};

struct SweepCell {
  std::string value;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double mean_reward = 0.0;
  double diversity = 0.0;  // NaN without tokens
  std::optional<double> baseline_reward;
  std::optional<double> baseline_diversity;
  double seconds = 0.0;
};

struct SweepSummary {
  std::string value;
  std::size_t runs = 0;
  std::size_t failed = 0;
  double mean_reward = 0.0;
  double sd_reward = 0.0;
  double mean_diversity = 0.0;
  std::optional<double> baseline_reward;
};

struct SweepReport {
  std::string axis;
  std::vector<SweepCell> cells;  // value-major, then seed

  std::vector<SweepSummary> summary() const;
  bool all_ok() const;
};

// Validates the axis and every value up front (ConfigError listing the allowed
// axes). Cell outputs go to <base.out>/<axis>=<value>/seed<k> when base.out is
// set. Run failures are recorded per cell, or rethrown as RunError annotated
// with the sweep point when continue_on_error is off.
SweepReport run_sweep(const RunConfig& base, const std::string& axis,
                      const std::vector<std::string>& values, const SweepOptions& options = {});

// cells.csv and summary.csv.
void write_sweep_csv(const std::filesystem::path& dir, const SweepReport& report);

}  // namespace fks
