#pragma once

// Post-processing of run logs into plot-ready tables.

#include <filesystem>
#include <string>
#include <vector>

#include "fksteer/engine.hpp"

namespace fks {

// 1 - mean positional identity over all unordered pairs. Throws
// std::invalid_argument for fewer than two strings or ragged lengths.
double sequence_diversity(const std::vector<std::string>& tokens);

struct StepStats {
  int t = 0;
  std::size_t count = 0;
  double mean = 0.0;
  double sd = 0.0;  // population sd, 0 for a single particle
};

struct RewardTrajectoryTable {
  std::vector<TrajectoryRow> rows;
  std::vector<StepStats> per_step;  // descending t
};

RewardTrajectoryTable reward_trajectory_table(const TrajectoryLog& log);

// Mean over particles of the per-particle reward-estimator sd, per step.
std::vector<StepStats> reward_spread_by_step(const TrajectoryLog& log);

struct DiversityPoint {
  int t = 0;
  double diversity = 0.0;
};

// Steps whose rows carry at least two token strings.
std::vector<DiversityPoint> diversity_curve(const TrajectoryLog& log);
// Diversity of the terminal tokens; NaN when there are fewer than two.
double terminal_diversity(const std::vector<TerminalRecord>& terminal);

// One (alpha, beta, ell) row per terminal design that has a refined chain.
std::vector<SsFractions> ss_composition_table(const std::vector<TerminalRecord>& terminal);

void write_diversity_csv(const std::filesystem::path& path, const std::vector<DiversityPoint>& curve);
void write_rewards_long_csv(const std::filesystem::path& path, const RewardTrajectoryTable& table);
void write_ss_fractions_csv(const std::filesystem::path& path, const std::vector<SsFractions>& rows);

// Readers for the artifacts written by the engine, used by `report`.
TrajectoryLog read_trajectory_csv(const std::filesystem::path& path);
std::vector<TerminalRecord> read_terminal_csv(const std::filesystem::path& path);

// Writes diversity.csv, rewards_long.csv and ss_fractions.csv into `out`.
void write_report(const std::filesystem::path& out, const TrajectoryLog& log,
                  const std::vector<TerminalRecord>& terminal);

}  // namespace fks
