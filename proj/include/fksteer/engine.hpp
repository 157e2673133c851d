#pragma once

// The steering loop. For t = T .. 1: on scheduled steps evaluate rewards on
// the denoised proxies, turn them into potentials, normalize and resample;
// then propagate every particle one reverse step. At t = 0 one last reward
// evaluation (on the true terminal state) and one final resample leave an
// unweighted terminal ensemble.

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fksteer/backend.hpp"
#include "fksteer/config.hpp"
#include "fksteer/particle.hpp"
#include "fksteer/resampling.hpp"
#include "fksteer/rewards.hpp"

namespace fks {

struct TrajectoryRow {
  int t = 0;
  std::size_t particle = 0;
  double reward = 0.0;         // raw pipeline reward
  double scaled_reward = 0.0;  // reward / tau
  double log_potential = 0.0;  // 0 on logging-only rows
  double weight = 0.0;         // normalized weight before resampling
  std::size_t ancestor = 0;    // slot at the previous event
  std::size_t lineage = 0;     // initial particle of the lineage
  double reward_spread = 0.0;  // sd over repeated evaluations
  bool guided = false;         // potential applied at this row
  std::string tokens;
  std::vector<double> snapshot;

  bool operator==(const TrajectoryRow&) const = default;
};

struct ResampleEvent {
  int t = 0;
  double ess = 0.0;
  double entropy = 0.0;
  double max_weight_deviation = 0.0;  // max |w_i - 1/N|
  std::vector<std::size_t> multiplicity;

  bool operator==(const ResampleEvent&) const = default;
};

struct TrajectoryLog {
  std::vector<TrajectoryRow> rows;
  std::vector<ResampleEvent> events;

  bool operator==(const TrajectoryLog&) const = default;
};

struct TerminalRecord {
  std::size_t particle = 0;
  std::size_t lineage = 0;
  BackendState state;
  double reward = 0.0;
  double weight = 0.0;
  std::string tokens;
  std::optional<SsFractions> ss;  // geometric classes of the refined chain
};

struct RunResult {
  Ensemble ensemble;
  std::vector<TerminalRecord> terminal;
  TrajectoryLog log;
  double seconds = 0.0;

  double mean_terminal_reward() const;
};

class Engine {
 public:
  Engine(RunConfig config, std::shared_ptr<const Backend> backend,
         std::shared_ptr<const RewardPipeline> pipeline);

  // Builds backend, reward pipeline and (for external rewards) the worker.
  static Engine from_config(const RunConfig& config);

  const RunConfig& config() const { return config_; }
  const Backend& backend() const { return *backend_; }
  const RewardPipeline& pipeline() const { return *pipeline_; }

  RunResult run_steered() const;
  // Same loop without potentials or resampling. Rewards are still evaluated on
  // the steered schedule (and at t = 0) for logging.
  RunResult run_unguided() const;

 private:
  RunResult run(bool guided) const;

  RunConfig config_;
  std::shared_ptr<const Backend> backend_;
  std::shared_ptr<const RewardPipeline> pipeline_;
};

RunResult run_steered(const RunConfig& config);
RunResult run_unguided(const RunConfig& config);

// JSON manifest: version, mode, seed, kernel variant and the canonical config echo.
void write_manifest(const std::filesystem::path& path, const RunConfig& config,
                    const std::string& mode, const RunResult* result);

}  // namespace fks
