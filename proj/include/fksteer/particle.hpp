#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "fksteer/backend.hpp"
#include "fksteer/potentials.hpp"
#include "fksteer/rewards.hpp"

namespace fks {

struct Particle {
  BackendState state;
  // Slot index at the previous resampling event (initial index before the first).
  std::size_t parent = 0;
  // Initial particle this lineage descends from.
  std::size_t root = 0;
  RewardHistory history;
  // Log-potential accumulated since the last resampling event.
  double log_weight = 0.0;
  // Most recent reward evaluation on this lineage.
  std::optional<RewardEvaluation> last_eval;
};

using Ensemble = std::vector<Particle>;

}  // namespace fks
