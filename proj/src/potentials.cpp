#include "fksteer/potentials.hpp"

#include <algorithm>
#include <stdexcept>

#include "fksteer/error.hpp"

namespace fks {

std::string to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::immediate:
      return "immediate";
    case PotentialKind::difference:
      return "difference";
    case PotentialKind::max:
      return "max";
    case PotentialKind::sum:
      return "sum";
  }
  return "unknown";
}

PotentialKind parse_potential_kind(const std::string& text) {
  if (text == "immediate") return PotentialKind::immediate;
  if (text == "difference") return PotentialKind::difference;
  if (text == "max") return PotentialKind::max;
  if (text == "sum") return PotentialKind::sum;
  throw ConfigError("unknown potential '" + text + "' (expected immediate|difference|max|sum)");
}

PotentialSpec make_potential_spec(PotentialKind kind, double tau,
                                  std::optional<bool> terminal_correction) {
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
  return {kind, tau, terminal_correction.value_or(kind == PotentialKind::difference)};
}

void RewardHistory::record(int t, double scaled_reward) {
  if (!steps_.empty() && t >= steps_.back()) {
    throw std::invalid_argument("reward history steps must strictly decrease");
  }
  running_max_ = rewards_.empty() ? scaled_reward : std::max(running_max_, scaled_reward);
  running_sum_ += scaled_reward;
  steps_.push_back(t);
  rewards_.push_back(scaled_reward);
}

double RewardHistory::latest() const {
  if (rewards_.empty()) throw std::invalid_argument("empty reward history");
  return rewards_.back();
}

double RewardHistory::previous() const {
  return rewards_.size() >= 2 ? rewards_[rewards_.size() - 2] : 0.0;
}

double scale_reward(double raw_reward, const PotentialSpec& spec) { return raw_reward / spec.tau; }

double log_potential(const RewardHistory& history, const PotentialSpec& spec, int t) {
  if (history.empty()) throw std::invalid_argument("log_potential on an empty reward history");
  if (history.steps().back() != t) {
    throw std::invalid_argument("reward history has no entry for step " + std::to_string(t));
  }
  switch (spec.kind) {
    case PotentialKind::immediate:
      return history.latest();
    case PotentialKind::difference:
      return history.latest() - history.previous();
    case PotentialKind::max:
      return history.running_max();
    case PotentialKind::sum:
      return history.running_sum();
  }
  return 0.0;
}

double terminal_log_correction(const RewardHistory& history, const PotentialSpec&) {
  return history.latest() - history.applied();
}

}  // namespace fks
