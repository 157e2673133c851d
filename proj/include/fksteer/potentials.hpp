#pragma once

// Steering potentials G_t. Everything here works in log space: a potential
// kind maps a lineage's scaled reward history to log G_t.
//
//   immediate   log G_t = r_t
//   difference  log G_t = r_t - r_prev      (r_prev = 0 at the first guided step)
//   max         log G_t = max_{s >= t} r_s  (over the guided lineage)
//   sum         log G_t = sum_{s >= t} r_s
//
// with r_t = lambda * r(x0_hat(x_t)) and lambda = 1 / tau. The terminal
// boundary potential is log G_0 = r_0 - sum_{t >= 1} log G_t along the lineage.

#include <optional>
#include <string>
#include <vector>

namespace fks {

enum class PotentialKind { immediate, difference, max, sum };

std::string to_string(PotentialKind kind);
PotentialKind parse_potential_kind(const std::string& text);

struct PotentialSpec {
  PotentialKind kind = PotentialKind::immediate;
  double tau = 10.0;
  bool terminal_correction = false;

  double lambda() const { return 1.0 / tau; }
};

// Default terminal correction is on for the difference kind only.
PotentialSpec make_potential_spec(PotentialKind kind, double tau,
                                  std::optional<bool> terminal_correction = std::nullopt);

// Per-lineage bookkeeping. Copied wholesale when a particle is resampled.
class RewardHistory {
 public:
  // Append the scaled reward observed at guided step t. Steps must strictly decrease.
  void record(int t, double scaled_reward);
  // Add a log-potential that was applied to this lineage.
  void apply(double log_potential) { applied_ += log_potential; }

  bool empty() const { return rewards_.empty(); }
  std::size_t size() const { return rewards_.size(); }
  const std::vector<int>& steps() const { return steps_; }
  const std::vector<double>& rewards() const { return rewards_; }

  double latest() const;
  // Scaled reward at the guided step before the latest one; 0 at onset.
  double previous() const;
  double running_max() const { return running_max_; }
  double running_sum() const { return running_sum_; }
  double applied() const { return applied_; }

 private:
  std::vector<int> steps_;
  std::vector<double> rewards_;
  double running_max_ = 0.0;
  double running_sum_ = 0.0;
  double applied_ = 0.0;
};

double scale_reward(double raw_reward, const PotentialSpec& spec);

// log G_t for the lineage whose latest record is at step t.
// Throws std::invalid_argument on an empty history or a step mismatch.
double log_potential(const RewardHistory& history, const PotentialSpec& spec, int t);

// log of the boundary potential at t = 0: r_0 minus everything applied so far.
// Call after recording r_0 and before applying any step-0 potential.
double terminal_log_correction(const RewardHistory& history, const PotentialSpec& spec);

}  // namespace fks
