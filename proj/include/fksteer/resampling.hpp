#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fksteer/particle.hpp"
#include "fksteer/rng.hpp"

namespace fks {

// Shifted log-potentials are clipped to this floor before exponentiation.
inline constexpr double kLogWeightFloor = -1e3;

struct WeightVector {
  std::vector<double> weights;
  std::vector<double> source_log_potentials;

  std::size_t size() const { return weights.size(); }
};

// Shift by the maximum, clip at kLogWeightFloor, exponentiate, normalize.
// -inf entries get weight exactly 0. Throws DegenerateWeightsError when every
// entry is -inf and std::invalid_argument on NaN, +inf or an empty input.
WeightVector normalize_weights(std::span<const double> log_potentials);

// 1 / sum w_i^2.
double effective_sample_size(const WeightVector& w);
// -sum w_i log w_i (nats).
double weight_entropy(const WeightVector& w);

enum class ResampleMethod { multinomial, systematic, none };

std::string to_string(ResampleMethod method);
ResampleMethod parse_resample_method(const std::string& text);

// N ancestor indices drawn from the weights. `none` returns the identity.
std::vector<std::size_t> draw_ancestors(std::span<const double> weights, ResampleMethod method,
                                        StreamRng& rng);

std::vector<std::size_t> multiplicities(std::span<const std::size_t> ancestors, std::size_t n);

// Draws N particles with replacement. Each output deep-copies its ancestor
// (state, history, last evaluation), records the ancestor slot as `parent`
// and starts with a zero log-weight (kept as-is for `none`).
Ensemble resample(const Ensemble& ensemble, const WeightVector& w, ResampleMethod method,
                  StreamRng& rng, std::vector<std::size_t>* ancestors_out = nullptr);

struct ResampleSchedule {
  int t_start = 50;
  int dt = 2;
};

bool should_resample(int t, const ResampleSchedule& schedule);

}  // namespace fks
