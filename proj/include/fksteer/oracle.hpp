#pragma once

// Ground-truth tilted laws p*(x0) ~ p(x0) exp(lambda r(x0)) for the toy
// backends, computed without touching the steering code.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fksteer/backend.hpp"

namespace fks {

struct TiltedMarginal {
  enum class Kind { discrete, gaussian };
  Kind kind = Kind::discrete;
  std::vector<double> probabilities;  // discrete
  double mean = 0.0;                  // gaussian
  double variance = 1.0;
};

// Dense product pi_T K_T ... K_1 followed by exponential tilting. Requires
// S <= 64 and T <= 64; throws std::invalid_argument on a reward length mismatch.
TiltedMarginal exact_tilted_discrete(const DiscreteChainBackend& backend, std::span<const double> reward,
                                     double lambda);

// N(mean, variance) tilted by exp(lambda * a * x).
TiltedMarginal exact_tilted_gaussian(double mean, double variance, double a, double lambda);

struct Interval {
  double estimate = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

struct SnisEstimate {
  Interval mean_reward;
  // Weighted category frequencies when categories are supplied.
  TiltedMarginal marginal;
  std::vector<Interval> category_intervals;
  double ess = 0.0;
  std::size_t samples = 0;
  bool reliable = true;
  std::vector<std::string> warnings;
};

struct SnisOptions {
  std::size_t bootstrap = 200;
  double level = 0.95;
  std::uint64_t seed = 0;
  std::size_t min_samples = 10000;
  double min_ess = 50.0;
};

// Self-normalized importance weights exp(lambda r) over unguided samples.
// `categories` is either empty or one label in [0, n_categories) per sample.
SnisEstimate snis_estimate(std::span<const double> rewards, std::span<const std::size_t> categories,
                           std::size_t n_categories, double lambda, const SnisOptions& options = {});

double total_variation(std::span<const double> p, std::span<const double> q);
std::vector<double> empirical_distribution(std::span<const std::size_t> symbols, std::size_t states);

// state,exact[,empirical] rows for discrete marginals; a single parameter row for gaussians.
void write_marginal_csv(const std::filesystem::path& path, const TiltedMarginal& exact,
                        std::span<const double> empirical = {});

}  // namespace fks
