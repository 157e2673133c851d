#include "fksteer/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "fksteer/csv.hpp"
#include "fksteer/rng.hpp"

namespace fks {
namespace {

std::vector<double> tilt(std::vector<double> p, std::span<const double> reward, double lambda) {
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) top = std::max(top, lambda * reward[i]);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = p[i] > 0.0 ? p[i] * std::exp(lambda * reward[i] - top) : 0.0;
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(v.size() - 1, lo + 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

}  // namespace

TiltedMarginal exact_tilted_discrete(const DiscreteChainBackend& backend, std::span<const double> reward,
                                     double lambda) {
  const std::size_t s = backend.states();
  const int steps = backend.steps();
  if (s > 64 || steps > 64) throw std::invalid_argument("exact_tilted_discrete: S and T must be <= 64");
  if (reward.size() != s) {
    throw std::invalid_argument("exact_tilted_discrete: reward has " + std::to_string(reward.size()) +
                                " entries for " + std::to_string(s) + " states");
  }
  std::vector<double> p = backend.initial_law();
  std::vector<double> next(s);
  for (int t = steps; t >= 1; --t) {
    const auto k = backend.kernel(t);
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < s; ++i) {
      for (std::size_t j = 0; j < s; ++j) next[j] += p[i] * k[i * s + j];
    }
    p.swap(next);
  }
  TiltedMarginal out;
  out.kind = TiltedMarginal::Kind::discrete;
  out.probabilities = tilt(std::move(p), reward, lambda);
  return out;
}

TiltedMarginal exact_tilted_gaussian(double mean, double variance, double a, double lambda) {
  if (!(variance > 0.0)) throw std::invalid_argument("exact_tilted_gaussian: variance must be > 0");
  TiltedMarginal out;
  out.kind = TiltedMarginal::Kind::gaussian;
  out.mean = mean + lambda * a * variance;
  out.variance = variance;
  return out;
}

SnisEstimate snis_estimate(std::span<const double> rewards, std::span<const std::size_t> categories,
                           std::size_t n_categories, double lambda, const SnisOptions& options) {
  const std::size_t n = rewards.size();
  if (n == 0) throw std::invalid_argument("snis_estimate: no samples");
  if (!categories.empty() && categories.size() != n) {
    throw std::invalid_argument("snis_estimate: categories and rewards differ in length");
  }
  for (std::size_t c : categories) {
    if (c >= n_categories) throw std::invalid_argument("snis_estimate: category out of range");
  }

  std::vector<double> logw(n);
  for (std::size_t i = 0; i < n; ++i) logw[i] = lambda * rewards[i];
  const double top = *std::max_element(logw.begin(), logw.end());
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = std::exp(logw[i] - top);

  auto summarize = [&](std::span<const std::size_t> idx, double& mean, std::vector<double>& freq) {
    double total = 0.0, acc = 0.0;
    freq.assign(n_categories, 0.0);
    for (std::size_t i : idx) {
      total += w[i];
      acc += w[i] * rewards[i];
      if (!categories.empty()) freq[categories[i]] += w[i];
    }
    mean = acc / total;
    for (double& f : freq) f /= total;
  };

  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  SnisEstimate est;
  est.samples = n;
  std::vector<double> freq;
  summarize(all, est.mean_reward.estimate, freq);
  est.marginal.kind = TiltedMarginal::Kind::discrete;
  if (!categories.empty()) est.marginal.probabilities = freq;

  double sum = 0.0, sum_sq = 0.0;
  for (double v : w) {
    sum += v;
    sum_sq += v * v;
  }
  est.ess = sum * sum / sum_sq;

  std::vector<double> boot_means;
  std::vector<std::vector<double>> boot_freq(categories.empty() ? 0 : n_categories);
  StreamRng rng(options.seed, Purpose::bootstrap, 0, 0);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<std::size_t> idx(n);
  for (std::size_t b = 0; b < options.bootstrap; ++b) {
    for (auto& i : idx) i = pick(rng);
    double mean = 0.0;
    summarize(idx, mean, freq);
    boot_means.push_back(mean);
    for (std::size_t c = 0; c < boot_freq.size(); ++c) boot_freq[c].push_back(freq[c]);
  }
  const double alpha = (1.0 - options.level) / 2.0;
  if (!boot_means.empty()) {
    est.mean_reward.lo = quantile(boot_means, alpha);
    est.mean_reward.hi = quantile(boot_means, 1.0 - alpha);
  } else {
    est.mean_reward.lo = est.mean_reward.hi = est.mean_reward.estimate;
  }
  for (std::size_t c = 0; c < boot_freq.size(); ++c) {
    Interval iv{est.marginal.probabilities[c], est.marginal.probabilities[c], est.marginal.probabilities[c]};
    if (!boot_freq[c].empty()) {
      iv.lo = quantile(boot_freq[c], alpha);
      iv.hi = quantile(boot_freq[c], 1.0 - alpha);
    }
    est.category_intervals.push_back(iv);
  }

  if (n < options.min_samples) {
    est.reliable = false;
    est.warnings.push_back("only " + std::to_string(n) + " samples (want " +
                           std::to_string(options.min_samples) + ")");
  }
  if (est.ess < options.min_ess) {
    est.reliable = false;
    est.warnings.push_back("importance-weight ESS " + csv::format_double(est.ess) + " below " +
                           csv::format_double(options.min_ess));
  }
  return est;
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("total_variation: length mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) d += std::abs(p[i] - q[i]);
  return 0.5 * d;
}

std::vector<double> empirical_distribution(std::span<const std::size_t> symbols, std::size_t states) {
  std::vector<double> out(states, 0.0);
  if (symbols.empty()) return out;
  for (std::size_t s : symbols) {
    if (s >= states) throw std::invalid_argument("empirical_distribution: symbol out of range");
    out[s] += 1.0;
  }
  for (double& v : out) v /= static_cast<double>(symbols.size());
  return out;
}

void write_marginal_csv(const std::filesystem::path& path, const TiltedMarginal& exact,
                        std::span<const double> empirical) {
  if (exact.kind == TiltedMarginal::Kind::gaussian) {
    csv::Writer out(path, "mean,variance");
    out.row({csv::format_double(exact.mean), csv::format_double(exact.variance)});
    return;
  }
  const bool both = empirical.size() == exact.probabilities.size();
  csv::Writer out(path, both ? "state,exact,empirical" : "state,exact");
  for (std::size_t i = 0; i < exact.probabilities.size(); ++i) {
    std::vector<std::string> row{std::to_string(i), csv::format_double(exact.probabilities[i])};
    if (both) row.push_back(csv::format_double(empirical[i]));
    out.row(row);
  }
}

}  // namespace fks
