#include "fksteer/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fksteer/error.hpp"
#include "fksteer/simd/kernels.hpp"

namespace fks {

WeightVector normalize_weights(std::span<const double> log_potentials) {
  if (log_potentials.empty()) throw std::invalid_argument("normalize_weights: empty input");
  for (double v : log_potentials) {
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
      throw std::invalid_argument("normalize_weights: NaN or +inf log-potential");
    }
  }
  const auto& kern = simd::active();
  const double top = kern.max_value(log_potentials);
  if (top == -std::numeric_limits<double>::infinity()) {
    throw DegenerateWeightsError("all particles have zero potential (every log-potential is -inf)");
  }

  WeightVector out;
  out.source_log_potentials.assign(log_potentials.begin(), log_potentials.end());
  out.weights.resize(log_potentials.size());
  for (std::size_t i = 0; i < log_potentials.size(); ++i) {
    const double lp = log_potentials[i];
    out.weights[i] = lp == -std::numeric_limits<double>::infinity()
                         ? 0.0
                         : std::exp(std::max(lp - top, kLogWeightFloor));
  }
  kern.scale(out.weights, 1.0 / kern.sum(out.weights));
  return out;
}

double effective_sample_size(const WeightVector& w) {
  return 1.0 / simd::active().sum_squares(w.weights);
}

double weight_entropy(const WeightVector& w) {
  double h = 0.0;
  for (double v : w.weights) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

std::string to_string(ResampleMethod method) {
  switch (method) {
    case ResampleMethod::multinomial:
      return "multinomial";
    case ResampleMethod::systematic:
      return "systematic";
    case ResampleMethod::none:
      return "none";
  }
  return "unknown";
}

ResampleMethod parse_resample_method(const std::string& text) {
  if (text == "multinomial") return ResampleMethod::multinomial;
  if (text == "systematic") return ResampleMethod::systematic;
  if (text == "none") return ResampleMethod::none;
  throw ConfigError("unknown resample_method '" + text + "' (expected multinomial|systematic|none)");
}

std::vector<std::size_t> draw_ancestors(std::span<const double> weights, ResampleMethod method,
                                        StreamRng& rng) {
  const std::size_t n = weights.size();
  std::vector<std::size_t> ancestors(n);
  if (method == ResampleMethod::none) {
    for (std::size_t i = 0; i < n; ++i) ancestors[i] = i;
    return ancestors;
  }

  std::vector<double> cumulative(n);
  double running = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    running += weights[i];
    cumulative[i] = running;
  }
  const double total = running;
  // Never select a zero-weight tail particle when rounding pushes u past the last sum.
  std::size_t last_positive = n - 1;
  while (last_positive > 0 && weights[last_positive] <= 0.0) --last_positive;

  auto locate = [&](double u) {
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const auto idx = static_cast<std::size_t>(it - cumulative.begin());
    return std::min(idx, last_positive);
  };

  if (method == ResampleMethod::multinomial) {
    for (auto& a : ancestors) a = locate(rng.uniform() * total);
  } else {
    const double step = total / static_cast<double>(n);
    const double offset = rng.uniform() * step;
    std::size_t j = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const double u = offset + static_cast<double>(k) * step;
      while (j < last_positive && cumulative[j] <= u) ++j;
      ancestors[k] = j;
    }
  }
  return ancestors;
}

std::vector<std::size_t> multiplicities(std::span<const std::size_t> ancestors, std::size_t n) {
  std::vector<std::size_t> counts(n, 0);
  for (auto a : ancestors) ++counts.at(a);
  return counts;
}

Ensemble resample(const Ensemble& ensemble, const WeightVector& w, ResampleMethod method,
                  StreamRng& rng, std::vector<std::size_t>* ancestors_out) {
  if (ensemble.size() != w.size()) throw std::invalid_argument("resample: weight/ensemble size mismatch");
  const auto ancestors = draw_ancestors(w.weights, method, rng);
  Ensemble next;
  next.reserve(ensemble.size());
  for (std::size_t k = 0; k < ancestors.size(); ++k) {
    Particle p = ensemble[ancestors[k]];
    p.parent = ancestors[k];
    if (method != ResampleMethod::none) p.log_weight = 0.0;
    next.push_back(std::move(p));
  }
  if (ancestors_out) *ancestors_out = ancestors;
  return next;
}

bool should_resample(int t, const ResampleSchedule& schedule) {
  return t <= schedule.t_start && (schedule.t_start - t) % schedule.dt == 0;
}

}  // namespace fks
