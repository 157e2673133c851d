#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "fksteer/backend.hpp"
#include "fksteer/csv.hpp"
#include "fksteer/error.hpp"
#include "fksteer/simd/kernels.hpp"

namespace fks {
namespace {

constexpr double kStochasticTol = 1e-12;

void check_distribution(std::span<const double> p, const std::string& what) {
  double total = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(what + " has a negative or non-finite entry");
    total += v;
  }
  if (std::abs(total - 1.0) > kStochasticTol) {
    throw ConfigError(what + " sums to " + csv::format_double(total) + ", expected 1");
  }
}

std::size_t draw_categorical(std::span<const double> probs, StreamRng& rng) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    cumulative += probs[i];
    if (u < cumulative) return i;
  }
  // Rounding left u above the last cumulative sum: take the last supported state.
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) return i;
  }
  return probs.size() - 1;
}

std::vector<double> dirichlet(std::size_t n, double concentration, StreamRng& rng) {
  std::gamma_distribution<double> gamma(concentration, 1.0);
  std::vector<double> p(n);
  double total = 0.0;
  for (auto& v : p) {
    v = gamma(rng);
    total += v;
  }
  for (auto& v : p) v /= total;
  // Renormalize once more so the row sums to 1 within the validation tolerance.
  double again = 0.0;
  for (double v : p) again += v;
  p.back() += 1.0 - again;
  return p;
}

}  // namespace

DiscreteChainBackend::DiscreteChainBackend(std::vector<double> pi_T,
                                           std::vector<std::vector<double>> kernels)
    : pi_T_(std::move(pi_T)), kernels_(std::move(kernels)) {
  const std::size_t s = pi_T_.size();
  if (s == 0) throw ConfigError("discrete backend needs at least one state");
  if (kernels_.empty()) throw ConfigError("discrete backend needs at least one step");
  check_distribution(pi_T_, "pi_T");
  for (std::size_t k = 0; k < kernels_.size(); ++k) {
    if (kernels_[k].size() != s * s) {
      throw ConfigError("kernel K_" + std::to_string(k + 1) + " is not " + std::to_string(s) + "x" +
                        std::to_string(s));
    }
    for (std::size_t i = 0; i < s; ++i) {
      check_distribution(std::span<const double>(kernels_[k]).subspan(i * s, s),
                         "row " + std::to_string(i) + " of K_" + std::to_string(k + 1));
    }
  }

  const auto& kern = simd::active();
  to_terminal_.resize(kernels_.size() + 1);
  to_terminal_[0].assign(s * s, 0.0);
  for (std::size_t i = 0; i < s; ++i) to_terminal_[0][i * s + i] = 1.0;
  for (std::size_t t = 1; t <= kernels_.size(); ++t) {
    // (K_t M_{t-1})[i, :] = sum_j K_t[i, j] M_{t-1}[j, :]
    auto& out = to_terminal_[t];
    out.assign(s * s, 0.0);
    const auto& k = kernels_[t - 1];
    for (std::size_t i = 0; i < s; ++i) {
      kern.vec_mat(std::span<const double>(k).subspan(i * s, s), to_terminal_[t - 1], s,
                   std::span<double>(out).subspan(i * s, s));
    }
  }
}

DiscreteChainBackend DiscreteChainBackend::random(std::size_t states, int steps,
                                                  std::uint64_t seed, double concentration) {
  StreamRng rng(seed, Purpose::scenario, 0, 0);
  auto pi = dirichlet(states, concentration, rng);
  std::vector<std::vector<double>> kernels(static_cast<std::size_t>(steps));
  for (auto& k : kernels) {
    k.reserve(states * states);
    for (std::size_t i = 0; i < states; ++i) {
      const auto row = dirichlet(states, concentration, rng);
      k.insert(k.end(), row.begin(), row.end());
    }
  }
  return DiscreteChainBackend(std::move(pi), std::move(kernels));
}

DiscreteChainBackend DiscreteChainBackend::uniform(std::size_t states, int steps) {
  const double p = 1.0 / static_cast<double>(states);
  return DiscreteChainBackend(std::vector<double>(states, p),
                              std::vector<std::vector<double>>(static_cast<std::size_t>(steps),
                                                               std::vector<double>(states * states, p)));
}

std::span<const double> DiscreteChainBackend::kernel(int t) const {
  if (t < 1 || t > steps()) throw std::out_of_range("kernel index " + std::to_string(t));
  return kernels_[static_cast<std::size_t>(t - 1)];
}

std::vector<double> DiscreteChainBackend::marginal(int t) const {
  if (t < 0 || t > steps()) throw std::out_of_range("marginal index " + std::to_string(t));
  std::vector<double> law = pi_T_;
  std::vector<double> next(law.size());
  for (int s = steps(); s > t; --s) {
    simd::active().vec_mat(law, kernel(s), law.size(), next);
    law.swap(next);
  }
  return law;
}

BackendState DiscreteChainBackend::sample_noise(StreamRng& rng) const {
  return {draw_categorical(pi_T_, rng), steps()};
}

BackendState DiscreteChainBackend::denoise_step(const BackendState& state, StreamRng& rng) const {
  if (state.t <= 0) throw std::invalid_argument("cannot denoise a terminal state");
  const std::size_t s = states();
  const auto row = kernel(state.t).subspan(state.symbol() * s, s);
  return {draw_categorical(row, rng), state.t - 1};
}

DenoisedProxy DiscreteChainBackend::predict_x0(const BackendState& state) const {
  const std::size_t s = states();
  const auto& m = to_terminal_.at(static_cast<std::size_t>(state.t));
  const auto first = m.begin() + static_cast<std::ptrdiff_t>(state.symbol() * s);
  return {DenoisedProxy::Kind::posterior, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(s)),
          state.t};
}

std::vector<std::vector<double>> load_kernel_csv(const std::filesystem::path& path,
                                                 std::size_t states, int steps) {
  const auto rows = csv::read_numeric(path);
  std::vector<std::vector<double>> kernels(static_cast<std::size_t>(steps),
                                           std::vector<double>(states * states, -1.0));
  for (const auto& row : rows) {
    if (row.size() != states + 2) {
      throw ConfigError(path.string() + ": expected " + std::to_string(states + 2) + " columns");
    }
    const auto t = static_cast<long>(row[0]);
    const auto from = static_cast<long>(row[1]);
    if (t < 1 || t > steps || from < 0 || static_cast<std::size_t>(from) >= states) {
      throw ConfigError(path.string() + ": row index (t=" + std::to_string(t) +
                        ", from=" + std::to_string(from) + ") out of range");
    }
    auto& k = kernels[static_cast<std::size_t>(t - 1)];
    for (std::size_t j = 0; j < states; ++j) k[static_cast<std::size_t>(from) * states + j] = row[j + 2];
  }
  for (std::size_t t = 0; t < kernels.size(); ++t) {
    for (double v : kernels[t]) {
      if (v < 0.0) throw ConfigError(path.string() + ": missing rows for K_" + std::to_string(t + 1));
    }
  }
  return kernels;
}

}  // namespace fks
