#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "fksteer/backend.hpp"
#include "fksteer/error.hpp"

namespace fks {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  return a;
}

}  // namespace

ChainMolBackend::ChainMolBackend(ChainMolParams params) : params_(std::move(params)) {
  const auto& p = params_;
  if (p.residues < 3) throw ConfigError("chainmol backend needs L >= 3");
  if (p.steps < 1) throw ConfigError("chainmol backend needs T >= 1");
  if (!(p.bond_k >= 0.0) || !(p.angle_k >= 0.0) || !(p.bond_length > 0.0)) {
    throw ConfigError("chainmol energy constants must be non-negative");
  }
  if (p.substeps < 1) throw ConfigError("chainmol drift needs at least one substep");
  if (p.angle_wells.empty()) throw ConfigError("chainmol backend needs at least one angle well");
  for (const auto& w : p.angle_wells) {
    if (!(w.width_deg > 0.0) || !(w.weight > 0.0)) {
      throw ConfigError("angle wells need positive width and weight");
    }
  }
  for (double v : {p.eta_start, p.eta_end, p.sigma_start, p.sigma_end}) {
    if (!std::isfinite(v) || v < 0.0) throw ConfigError("chainmol schedules must be finite and >= 0");
  }
  if (p.sigma_end > p.sigma_start) throw ConfigError("chainmol noise must decrease toward t = 0");
  if ((p.sigma_start == 0.0) != (p.sigma_end == 0.0)) {
    throw ConfigError("geometric noise schedule needs both endpoints zero or both positive");
  }

  const auto steps = static_cast<std::size_t>(p.steps);
  eta_.assign(steps + 1, 0.0);
  sigma_.assign(steps + 1, 0.0);
  for (int t = 1; t <= p.steps; ++t) {
    const double frac = p.steps > 1 ? static_cast<double>(p.steps - t) / (p.steps - 1) : 1.0;
    eta_[static_cast<std::size_t>(t)] = p.eta_start + (p.eta_end - p.eta_start) * frac;
    sigma_[static_cast<std::size_t>(t)] =
        p.sigma_start > 0.0 ? p.sigma_start * std::pow(p.sigma_end / p.sigma_start, frac) : 0.0;
  }
  pending_.assign(steps + 1, 0.0);
  double acc = 0.0;
  for (std::size_t t = 1; t <= steps; ++t) {
    acc += sigma_[t] * sigma_[t];
    pending_[t] = std::sqrt(acc);
  }
}

double ChainMolBackend::energy(std::span<const double> xy) const {
  const auto& p = params_;
  const std::size_t n = xy.size() / 2;
  double e = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double len = std::hypot(xy[2 * i + 2] - xy[2 * i], xy[2 * i + 3] - xy[2 * i + 1]);
    e += 0.5 * p.bond_k * (len - p.bond_length) * (len - p.bond_length);
  }
  for (double theta : turn_angles(xy)) {
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> logs;
    logs.reserve(p.angle_wells.size());
    for (const auto& w : p.angle_wells) {
      const double d = wrap_angle(theta - w.mean_deg * kDeg);
      const double s = w.width_deg * kDeg;
      logs.push_back(std::log(w.weight) - d * d / (2.0 * s * s));
      best = std::max(best, logs.back());
    }
    double acc = 0.0;
    for (double l : logs) acc += std::exp(l - best);
    e -= p.angle_k * (best + std::log(acc));
  }
  return e;
}

void ChainMolBackend::energy_gradient(std::span<const double> xy, std::span<double> grad) const {
  const auto& p = params_;
  const std::size_t n = xy.size() / 2;
  std::fill(grad.begin(), grad.end(), 0.0);

  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double bx = xy[2 * i + 2] - xy[2 * i];
    const double by = xy[2 * i + 3] - xy[2 * i + 1];
    const double len = std::hypot(bx, by);
    if (len < 1e-12) continue;
    const double f = p.bond_k * (len - p.bond_length) / len;
    grad[2 * i] -= f * bx;
    grad[2 * i + 1] -= f * by;
    grad[2 * i + 2] += f * bx;
    grad[2 * i + 3] += f * by;
  }

  if (p.angle_k == 0.0) return;
  std::vector<double> logs(p.angle_wells.size());
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double b1x = xy[2 * i] - xy[2 * i - 2];
    const double b1y = xy[2 * i + 1] - xy[2 * i - 1];
    const double b2x = xy[2 * i + 2] - xy[2 * i];
    const double b2y = xy[2 * i + 3] - xy[2 * i + 1];
    const double l1 = b1x * b1x + b1y * b1y;
    const double l2 = b2x * b2x + b2y * b2y;
    if (l1 < 1e-12 || l2 < 1e-12) continue;
    const double theta = std::atan2(b1x * b2y - b1y * b2x, b1x * b2x + b1y * b2y);

    // dE/dtheta = k * sum_m resp_m * d_m / s_m^2
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < p.angle_wells.size(); ++m) {
      const auto& w = p.angle_wells[m];
      const double d = wrap_angle(theta - w.mean_deg * kDeg);
      const double s = w.width_deg * kDeg;
      logs[m] = std::log(w.weight) - d * d / (2.0 * s * s);
      best = std::max(best, logs[m]);
    }
    double norm = 0.0;
    double slope = 0.0;
    for (std::size_t m = 0; m < p.angle_wells.size(); ++m) {
      const auto& w = p.angle_wells[m];
      const double r = std::exp(logs[m] - best);
      const double s = w.width_deg * kDeg;
      norm += r;
      slope += r * wrap_angle(theta - w.mean_deg * kDeg) / (s * s);
    }
    const double de_dtheta = p.angle_k * slope / norm;

    // theta = phi(b2) - phi(b1), dphi/db = (-b_y, b_x) / |b|^2
    const double d1x = b1y / l1;
    const double d1y = -b1x / l1;
    const double d2x = -b2y / l2;
    const double d2y = b2x / l2;
    grad[2 * i - 2] += de_dtheta * (-d1x);
    grad[2 * i - 1] += de_dtheta * (-d1y);
    grad[2 * i] += de_dtheta * (d1x - d2x);
    grad[2 * i + 1] += de_dtheta * (d1y - d2y);
    grad[2 * i + 2] += de_dtheta * d2x;
    grad[2 * i + 3] += de_dtheta * d2y;
  }
}

void ChainMolBackend::drift_step(std::vector<double>& xy, std::vector<double>& grad, int t) const {
  const double eta = drift(t);
  for (int m = 0; m < params_.substeps; ++m) {
    energy_gradient(xy, grad);
    for (std::size_t k = 0; k < xy.size(); ++k) xy[k] -= eta * grad[k];
  }
}

BackendState ChainMolBackend::sample_noise(StreamRng& rng) const {
  std::vector<double> xy(2 * params_.residues);
  for (auto& v : xy) v = rng.normal();
  return {std::move(xy), params_.steps};
}

BackendState ChainMolBackend::denoise_step(const BackendState& state, StreamRng& rng) const {
  if (state.t <= 0) throw std::invalid_argument("cannot denoise a terminal state");
  std::vector<double> xy = state.values();
  std::vector<double> grad(xy.size());
  drift_step(xy, grad, state.t);
  const double sigma = noise(state.t);
  for (auto& v : xy) v += sigma * rng.normal();
  return {std::move(xy), state.t - 1};
}

DenoisedProxy ChainMolBackend::predict_x0(const BackendState& state) const {
  std::vector<double> xy = state.values();
  std::vector<double> grad(xy.size());
  for (int s = state.t; s >= 1; --s) drift_step(xy, grad, s);
  return {DenoisedProxy::Kind::chain, std::move(xy), state.t, pending_[static_cast<std::size_t>(state.t)]};
}

}  // namespace fks
