#include <cmath>
#include <stdexcept>

#include "fksteer/backend.hpp"
#include "fksteer/error.hpp"

namespace fks {

GaussianChainBackend::GaussianChainBackend(int steps, double rho, std::size_t dim)
    : steps_(steps), rho_(rho), dim_(dim) {
  if (steps < 1) throw ConfigError("gaussian backend needs T >= 1");
  if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("gaussian backend needs rho in (0, 1]");
  if (dim == 0) throw ConfigError("gaussian backend needs dim >= 1");
}

BackendState GaussianChainBackend::sample_noise(StreamRng& rng) const {
  std::vector<double> x(dim_);
  for (auto& v : x) v = rng.normal();
  return {std::move(x), steps_};
}

BackendState GaussianChainBackend::denoise_step(const BackendState& state, StreamRng& rng) const {
  if (state.t <= 0) throw std::invalid_argument("cannot denoise a terminal state");
  const double innovation = std::sqrt(1.0 - rho_ * rho_);
  std::vector<double> x = state.values();
  for (auto& v : x) v = rho_ * v + innovation * rng.normal();
  return {std::move(x), state.t - 1};
}

DenoisedProxy GaussianChainBackend::predict_x0(const BackendState& state) const {
  const double shrink = std::pow(rho_, state.t);
  std::vector<double> x = state.values();
  if (state.t > 0) {
    for (auto& v : x) v *= shrink;
  }
  return {DenoisedProxy::Kind::point, std::move(x), state.t};
}

}  // namespace fks
