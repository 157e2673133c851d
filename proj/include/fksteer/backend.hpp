#pragma once

// Reverse-diffusion backends. A backend owns the generative law
//   x_T ~ p(x_T),  x_{t-1} ~ p(x_{t-1} | x_t)
// and the deterministic denoised proxy x0_hat(x_t, t). Backends are immutable
// after construction; all randomness comes from the caller's stream.

#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fksteer/rng.hpp"

namespace fks {

enum class BackendKind { discrete, gaussian, chainmol };

std::string to_string(BackendKind kind);

struct BackendState {
  // Symbol index (discrete) or a flat real array (Gaussian vector, or
  // interleaved x,y coordinates for a chain).
  std::variant<std::size_t, std::vector<double>> payload;
  int t = 0;

  std::size_t symbol() const { return std::get<std::size_t>(payload); }
  const std::vector<double>& values() const { return std::get<std::vector<double>>(payload); }

  bool operator==(const BackendState&) const = default;
};

struct DenoisedProxy {
  enum class Kind {
    posterior,  // probability vector over the discrete terminal states
    point,      // real vector
    chain,      // interleaved x,y coordinates, one pair per residue
  };
  Kind kind = Kind::point;
  std::vector<double> values;
  int t = 0;
  // Per-coordinate sd of x_0 around the proxy still owed to future noise.
  double uncertainty = 0.0;

  bool operator==(const DenoisedProxy&) const = default;
};

class Backend {
 public:
  virtual ~Backend() = default;

  virtual BackendKind kind() const = 0;
  virtual int steps() const = 0;

  virtual BackendState sample_noise(StreamRng& rng) const = 0;
  // Throws std::invalid_argument for a terminal (t == 0) state.
  virtual BackendState denoise_step(const BackendState& state, StreamRng& rng) const = 0;
  virtual DenoisedProxy predict_x0(const BackendState& state) const = 0;
};

// Finite-state chain with explicit row-stochastic reverse kernels.
class DiscreteChainBackend final : public Backend {
 public:
  // kernels[t-1] is K_t, a row-major S x S table of p(x_{t-1} = j | x_t = i).
  DiscreteChainBackend(std::vector<double> pi_T, std::vector<std::vector<double>> kernels);

  // Random kernels with Dirichlet(concentration) rows and a Dirichlet initial law.
  static DiscreteChainBackend random(std::size_t states, int steps, std::uint64_t seed,
                                     double concentration = 1.0);
  static DiscreteChainBackend uniform(std::size_t states, int steps);

  BackendKind kind() const override { return BackendKind::discrete; }
  int steps() const override { return static_cast<int>(kernels_.size()); }
  std::size_t states() const { return pi_T_.size(); }

  BackendState sample_noise(StreamRng& rng) const override;
  BackendState denoise_step(const BackendState& state, StreamRng& rng) const override;
  // Posterior over x_0: row x_t of K_t K_{t-1} ... K_1.
  DenoisedProxy predict_x0(const BackendState& state) const override;

  const std::vector<double>& initial_law() const { return pi_T_; }
  std::span<const double> kernel(int t) const;
  // Law of x_t under the unguided chain: pi_T K_T ... K_{t+1}.
  std::vector<double> marginal(int t) const;
  std::vector<double> terminal_marginal() const { return marginal(0); }

 private:
  std::vector<double> pi_T_;
  std::vector<std::vector<double>> kernels_;
  // to_terminal_[t] = K_t ... K_1, identity at t = 0.
  std::vector<std::vector<double>> to_terminal_;
};

// Kernel table CSV: one row per (t, from) with columns t,from,p_0,...,p_{S-1}.
std::vector<std::vector<double>> load_kernel_csv(const std::filesystem::path& path,
                                                 std::size_t states, int steps);

// x_{t-1} = rho x_t + sqrt(1 - rho^2) eps, standard-normal marginals at every t.
class GaussianChainBackend final : public Backend {
 public:
  GaussianChainBackend(int steps, double rho, std::size_t dim = 1);

  BackendKind kind() const override { return BackendKind::gaussian; }
  int steps() const override { return steps_; }
  double rho() const { return rho_; }
  std::size_t dim() const { return dim_; }

  BackendState sample_noise(StreamRng& rng) const override;
  BackendState denoise_step(const BackendState& state, StreamRng& rng) const override;
  // E[x_0 | x_t] = rho^t x_t.
  DenoisedProxy predict_x0(const BackendState& state) const override;

 private:
  int steps_;
  double rho_;
  std::size_t dim_;
};

struct AngleWell {
  double mean_deg;
  double width_deg;
  double weight;
};

struct ChainMolParams {
  std::size_t residues = 15;
  int steps = 50;
  double bond_k = 1.0;
  double bond_length = 1.0;
  double angle_k = 0.3;
  // Signed turn-angle mixture: strand-like, helix-like, loop-like wells.
  std::vector<AngleWell> angle_wells{{0.0, 20.0, 1.0}, {55.0, 12.0, 1.0}, {-110.0, 10.0, 0.3}};
  // Drift step grows linearly from eta_start (t = T) to eta_end (t = 1).
  double eta_start = 0.01;
  double eta_end = 0.03;
  // Noise decays geometrically from sigma_start (t = T) to sigma_end (t = 1).
  double sigma_start = 0.8;
  double sigma_end = 0.05;
  // Gradient steps of size eta_t taken per reverse step.
  int substeps = 16;
};

// Toy backbone generator: 2-D chain annealed by noisy gradient descent on a
// bond-spring plus turn-angle-mixture energy.
class ChainMolBackend final : public Backend {
 public:
  explicit ChainMolBackend(ChainMolParams params);

  BackendKind kind() const override { return BackendKind::chainmol; }
  int steps() const override { return params_.steps; }
  std::size_t residues() const { return params_.residues; }
  const ChainMolParams& params() const { return params_; }

  double drift(int t) const { return eta_[static_cast<std::size_t>(t)]; }
  double noise(int t) const { return sigma_[static_cast<std::size_t>(t)]; }

  BackendState sample_noise(StreamRng& rng) const override;
  BackendState denoise_step(const BackendState& state, StreamRng& rng) const override;
  // Noise-free drift rollout from t down to 0, with uncertainty
  // sqrt(sigma_1^2 + ... + sigma_t^2).
  DenoisedProxy predict_x0(const BackendState& state) const override;

  double energy(std::span<const double> xy) const;
  void energy_gradient(std::span<const double> xy, std::span<double> grad) const;

 private:
  void drift_step(std::vector<double>& xy, std::vector<double>& grad, int t) const;

  ChainMolParams params_;
  std::vector<double> eta_;    // indexed by t, entry 0 unused
  std::vector<double> sigma_;  // indexed by t, entry 0 unused
  std::vector<double> pending_;  // sqrt of summed sigma^2 over steps 1..t
};

// Signed turn angle (radians, in (-pi, pi]) at each interior residue.
std::vector<double> turn_angles(std::span<const double> xy);

}  // namespace fks
