#pragma once

// Reward evaluation pipeline: stochastic refinement of a denoised proxy into
// a (tokens, coordinates) pair, scalar reward functions on that pair, and
// mean/max aggregation over repeated refinements.

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fksteer/backend.hpp"
#include "fksteer/rng.hpp"
#include "fksteer/simd/kernels.hpp"
#include "fksteer/worker.hpp"

namespace fks {

// Residue alphabet of the refined chain.
inline constexpr std::array<char, 8> kAlphabet{'K', 'R', 'D', 'E', 'G', 'A', 'V', 'S'};

enum class RewardKind { charge, secondary_structure, binding, external, state_table, linear };
enum class Aggregation { mean, max };
enum class SsClass { helix, strand, loop };

std::string to_string(RewardKind kind);
RewardKind parse_reward_kind(const std::string& text);
std::string to_string(Aggregation aggregation);
Aggregation parse_aggregation(const std::string& text);
SsClass parse_ss_class(const std::string& text);

struct RefinedPair {
  std::string tokens;
  std::vector<double> coords;  // interleaved x,y

  bool operator==(const RefinedPair&) const = default;
};

struct SsFractions {
  double alpha = 0.0;
  double beta = 0.0;
  double ell = 0.0;
};

struct SecondaryStructureTargets {
  double alpha_star = 1.0 / 3.0;
  double beta_star = 1.0 / 3.0;
  double ell_star = 1.0 / 3.0;
  double w_alpha = 1.0 / 3.0;
  double w_beta = 1.0 / 3.0;
  double w_ell = 1.0 / 3.0;

  // Pure target class, that class weighted fourfold: weights (4,1,1)/6 for helix.
  static SecondaryStructureTargets steer_toward(SsClass target);
  // Checks targets sum to 1 and rescales the weights to sum to 1.
  SecondaryStructureTargets normalized() const;
};

struct RewardPipelineSpec {
  RewardKind kind = RewardKind::binding;
  std::size_t n_evals = 1;
  Aggregation aggregation = Aggregation::mean;
  double refiner_temperature = 0.2;
  int q_star = 0;
  SecondaryStructureTargets ss_targets;
  std::vector<double> target_coords;  // interleaved x,y of the binding target
  simd::PairPotential pair_potential;
  std::vector<double> state_rewards;  // discrete backend: reward per terminal state
  double slope = 1.0;                 // gaussian backend: r(x) = slope * sum(x)
  WorkerOptions worker;
};

// Moves both ends of each bond symmetrically toward unit length in repeated
// forward/backward sweeps, then fixes the remaining error exactly by walking
// out from the middle residue.
std::vector<double> project_bonds(std::span<const double> xy, int iterations = 20,
                                  double bond_length = 1.0);

// Per-residue token distribution conditioned on local curvature, before temperature.
std::vector<std::array<double, kAlphabet.size()>> token_logits(std::span<const double> xy);

// Refinement pushes residues out to this distance from obstacle points.
inline constexpr double kExclusionRadius = 1.0;

// Projects bonds, moves the chain by a random rigid motion scaled by the proxy
// uncertainty, relaxes it out of the obstacles' exclusion discs (the binding
// target; bonds next to it may end slightly off length), then samples one
// token per residue. Throws std::invalid_argument
// for non-chain proxies or fewer than 3 residues.
RefinedPair refine(const DenoisedProxy& proxy, double temperature, StreamRng& rng,
                   std::span<const double> obstacles = {});

int net_charge(const std::string& tokens);
double reward_charge(const RefinedPair& pair, int q_star);

// Turn-angle classes: [40, 70] deg helix-like, |theta| <= 15 deg strand-like,
// anything else loop. Fractions over interior residues.
SsFractions classify_ss(std::span<const double> coords);
SsFractions sequence_ss_propensity(const std::string& tokens);
// 0.8 * geometric + 0.2 * sequence, per class.
SsFractions blended_ss(const RefinedPair& pair);
double score_ss(const SsFractions& fractions, const SecondaryStructureTargets& targets);
double reward_ss(const RefinedPair& pair, const SecondaryStructureTargets& targets);

// -dG with dG the truncated 12-6 energy between binder and target points.
double reward_binding(const RefinedPair& pair, std::span<const double> target_coords,
                      const simd::PairPotential& params = {});

double aggregate(std::span<const double> rewards, Aggregation aggregation);

struct EvalKey {
  std::uint64_t seed = 0;
  std::size_t particle = 0;
  int t = 0;
  std::string run_id = "run";
};

struct RewardEvaluation {
  double value = 0.0;
  std::vector<double> per_eval;
  // Sample standard deviation across evaluations (0 for a single one).
  double spread = 0.0;
  // Pair behind the reported value: first evaluation for mean, best for max.
  std::optional<RefinedPair> pair;
};

class RewardPipeline {
 public:
  explicit RewardPipeline(RewardPipelineSpec spec, std::shared_ptr<WorkerClient> worker = nullptr);

  const RewardPipelineSpec& spec() const { return spec_; }

  // Evaluation j of particle p at step t uses its own stream keyed by
  // (seed, p, t, j), so results do not depend on evaluation order.
  RewardEvaluation evaluate(const DenoisedProxy& proxy, const EvalKey& key) const;

  // One reward on a refined pair, in-process or through the worker.
  double score_pair(const RefinedPair& pair, const EvalKey& key, std::size_t eval_index) const;

 private:
  double score_point(const DenoisedProxy& proxy, const EvalKey& key) const;

  RewardPipelineSpec spec_;
  std::shared_ptr<WorkerClient> worker_;
};

double external_reward(const DenoisedProxy& proxy, WorkerClient& worker, const EvalKey& key,
                       std::size_t eval_index = 0, const RefinedPair* pair = nullptr);

// A 49-point horizontal target segment, x in [-6, 6] at y = -3.5.
std::vector<double> default_binding_target();

}  // namespace fks
