#include "fksteer/rewards.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "fksteer/error.hpp"

namespace fks {
namespace {

constexpr double kRad2Deg = 180.0 / std::numbers::pi;
constexpr double kGeometryShare = 0.8;
constexpr std::size_t kTokens = kAlphabet.size();

// Token preferences per curvature class, columns in kAlphabet order (K R D E G A V S).
constexpr std::array<std::array<double, kTokens>, 3> kClassLogits{{
    {1.00, 0.90, 0.30, 0.60, 0.00, 0.95, 0.20, 0.30},  // helix
    {0.30, 0.35, 0.90, 0.85, 0.10, 0.20, 1.00, 0.50},  // strand
    {0.60, 0.50, 0.70, 0.40, 1.00, 0.30, 0.20, 0.90},  // loop
}};

// Class propensity of each token as (helix, strand, loop).
constexpr std::array<std::array<double, 3>, kTokens> kPropensity{{
    {0.5, 0.2, 0.3},  // K
    {0.5, 0.2, 0.3},  // R
    {0.2, 0.3, 0.5},  // D
    {0.6, 0.2, 0.2},  // E
    {0.1, 0.2, 0.7},  // G
    {0.7, 0.1, 0.2},  // A
    {0.1, 0.7, 0.2},  // V
    {0.2, 0.3, 0.5},  // S
}};

int token_index(char c) {
  for (std::size_t i = 0; i < kTokens; ++i) {
    if (kAlphabet[i] == c) return static_cast<int>(i);
  }
  return -1;
}

std::array<double, 3> curvature_membership(double theta_deg) {
  const double h = (theta_deg - 55.0) / 12.0;
  const double s = theta_deg / 10.0;
  std::array<double, 3> score{-0.5 * h * h, -0.5 * s * s, -2.0};
  const double top = *std::max_element(score.begin(), score.end());
  double norm = 0.0;
  for (auto& v : score) {
    v = std::exp(v - top);
    norm += v;
  }
  for (auto& v : score) v /= norm;
  return score;
}


// Noise still to come moves the chain as a rigid body; the drift restores its
// shape. Per-residue sd u gives a centroid shift of sd u / sqrt(L) and a
// rotation of sd u / sqrt(sum |r_i - c|^2).
void rigid_jitter(std::vector<double>& xy, double u, StreamRng& rng) {
  const std::size_t n = xy.size() / 2;
  double cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cx += xy[2 * i];
    cy += xy[2 * i + 1];
  }
  cx /= static_cast<double>(n);
  cy /= static_cast<double>(n);
  double inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    inertia += (xy[2 * i] - cx) * (xy[2 * i] - cx) + (xy[2 * i + 1] - cy) * (xy[2 * i + 1] - cy);
  }
  const double shift_sd = u / std::sqrt(static_cast<double>(n));
  const double dx = shift_sd * rng.normal();
  const double dy = shift_sd * rng.normal();
  const double angle = inertia > 0.0 ? u / std::sqrt(inertia) * rng.normal() : 0.0;
  const double c = std::cos(angle), s = std::sin(angle);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = xy[2 * i] - cx, y = xy[2 * i + 1] - cy;
    xy[2 * i] = cx + c * x - s * y + dx;
    xy[2 * i + 1] = cy + s * x + c * y + dy;
  }
}

// Moves both ends of each bond symmetrically toward the target length;
// alternating forward/backward sweeps.
void bond_sweeps(std::vector<double>& out, int iterations, double bond_length) {
  const std::size_t n = out.size() / 2;
  auto fix = [&](std::size_t i) {
    const double dx = out[2 * i + 2] - out[2 * i];
    const double dy = out[2 * i + 3] - out[2 * i + 1];
    const double len = std::hypot(dx, dy);
    if (len < 1e-12) return;
    const double c = 0.5 * (len - bond_length) / len;
    out[2 * i] += c * dx;
    out[2 * i + 1] += c * dy;
    out[2 * i + 2] -= c * dx;
    out[2 * i + 3] -= c * dy;
  };
  for (int it = 0; it < iterations; ++it) {
    if (it % 2 == 0) {
      for (std::size_t i = 0; i + 1 < n; ++i) fix(i);
    } else {
      for (std::size_t i = n - 1; i-- > 0;) fix(i);
    }
  }
}

// Alternates pushing residues out of the exclusion disc of every obstacle
// point with local bond sweeps. The last pass is a push, so no residue ends
// inside a disc; bonds near the obstacles may stay slightly off length.
void relax_against(std::vector<double>& xy, std::span<const double> obstacles, double radius) {
  const std::size_t n = xy.size() / 2, m = obstacles.size() / 2;
  for (int round = 0; round < 10; ++round) {
    bool moved = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        const double dx = xy[2 * i] - obstacles[2 * j], dy = xy[2 * i + 1] - obstacles[2 * j + 1];
        const double d = std::hypot(dx, dy);
        if (d >= radius) continue;
        moved = true;
        const double ux = d > 0.0 ? dx / d : 0.0, uy = d > 0.0 ? dy / d : 1.0;
        xy[2 * i] = obstacles[2 * j] + radius * ux;
        xy[2 * i + 1] = obstacles[2 * j + 1] + radius * uy;
      }
    }
    if (!moved) return;
    if (round < 9) bond_sweeps(xy, 2, 1.0);
  }
}

}  // namespace

std::string to_string(RewardKind kind) {
  switch (kind) {
    case RewardKind::charge:
      return "charge";
    case RewardKind::secondary_structure:
      return "secondary_structure";
    case RewardKind::binding:
      return "binding";
    case RewardKind::external:
      return "external";
    case RewardKind::state_table:
      return "state_table";
    case RewardKind::linear:
      return "linear";
  }
  return "unknown";
}

RewardKind parse_reward_kind(const std::string& text) {
  if (text == "charge") return RewardKind::charge;
  if (text == "secondary_structure" || text == "ss") return RewardKind::secondary_structure;
  if (text == "binding") return RewardKind::binding;
  if (text == "external") return RewardKind::external;
  if (text == "state_table") return RewardKind::state_table;
  if (text == "linear") return RewardKind::linear;
  throw ConfigError("unknown reward '" + text +
                    "' (expected charge|secondary_structure|binding|external|state_table|linear)");
}

std::string to_string(Aggregation aggregation) {
  return aggregation == Aggregation::mean ? "mean" : "max";
}

Aggregation parse_aggregation(const std::string& text) {
  if (text == "mean") return Aggregation::mean;
  if (text == "max") return Aggregation::max;
  throw ConfigError("unknown aggregation '" + text + "' (expected mean|max)");
}

SsClass parse_ss_class(const std::string& text) {
  if (text == "helix" || text == "alpha") return SsClass::helix;
  if (text == "strand" || text == "beta") return SsClass::strand;
  if (text == "loop") return SsClass::loop;
  throw ConfigError("unknown secondary-structure class '" + text + "' (expected helix|strand|loop)");
}

SecondaryStructureTargets SecondaryStructureTargets::steer_toward(SsClass target) {
  SecondaryStructureTargets t{0.0, 0.0, 0.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0};
  switch (target) {
    case SsClass::helix:
      t.alpha_star = 1.0;
      t.w_alpha = 4.0 / 6.0;
      break;
    case SsClass::strand:
      t.beta_star = 1.0;
      t.w_beta = 4.0 / 6.0;
      break;
    case SsClass::loop:
      t.ell_star = 1.0;
      t.w_ell = 4.0 / 6.0;
      break;
  }
  return t;
}

SecondaryStructureTargets SecondaryStructureTargets::normalized() const {
  for (double f : {alpha_star, beta_star, ell_star}) {
    if (f < 0.0 || f > 1.0) throw ConfigError("secondary-structure targets must lie in [0, 1]");
  }
  if (std::abs(alpha_star + beta_star + ell_star - 1.0) > 1e-9) {
    throw ConfigError("secondary-structure targets must sum to 1");
  }
  const double total = w_alpha + w_beta + w_ell;
  if (w_alpha < 0.0 || w_beta < 0.0 || w_ell < 0.0 || !(total > 0.0)) {
    throw ConfigError("secondary-structure weights must be non-negative with a positive sum");
  }
  SecondaryStructureTargets out = *this;
  out.w_alpha /= total;
  out.w_beta /= total;
  out.w_ell /= total;
  return out;
}

std::vector<double> project_bonds(std::span<const double> xy, int iterations, double bond_length) {
  std::vector<double> out(xy.begin(), xy.end());
  const std::size_t n = out.size() / 2;
  if (n < 2) return out;
  bond_sweeps(out, iterations, bond_length);
  // Sweeps converge slowly on badly stretched chains. Finish by walking out
  // from the middle residue, setting each bond to the exact length.
  auto place = [&](std::size_t from, std::size_t to) {
    const double dx = out[2 * to] - out[2 * from];
    const double dy = out[2 * to + 1] - out[2 * from + 1];
    const double len = std::hypot(dx, dy);
    if (len < 1e-12) {
      out[2 * to] = out[2 * from] + bond_length;
      out[2 * to + 1] = out[2 * from + 1];
      return;
    }
    out[2 * to] = out[2 * from] + bond_length * dx / len;
    out[2 * to + 1] = out[2 * from + 1] + bond_length * dy / len;
  };
  const std::size_t mid = n / 2;
  for (std::size_t i = mid; i + 1 < n; ++i) place(i, i + 1);
  for (std::size_t i = mid; i > 0; --i) place(i, i - 1);
  return out;
}

std::vector<std::array<double, kTokens>> token_logits(std::span<const double> xy) {
  const auto angles = turn_angles(xy);
  const std::size_t n = xy.size() / 2;
  std::vector<std::array<double, kTokens>> logits(n);
  for (std::size_t i = 0; i < n; ++i) {
    // End residues borrow the curvature of their nearest interior neighbour.
    const std::size_t a = std::clamp<std::size_t>(i, 1, n - 2) - 1;
    const auto member = curvature_membership(angles[a] * kRad2Deg);
    for (std::size_t k = 0; k < kTokens; ++k) {
      double v = 0.0;
      for (std::size_t c = 0; c < 3; ++c) v += member[c] * kClassLogits[c][k];
      logits[i][k] = v;
    }
  }
  return logits;
}

RefinedPair refine(const DenoisedProxy& proxy, double temperature, StreamRng& rng,
                   std::span<const double> obstacles) {
  if (proxy.kind != DenoisedProxy::Kind::chain) {
    throw std::invalid_argument("refine needs a chain proxy");
  }
  if (proxy.values.size() < 6) throw std::invalid_argument("refine needs at least 3 residues");
  if (!(temperature > 0.0)) throw std::invalid_argument("refiner temperature must be positive");

  RefinedPair pair;
  pair.coords = project_bonds(proxy.values);
  if (proxy.uncertainty > 0.0) rigid_jitter(pair.coords, proxy.uncertainty, rng);
  if (!obstacles.empty()) relax_against(pair.coords, obstacles, kExclusionRadius);
  const auto logits = token_logits(pair.coords);
  pair.tokens.reserve(logits.size());
  std::array<double, kTokens> prob{};
  for (const auto& row : logits) {
    const double top = *std::max_element(row.begin(), row.end());
    double norm = 0.0;
    for (std::size_t k = 0; k < kTokens; ++k) {
      prob[k] = std::exp((row[k] - top) / temperature);
      norm += prob[k];
    }
    const double u = rng.uniform() * norm;
    double cumulative = 0.0;
    std::size_t pick = kTokens - 1;
    for (std::size_t k = 0; k < kTokens; ++k) {
      cumulative += prob[k];
      if (u < cumulative) {
        pick = k;
        break;
      }
    }
    pair.tokens.push_back(kAlphabet[pick]);
  }
  return pair;
}

int net_charge(const std::string& tokens) {
  int q = 0;
  for (char c : tokens) {
    switch (c) {
      case 'K':
      case 'R':
        ++q;
        break;
      case 'D':
      case 'E':
        --q;
        break;
      default:
        break;
    }
  }
  return q;
}

double reward_charge(const RefinedPair& pair, int q_star) {
  return -std::abs(static_cast<double>(net_charge(pair.tokens) - q_star));
}

SsFractions classify_ss(std::span<const double> coords) {
  const auto angles = turn_angles(coords);
  if (angles.empty()) throw std::invalid_argument("classify_ss needs at least 3 residues");
  std::size_t helix = 0;
  std::size_t strand = 0;
  for (double a : angles) {
    const double deg = a * kRad2Deg;
    if (deg >= 40.0 && deg <= 70.0) {
      ++helix;
    } else if (std::abs(deg) <= 15.0) {
      ++strand;
    }
  }
  const auto n = static_cast<double>(angles.size());
  const std::size_t loop = angles.size() - helix - strand;
  return {static_cast<double>(helix) / n, static_cast<double>(strand) / n,
          static_cast<double>(loop) / n};
}

SsFractions sequence_ss_propensity(const std::string& tokens) {
  if (tokens.empty()) return {0.0, 0.0, 1.0};
  std::array<double, 3> acc{};
  for (char c : tokens) {
    const int k = token_index(c);
    if (k < 0) throw std::invalid_argument(std::string("unknown token '") + c + "'");
    for (std::size_t j = 0; j < 3; ++j) acc[j] += kPropensity[static_cast<std::size_t>(k)][j];
  }
  const auto n = static_cast<double>(tokens.size());
  return {acc[0] / n, acc[1] / n, acc[2] / n};
}

SsFractions blended_ss(const RefinedPair& pair) {
  const auto g = classify_ss(pair.coords);
  const auto s = sequence_ss_propensity(pair.tokens);
  const double k = kGeometryShare;
  return {k * g.alpha + (1.0 - k) * s.alpha, k * g.beta + (1.0 - k) * s.beta,
          k * g.ell + (1.0 - k) * s.ell};
}

double score_ss(const SsFractions& f, const SecondaryStructureTargets& t) {
  return t.w_alpha * (1.0 - std::abs(f.alpha - t.alpha_star)) +
         t.w_beta * (1.0 - std::abs(f.beta - t.beta_star)) +
         t.w_ell * (1.0 - std::abs(f.ell - t.ell_star));
}

double reward_ss(const RefinedPair& pair, const SecondaryStructureTargets& targets) {
  return score_ss(blended_ss(pair), targets);
}

double reward_binding(const RefinedPair& pair, std::span<const double> target_coords,
                      const simd::PairPotential& params) {
  return -simd::active().pair_energy(pair.coords, target_coords, params);
}

double aggregate(std::span<const double> rewards, Aggregation aggregation) {
  if (rewards.empty()) throw std::invalid_argument("aggregate: no rewards");
  if (aggregation == Aggregation::max) return *std::max_element(rewards.begin(), rewards.end());
  return std::accumulate(rewards.begin(), rewards.end(), 0.0) / static_cast<double>(rewards.size());
}

RewardPipeline::RewardPipeline(RewardPipelineSpec spec, std::shared_ptr<WorkerClient> worker)
    : spec_(std::move(spec)), worker_(std::move(worker)) {
  if (spec_.n_evals < 1) throw ConfigError("n_evals must be >= 1");
  if (!(spec_.refiner_temperature > 0.0)) throw ConfigError("refiner_temperature must be positive");
  if (spec_.kind == RewardKind::external && !worker_) {
    throw ConfigError("external reward needs a worker");
  }
  if (spec_.kind == RewardKind::secondary_structure) spec_.ss_targets = spec_.ss_targets.normalized();
}

double RewardPipeline::score_pair(const RefinedPair& pair, const EvalKey& key,
                                  std::size_t eval_index) const {
  switch (spec_.kind) {
    case RewardKind::charge:
      return reward_charge(pair, spec_.q_star);
    case RewardKind::secondary_structure:
      return reward_ss(pair, spec_.ss_targets);
    case RewardKind::binding:
      return reward_binding(pair, spec_.target_coords, spec_.pair_potential);
    case RewardKind::external: {
      WorkerRequest req{key.run_id, key.particle, key.t, eval_index, {pair.coords, pair.tokens, {}}};
      return worker_->request(req);
    }
    case RewardKind::state_table:
    case RewardKind::linear:
      break;
  }
  throw std::invalid_argument(to_string(spec_.kind) + " reward does not apply to refined chains");
}

double RewardPipeline::score_point(const DenoisedProxy& proxy, const EvalKey& key) const {
  switch (spec_.kind) {
    case RewardKind::state_table: {
      if (proxy.kind != DenoisedProxy::Kind::posterior ||
          proxy.values.size() != spec_.state_rewards.size()) {
        throw std::invalid_argument("state_table reward needs a posterior over " +
                                    std::to_string(spec_.state_rewards.size()) + " states");
      }
      double expectation = 0.0;
      for (std::size_t i = 0; i < proxy.values.size(); ++i) {
        if (proxy.values[i] != 0.0) expectation += proxy.values[i] * spec_.state_rewards[i];
      }
      return expectation;
    }
    case RewardKind::linear:
      return spec_.slope * std::accumulate(proxy.values.begin(), proxy.values.end(), 0.0);
    case RewardKind::external:
      return external_reward(proxy, *worker_, key);
    default:
      break;
  }
  throw std::invalid_argument(to_string(spec_.kind) + " reward needs a chain proxy");
}

RewardEvaluation RewardPipeline::evaluate(const DenoisedProxy& proxy, const EvalKey& key) const {
  RewardEvaluation result;
  if (proxy.kind != DenoisedProxy::Kind::chain) {
    result.value = score_point(proxy, key);
    result.per_eval = {result.value};
    return result;
  }

  std::vector<RefinedPair> pairs;
  pairs.reserve(spec_.n_evals);
  result.per_eval.reserve(spec_.n_evals);
  for (std::size_t j = 0; j < spec_.n_evals; ++j) {
    StreamRng rng(key.seed, Purpose::reward, key.particle, key.t, j);
    pairs.push_back(refine(proxy, spec_.refiner_temperature, rng,
                           spec_.kind == RewardKind::binding ? std::span<const double>(spec_.target_coords)
                                                             : std::span<const double>()));
    result.per_eval.push_back(score_pair(pairs.back(), key, j));
  }
  result.value = aggregate(result.per_eval, spec_.aggregation);

  std::size_t shown = 0;
  if (spec_.aggregation == Aggregation::max) {
    shown = static_cast<std::size_t>(
        std::max_element(result.per_eval.begin(), result.per_eval.end()) - result.per_eval.begin());
  }
  result.pair = std::move(pairs[shown]);

  if (result.per_eval.size() > 1) {
    const double mean = aggregate(result.per_eval, Aggregation::mean);
    double ss = 0.0;
    for (double r : result.per_eval) ss += (r - mean) * (r - mean);
    result.spread = std::sqrt(ss / static_cast<double>(result.per_eval.size() - 1));
  }
  return result;
}

double external_reward(const DenoisedProxy& proxy, WorkerClient& worker, const EvalKey& key,
                       std::size_t eval_index, const RefinedPair* pair) {
  WorkerRequest req;
  req.run_id = key.run_id;
  req.particle_id = key.particle;
  req.t = key.t;
  req.eval_index = eval_index;
  if (pair) {
    req.payload.coords = pair->coords;
    req.payload.tokens = pair->tokens;
  } else {
    req.payload.state = proxy.values;
  }
  return worker.request(req);
}

std::vector<double> default_binding_target() {
  std::vector<double> xy;
  for (int i = -24; i <= 24; ++i) {
    xy.push_back(0.25 * i);
    xy.push_back(-3.5);
  }
  return xy;
}

}  // namespace fks
