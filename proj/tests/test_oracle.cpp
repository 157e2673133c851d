#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "fksteer/oracle.hpp"

namespace {

using namespace fks;

std::vector<double> sum_to_one(std::vector<double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  for (double& x : v) x /= s;
  return v;
}

// Sums p(path) exp(lambda r(x0)) over every path x_T .. x_0.
std::vector<double> tilted_by_path_enumeration(const DiscreteChainBackend& b, const std::vector<double>& r,
                                               double lambda) {
  const std::size_t S = b.states();
  const int T = b.steps();
  std::vector<double> out(S, 0.0);
  std::vector<std::size_t> path(static_cast<std::size_t>(T) + 1, 0);
  const auto total = static_cast<std::size_t>(std::pow(S, T + 1));
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    for (auto& x : path) {
      x = c % S;
      c /= S;
    }
    // path[k] is x_{T-k}.
    double p = b.initial_law()[path[0]];
    for (int k = 0; k < T; ++k) p *= b.kernel(T - k)[path[k] * S + path[k + 1]];
    out[path.back()] += p * std::exp(lambda * r[path.back()]);
  }
  return sum_to_one(out);
}

TEST(ExactDiscrete, MatchesPathEnumeration) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto b = DiscreteChainBackend::random(3, 4, seed, 0.7);
    const std::vector<double> r{0.3, -1.0, 2.0};
    const auto exact = exact_tilted_discrete(b, r, 0.8);
    const auto brute = tilted_by_path_enumeration(b, r, 0.8);
    for (std::size_t s = 0; s < 3; ++s) EXPECT_NEAR(exact.probabilities[s], brute[s], 1e-12);
  }
}

TEST(ExactDiscrete, Examples) {
  const auto b = DiscreteChainBackend::random(4, 3, 1);
  const auto p0 = b.terminal_marginal();
  const auto untilted = exact_tilted_discrete(b, std::vector<double>{1, 5, 2, 3}, 0.0);
  for (std::size_t s = 0; s < 4; ++s) EXPECT_NEAR(untilted.probabilities[s], p0[s], 1e-15);

  const auto u = DiscreteChainBackend::uniform(2, 3);
  const auto t = exact_tilted_discrete(u, std::vector<double>{0.0, std::log(2.0)}, 1.0);
  EXPECT_NEAR(t.probabilities[0], 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(t.probabilities[1], 2.0 / 3.0, 1e-12);

  const DiscreteChainBackend point({0.0, 1.0, 0.0}, {{1, 0, 0, 0, 1, 0, 0, 0, 1}});
  const auto pm = exact_tilted_discrete(point, std::vector<double>{9, -4, 7}, 3.0);
  EXPECT_EQ(pm.probabilities, (std::vector<double>{0.0, 1.0, 0.0}));

  EXPECT_THROW(exact_tilted_discrete(b, std::vector<double>{1, 2}, 1.0), std::invalid_argument);
}

TEST(ExactDiscrete, ShiftInvariantAndRaisesExpectedReward) {
  const auto b = DiscreteChainBackend::random(5, 6, 9);
  const std::vector<double> r{0.0, 1.0, -2.0, 0.5, 3.0};
  std::vector<double> shifted = r;
  for (double& x : shifted) x += 123.0;
  const auto a = exact_tilted_discrete(b, r, 0.7);
  const auto c = exact_tilted_discrete(b, shifted, 0.7);
  double sum = 0.0;
  for (std::size_t s = 0; s < 5; ++s) {
    EXPECT_NEAR(a.probabilities[s], c.probabilities[s], 1e-12);
    sum += a.probabilities[s];
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
  const auto p0 = b.terminal_marginal();
  for (double lambda : {0.1, 1.0, 4.0}) {
    const auto tilted = exact_tilted_discrete(b, r, lambda);
    double before = 0.0, after = 0.0;
    for (std::size_t s = 0; s < 5; ++s) {
      before += p0[s] * r[s];
      after += tilted.probabilities[s] * r[s];
    }
    EXPECT_GT(after, before);
  }
}

TEST(ExactGaussian, Examples) {
  const auto g = exact_tilted_gaussian(0.0, 1.0, 1.0, 1.0);
  EXPECT_EQ(g.kind, TiltedMarginal::Kind::gaussian);
  EXPECT_EQ(g.mean, 1.0);
  EXPECT_EQ(g.variance, 1.0);
  EXPECT_EQ(exact_tilted_gaussian(2.0, 3.0, 0.0, 1.0).mean, 2.0);
  EXPECT_EQ(exact_tilted_gaussian(2.0, 3.0, 1.5, 0.0).mean, 2.0);
  EXPECT_EQ(exact_tilted_gaussian(2.0, 3.0, 0.5, 2.0).mean, 5.0);
}

TEST(ExactGaussian, MatchesNumericalQuadrature) {
  const double m = 0.4, v = 2.0, a = -0.7, lambda = 1.3;
  double z = 0.0, m1 = 0.0, m2 = 0.0;
  for (double x = -30.0; x <= 30.0; x += 1e-3) {
    const double d = std::exp(-(x - m) * (x - m) / (2 * v) + lambda * a * x);
    z += d;
    m1 += d * x;
    m2 += d * x * x;
  }
  const auto g = exact_tilted_gaussian(m, v, a, lambda);
  EXPECT_NEAR(g.mean, m1 / z, 1e-9);
  EXPECT_NEAR(g.variance, m2 / z - (m1 / z) * (m1 / z), 1e-8);
}

std::pair<std::vector<double>, std::vector<std::size_t>> unguided_samples(const DiscreteChainBackend& b,
                                                                          const std::vector<double>& r,
                                                                          std::size_t n, std::uint64_t seed) {
  std::vector<double> rewards;
  std::vector<std::size_t> cats;
  for (std::size_t i = 0; i < n; ++i) {
    StreamRng rng(seed, Purpose::scenario, i, 0);
    auto x = b.sample_noise(rng);
    while (x.t > 0) x = b.denoise_step(x, rng);
    cats.push_back(x.symbol());
    rewards.push_back(r[x.symbol()]);
  }
  return {rewards, cats};
}

TEST(Snis, Examples) {
  const std::vector<double> r{1.0, 2.0, 4.0, 1.0};
  const std::vector<std::size_t> cats{0, 1, 2, 0};
  SnisOptions options;
  options.min_samples = 1;
  const auto plain = snis_estimate(r, cats, 3, 0.0, options);
  EXPECT_NEAR(plain.mean_reward.estimate, 2.0, 1e-12);
  EXPECT_NEAR(plain.marginal.probabilities[0], 0.5, 1e-12);

  const std::vector<double> flat(4, 3.0);
  const auto a = snis_estimate(flat, cats, 3, 0.0, options);
  const auto b = snis_estimate(flat, cats, 3, 5.0, options);
  EXPECT_EQ(a.marginal.probabilities, b.marginal.probabilities);
  EXPECT_NEAR(b.ess, 4.0, 1e-12);
}

TEST(Snis, FlagsSmallOrDegenerateSamples) {
  const std::vector<double> r{0.0, 0.0, 50.0};
  const auto e = snis_estimate(r, {}, 0, 1.0);
  EXPECT_FALSE(e.reliable);
  EXPECT_FALSE(e.warnings.empty());
}

TEST(Snis, AgreesWithExactOracle) {
  const auto b = DiscreteChainBackend::random(5, 8, 3);
  const std::vector<double> r{0.0, 0.5, 1.0, 1.5, 2.0};
  const auto exact = exact_tilted_discrete(b, r, 1.0);
  const auto [rewards, cats] = unguided_samples(b, r, 100000, 1);
  const auto est = snis_estimate(rewards, cats, 5, 1.0);
  EXPECT_TRUE(est.reliable);
  EXPECT_LT(total_variation(est.marginal.probabilities, exact.probabilities), 0.03);
  double exact_mean = 0.0;
  for (std::size_t s = 0; s < 5; ++s) exact_mean += exact.probabilities[s] * r[s];
  EXPECT_LE(est.mean_reward.lo, exact_mean + 0.01);
  EXPECT_GE(est.mean_reward.hi, exact_mean - 0.01);
}

TEST(Snis, ErrorShrinksWithSampleCount) {
  const auto b = DiscreteChainBackend::random(5, 8, 3);
  const std::vector<double> r{0.0, 0.5, 1.0, 1.5, 2.0};
  const auto exact = exact_tilted_discrete(b, r, 1.0);
  SnisOptions options;
  options.bootstrap = 0;
  options.min_samples = 1;
  double mean_small = 0.0, mean_large = 0.0;
  const int reps = 20;
  for (int rep = 0; rep < reps; ++rep) {
    const auto [rs, cs] = unguided_samples(b, r, 1000, 100 + rep);
    const auto [rl, cl] = unguided_samples(b, r, 16000, 200 + rep);
    mean_small += total_variation(snis_estimate(rs, cs, 5, 1.0, options).marginal.probabilities,
                                  exact.probabilities) / reps;
    mean_large += total_variation(snis_estimate(rl, cl, 5, 1.0, options).marginal.probabilities,
                                  exact.probabilities) / reps;
  }
  // Two quadruplings: about a fourfold drop.
  EXPECT_LT(mean_large, mean_small / 2.5);
  EXPECT_GT(mean_large, mean_small / 6.0);
}

TEST(Oracle, TotalVariationAndEmpirical) {
  EXPECT_NEAR(total_variation(std::vector<double>{0.5, 0.5}, std::vector<double>{1.0, 0.0}), 0.5, 1e-15);
  EXPECT_THROW(total_variation(std::vector<double>{1.0}, std::vector<double>{0.5, 0.5}), std::invalid_argument);
  const auto e = empirical_distribution(std::vector<std::size_t>{0, 2, 2, 2}, 3);
  EXPECT_EQ(e, (std::vector<double>{0.25, 0.0, 0.75}));
}

TEST(Oracle, WritesCsv) {
  const auto path = std::filesystem::temp_directory_path() / "fksteer_oracle.csv";
  TiltedMarginal m;
  m.probabilities = {0.25, 0.75};
  write_marginal_csv(path, m, std::vector<double>{0.3, 0.7});
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "state,exact,empirical");
  EXPECT_EQ(row.substr(0, 2), "0,");
}

}  // namespace
