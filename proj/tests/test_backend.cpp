#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "fksteer/backend.hpp"
#include "fksteer/error.hpp"

namespace {

using namespace fks;

std::vector<double> identity(std::size_t s) {
  std::vector<double> k(s * s, 0.0);
  for (std::size_t i = 0; i < s; ++i) k[i * s + i] = 1.0;
  return k;
}

double tv(const std::vector<double>& p, const std::vector<double>& q) {
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) d += std::abs(p[i] - q[i]);
  return 0.5 * d;
}

TEST(DiscreteBackend, PointMassNoise) {
  DiscreteChainBackend b({1.0, 0.0, 0.0}, {identity(3), identity(3)});
  for (std::uint64_t i = 0; i < 50; ++i) {
    StreamRng rng(i);
    const auto s = b.sample_noise(rng);
    EXPECT_EQ(s.symbol(), 0u);
    EXPECT_EQ(s.t, 2);
  }
}

TEST(DiscreteBackend, DeterministicRow) {
  auto k = identity(3);
  k[2 * 3 + 0] = 0.0;
  k[2 * 3 + 1] = 1.0;
  k[2 * 3 + 2] = 0.0;
  DiscreteChainBackend b({0.0, 0.0, 1.0}, {k});
  for (std::uint64_t i = 0; i < 50; ++i) {
    StreamRng rng(i);
    const BackendState in{std::size_t{2}, 1};
    const auto out = b.denoise_step(in, rng);
    EXPECT_EQ(out.symbol(), 1u);
    EXPECT_EQ(out.t, 0);
    EXPECT_EQ(in.symbol(), 2u);
  }
}

TEST(DiscreteBackend, RejectsTerminalDenoise) {
  auto b = DiscreteChainBackend::uniform(3, 2);
  StreamRng rng(0);
  EXPECT_THROW(b.denoise_step({std::size_t{0}, 0}, rng), std::invalid_argument);
}

TEST(DiscreteBackend, OneStepMarginalMatchesVectorMatrixProduct) {
  auto b = DiscreteChainBackend::random(3, 4, 11);
  const int t = 4;
  const auto k = b.kernel(t);
  const auto& pi = b.initial_law();
  std::vector<double> expected(3, 0.0);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) expected[j] += pi[i] * k[i * 3 + j];
  std::vector<double> counts(3, 0.0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    StreamRng r1(5, Purpose::noise, static_cast<std::uint64_t>(i), t);
    StreamRng r2(5, Purpose::denoise, static_cast<std::uint64_t>(i), t);
    const auto x = b.denoise_step(b.sample_noise(r1), r2);
    counts[x.symbol()] += 1.0 / n;
  }
  EXPECT_LT(tv(counts, expected), 0.01);
}

TEST(DiscreteBackend, PosteriorMatchesTrajectoryEnumeration) {
  auto b = DiscreteChainBackend::random(3, 4, 3);
  for (int t = 0; t <= 4; ++t) {
    for (std::size_t x = 0; x < 3; ++x) {
      // Sum over every continuation x_{t-1}, ..., x_0.
      std::vector<double> post(3, 0.0);
      std::vector<std::size_t> path(static_cast<std::size_t>(t) + 1, 0);
      const std::size_t total = static_cast<std::size_t>(std::pow(3, t));
      for (std::size_t code = 0; code < total; ++code) {
        std::size_t c = code;
        double p = 1.0;
        std::size_t prev = x;
        for (int s = t; s >= 1; --s) {
          const std::size_t next = c % 3;
          c /= 3;
          p *= b.kernel(s)[prev * 3 + next];
          prev = next;
        }
        post[prev] += p;
      }
      const auto proxy = b.predict_x0({x, t});
      ASSERT_EQ(proxy.kind, DenoisedProxy::Kind::posterior);
      for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(proxy.values[j], post[j], 1e-12);
    }
  }
}

TEST(DiscreteBackend, TerminalProxyIsThePointMass) {
  auto b = DiscreteChainBackend::random(4, 3, 1);
  const auto proxy = b.predict_x0({std::size_t{2}, 0});
  EXPECT_EQ(proxy.values, (std::vector<double>{0, 0, 1, 0}));
}

TEST(DiscreteBackend, ValidatesKernels) {
  auto bad = identity(2);
  bad[0] = 0.9;
  EXPECT_THROW(DiscreteChainBackend({0.5, 0.5}, {bad}), ConfigError);
  auto negative = identity(2);
  negative[0] = 1.5;
  negative[1] = -0.5;
  EXPECT_THROW(DiscreteChainBackend({0.5, 0.5}, {negative}), ConfigError);
  EXPECT_THROW(DiscreteChainBackend({0.5, 0.6}, {identity(2)}), ConfigError);
}

TEST(DiscreteBackend, KernelCsvRoundTripAndCorruption) {
  const auto dir = std::filesystem::temp_directory_path() / "fksteer_kernel_test";
  std::filesystem::create_directories(dir);
  auto b = DiscreteChainBackend::random(3, 2, 9);
  {
    std::ofstream out(dir / "k.csv");
    out << "t,from,p0,p1,p2\n";
    out.precision(17);
    for (int t = 1; t <= 2; ++t)
      for (std::size_t i = 0; i < 3; ++i)
        out << t << ',' << i << ',' << b.kernel(t)[i * 3] << ',' << b.kernel(t)[i * 3 + 1] << ','
            << b.kernel(t)[i * 3 + 2] << '\n';
  }
  const auto loaded = load_kernel_csv(dir / "k.csv", 3, 2);
  ASSERT_EQ(loaded.size(), 2u);
  for (int t = 1; t <= 2; ++t)
    for (std::size_t i = 0; i < 9; ++i) EXPECT_DOUBLE_EQ(loaded[t - 1][i], b.kernel(t)[i]);
  {
    std::ofstream out(dir / "bad.csv");
    out << "1,0,0.5,0.4,0.0\n1,1,0,1,0\n1,2,0,0,1\n";
  }
  const auto corrupt = load_kernel_csv(dir / "bad.csv", 3, 1);
  EXPECT_THROW(DiscreteChainBackend({1, 0, 0}, corrupt), ConfigError);
  EXPECT_THROW(load_kernel_csv(dir / "missing.csv", 3, 1), ConfigError);
}

TEST(GaussianBackend, NoiseIsStandardNormal) {
  GaussianChainBackend b(5, 0.9);
  double m = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    StreamRng rng(3, Purpose::noise, static_cast<std::uint64_t>(i), 5);
    m += b.sample_noise(rng).values()[0];
  }
  m /= n;
  EXPECT_GE(m, -0.02);
  EXPECT_LE(m, 0.02);
}

TEST(GaussianBackend, RhoOneIsFrozen) {
  GaussianChainBackend b(3, 1.0, 2);
  StreamRng rng(4);
  const BackendState s{std::vector<double>{0.3, -1.2}, 3};
  const auto next = b.denoise_step(s, rng);
  EXPECT_EQ(next.values(), s.values());
  EXPECT_EQ(next.t, 2);
}

TEST(GaussianBackend, ProxyIsRhoPowerT) {
  GaussianChainBackend b(10, 0.9);
  const auto p = b.predict_x0({std::vector<double>{1.0}, 2});
  EXPECT_NEAR(p.values[0], 0.81, 1e-15);
  const auto p0 = b.predict_x0({std::vector<double>{1.7}, 0});
  EXPECT_EQ(p0.values[0], 1.7);
}

TEST(ChainMolBackend, InitialStateIsIidNormalCoordinates) {
  ChainMolParams params;
  ChainMolBackend b(params);
  StreamRng rng(0);
  const auto s = b.sample_noise(rng);
  EXPECT_EQ(s.values().size(), 30u);
  EXPECT_EQ(s.t, params.steps);
  double m = 0.0, v = 0.0;
  const int n = 2000;
  for (int i = 0; i < n; ++i) {
    StreamRng r(1, Purpose::noise, static_cast<std::uint64_t>(i), params.steps);
    const auto state = b.sample_noise(r);
    for (double x : state.values()) {
      m += x;
      v += x * x;
    }
  }
  m /= n * 30.0;
  v /= n * 30.0;
  EXPECT_NEAR(m, 0.0, 0.02);
  EXPECT_NEAR(v, 1.0, 0.03);
}

TEST(ChainMolBackend, GradientMatchesFiniteDifferences) {
  ChainMolBackend b(ChainMolParams{});
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    StreamRng rng(seed);
    auto x = b.sample_noise(rng).values();
    std::vector<double> g(x.size());
    b.energy_gradient(x, g);
    for (std::size_t i = 0; i < x.size(); ++i) {
      auto xp = x, xm = x;
      xp[i] += 1e-6;
      xm[i] -= 1e-6;
      const double fd = (b.energy(xp) - b.energy(xm)) / 2e-6;
      EXPECT_NEAR(g[i], fd, 1e-5 * (1.0 + std::abs(fd)));
    }
  }
}

TEST(ChainMolBackend, ProxyIsDriftRolloutAndIdentityAtZero) {
  ChainMolBackend b(ChainMolParams{});
  StreamRng rng(2);
  const auto s = b.sample_noise(rng);
  const auto p = b.predict_x0(s);
  EXPECT_EQ(p.kind, DenoisedProxy::Kind::chain);
  EXPECT_GT(p.uncertainty, 0.0);
  EXPECT_LT(b.energy(p.values), b.energy(s.values()));
  EXPECT_EQ(b.predict_x0(s), p);

  const BackendState terminal{s.values(), 0};
  const auto p0 = b.predict_x0(terminal);
  EXPECT_EQ(p0.values, s.values());
  EXPECT_EQ(p0.uncertainty, 0.0);
}

TEST(ChainMolBackend, SchedulesAreLinearAndGeometric) {
  ChainMolParams params;
  ChainMolBackend b(params);
  EXPECT_NEAR(b.drift(params.steps), params.eta_start, 1e-15);
  EXPECT_NEAR(b.drift(1), params.eta_end, 1e-15);
  EXPECT_NEAR(b.noise(params.steps), params.sigma_start, 1e-15);
  EXPECT_NEAR(b.noise(1), params.sigma_end, 1e-15);
  const double ratio = b.noise(10) / b.noise(11);
  EXPECT_NEAR(b.noise(20) / b.noise(21), ratio, 1e-12);
  EXPECT_NEAR(b.drift(10) - b.drift(11), b.drift(20) - b.drift(21), 1e-12);
}

TEST(ChainMolBackend, TurnAnglesOfRegularShapes) {
  std::vector<double> straight;
  for (int i = 0; i < 5; ++i) {
    straight.push_back(i);
    straight.push_back(0.0);
  }
  for (double a : turn_angles(straight)) EXPECT_NEAR(a, 0.0, 1e-15);
  std::vector<double> arc{0.0, 0.0};
  double heading = 0.0;
  for (int i = 0; i < 5; ++i) {
    arc.push_back(arc[arc.size() - 2] + std::cos(heading));
    arc.push_back(arc[arc.size() - 2] + std::sin(heading));
    heading += 55.0 * std::numbers::pi / 180.0;
  }
  for (double a : turn_angles(arc)) EXPECT_NEAR(a * 180.0 / std::numbers::pi, 55.0, 1e-9);
}

}  // namespace
