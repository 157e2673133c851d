#include <gtest/gtest.h>

#include <cmath>

#include "fksteer/potentials.hpp"
#include "fksteer/resampling.hpp"

namespace {

using namespace fks;

TEST(ScaleReward, DividesByTau) {
  EXPECT_EQ(scale_reward(5.0, make_potential_spec(PotentialKind::immediate, 10.0)), 0.5);
  EXPECT_EQ(scale_reward(0.0, make_potential_spec(PotentialKind::immediate, 3.0)), 0.0);
  EXPECT_EQ(scale_reward(-3.0, make_potential_spec(PotentialKind::immediate, 1.0)), -3.0);
}

TEST(LogPotential, Immediate) {
  RewardHistory h;
  h.record(10, 0.5);
  EXPECT_EQ(log_potential(h, make_potential_spec(PotentialKind::immediate, 1.0), 10), 0.5);
}

TEST(LogPotential, DifferenceCancelsEqualRewardsAndStartsAtZero) {
  const auto spec = make_potential_spec(PotentialKind::difference, 1.0);
  RewardHistory h;
  h.record(10, 1.5);
  EXPECT_EQ(h.previous(), 0.0);
  EXPECT_EQ(log_potential(h, spec, 10), 1.5);
  h.record(8, 1.5);
  EXPECT_EQ(log_potential(h, spec, 8), 0.0);
}

TEST(LogPotential, MaxAndSumOverLineage) {
  RewardHistory h;
  h.record(6, 2.0);
  h.record(4, 5.0);
  h.record(2, 3.0);
  EXPECT_EQ(log_potential(h, make_potential_spec(PotentialKind::max, 1.0), 2), 5.0);
  EXPECT_EQ(log_potential(h, make_potential_spec(PotentialKind::sum, 1.0), 2), 10.0);
}

TEST(LogPotential, RejectsEmptyHistoryAndStepMismatch) {
  RewardHistory h;
  const auto spec = make_potential_spec(PotentialKind::immediate, 1.0);
  EXPECT_THROW(log_potential(h, spec, 3), std::invalid_argument);
  h.record(4, 1.0);
  EXPECT_THROW(log_potential(h, spec, 3), std::invalid_argument);
  EXPECT_THROW(h.record(4, 2.0), std::invalid_argument);
}

TEST(TerminalCorrection, DefaultsOnlyForDifference) {
  EXPECT_TRUE(make_potential_spec(PotentialKind::difference, 1.0).terminal_correction);
  EXPECT_FALSE(make_potential_spec(PotentialKind::immediate, 1.0).terminal_correction);
  EXPECT_FALSE(make_potential_spec(PotentialKind::difference, 1.0, false).terminal_correction);
  EXPECT_TRUE(make_potential_spec(PotentialKind::max, 1.0, true).terminal_correction);
}

TEST(TerminalCorrection, ImmediateBoundaryValue) {
  const auto spec = make_potential_spec(PotentialKind::immediate, 1.0);
  RewardHistory h;
  for (int t : {4, 2}) {
    h.record(t, 0.5);
    h.apply(log_potential(h, spec, t));
  }
  h.record(0, 0.5);
  EXPECT_DOUBLE_EQ(terminal_log_correction(h, spec), -0.5);
}

TEST(TerminalCorrection, NoGuidedStepsGivesTerminalReward) {
  const auto spec = make_potential_spec(PotentialKind::immediate, 1.0);
  RewardHistory h;
  h.record(0, 0.7);
  EXPECT_EQ(terminal_log_correction(h, spec), 0.7);
}

TEST(TerminalCorrection, DifferenceTelescopes) {
  const auto spec = make_potential_spec(PotentialKind::difference, 1.0);
  RewardHistory h;
  const double rewards[] = {0.3, -1.2, 2.5, 0.9, 1.1};
  int t = 8;
  for (double r : rewards) {
    h.record(t, r);
    h.apply(log_potential(h, spec, t));
    t -= 2;
  }
  EXPECT_NEAR(h.applied(), rewards[4], 1e-12);
  // With step 0 included, the boundary potential has nothing left to add.
  RewardHistory g;
  g.record(2, 0.4);
  g.apply(log_potential(g, spec, 2));
  g.record(0, 1.3);
  const double last = log_potential(g, spec, 0);
  EXPECT_NEAR(terminal_log_correction(g, spec), last, 1e-12);
  g.apply(last);
  EXPECT_NEAR(g.applied(), 1.3, 1e-12);
}

// Adding a constant to every particle's reward at the onset step leaves the
// normalized weights unchanged for every kind.
TEST(Potentials, OnsetShiftInvariance) {
  const double rewards[] = {0.1, -2.0, 0.7, 3.3};
  for (auto kind : {PotentialKind::immediate, PotentialKind::difference, PotentialKind::max, PotentialKind::sum}) {
    const auto spec = make_potential_spec(kind, 1.0);
    std::vector<double> base, shifted;
    for (double r : rewards) {
      RewardHistory a, b;
      a.record(50, r);
      b.record(50, r + 1e3);
      base.push_back(log_potential(a, spec, 50));
      shifted.push_back(log_potential(b, spec, 50));
    }
    const auto wa = normalize_weights(base).weights;
    const auto wb = normalize_weights(shifted).weights;
    for (std::size_t i = 0; i < wa.size(); ++i) EXPECT_NEAR(wa[i], wb[i], 1e-12) << to_string(kind);
  }
}

TEST(Potentials, ParseAndPrint) {
  for (auto kind : {PotentialKind::immediate, PotentialKind::difference, PotentialKind::max, PotentialKind::sum})
    EXPECT_EQ(parse_potential_kind(to_string(kind)), kind);
}

}  // namespace
