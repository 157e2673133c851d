#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "fksteer/engine.hpp"
#include "fksteer/reporting.hpp"

namespace {

using namespace fks;
namespace fs = std::filesystem;

RunConfig small_chain() {
  auto c = sweep_defaults();
  c.steps = c.chain.steps = c.t_start = 10;
  c.n_particles = 6;
  return c;
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

TEST(Diversity, Examples) {
  EXPECT_EQ(sequence_diversity({"KKDD", "KKDD", "KKDD"}), 0.0);
  EXPECT_EQ(sequence_diversity({"KKDD", "RRGG"}), 1.0);
  EXPECT_EQ(sequence_diversity({"KKDD", "KKKK"}), 0.5);
  EXPECT_THROW(sequence_diversity({"KKDD"}), std::invalid_argument);
  EXPECT_THROW(sequence_diversity({"KKDD", "KKD"}), std::invalid_argument);
}

TEST(Diversity, ReorderingAndRelabelingInvariant) {
  const std::vector<std::string> a{"KRDEG", "KKDEA", "VSDEG", "KRRRR"};
  auto b = a;
  std::reverse(b.begin(), b.end());
  EXPECT_DOUBLE_EQ(sequence_diversity(a), sequence_diversity(b));
  auto c = a;
  for (auto& s : c)
    for (auto& ch : s) ch = ch == 'K' ? 'R' : ch == 'R' ? 'K' : ch == 'D' ? 'V' : ch == 'V' ? 'D' : ch;
  EXPECT_DOUBLE_EQ(sequence_diversity(a), sequence_diversity(c));
}

TEST(Tables, PerStepMeanAndSd) {
  TrajectoryLog log;
  for (int t : {4, 2, 0})
    for (std::size_t i = 0; i < 3; ++i) {
      TrajectoryRow row;
      row.t = t;
      row.particle = i;
      row.reward = static_cast<double>(t + i);
      log.rows.push_back(row);
    }
  const auto table = reward_trajectory_table(log);
  ASSERT_EQ(table.per_step.size(), 3u);
  EXPECT_EQ(table.per_step[0].t, 4);
  EXPECT_DOUBLE_EQ(table.per_step[0].mean, 5.0);
  EXPECT_NEAR(table.per_step[0].sd, std::sqrt(2.0 / 3.0), 1e-15);
  EXPECT_EQ(table.rows.size(), 9u);

  TrajectoryLog single;
  single.rows.push_back(log.rows[0]);
  EXPECT_EQ(reward_trajectory_table(single).per_step[0].sd, 0.0);
}

TEST(Tables, GuidedAndUnguidedShareTheGrid) {
  const auto c = small_chain();
  const auto a = reward_trajectory_table(run_steered(c).log);
  const auto b = reward_trajectory_table(run_unguided(c).log);
  ASSERT_EQ(a.per_step.size(), b.per_step.size());
  for (std::size_t k = 0; k < a.per_step.size(); ++k) EXPECT_EQ(a.per_step[k].t, b.per_step[k].t);
}

TEST(Tables, SsComposition) {
  TerminalRecord straight;
  straight.ss = classify_ss(std::vector<double>{0, 0, 1, 0, 2, 0, 3, 0, 4, 0});
  const auto rows = ss_composition_table({straight, straight});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].beta, 1.0);
  const auto run = run_steered(small_chain());
  for (const auto& f : ss_composition_table(run.terminal)) EXPECT_NEAR(f.alpha + f.beta + f.ell, 1.0, 1e-12);
}

TEST(Tables, DiversityCurveAndTerminal) {
  const auto run = run_steered(small_chain());
  const auto curve = diversity_curve(run.log);
  ASSERT_FALSE(curve.empty());
  EXPECT_EQ(curve.front().t, 10);
  EXPECT_EQ(curve.back().t, 0);
  for (const auto& p : curve) {
    EXPECT_GE(p.diversity, 0.0);
    EXPECT_LE(p.diversity, 1.0);
  }
  EXPECT_GE(terminal_diversity(run.terminal), 0.0);
  EXPECT_TRUE(std::isnan(terminal_diversity({})));
}

TEST(Report, WritesDocumentedFiles) {
  const auto dir = fs::temp_directory_path() / "fksteer_report";
  fs::remove_all(dir);
  const auto run = run_steered(small_chain());
  write_report(dir, run.log, run.terminal);
  EXPECT_EQ(first_line(dir / "diversity.csv"), "t,diversity");
  EXPECT_EQ(first_line(dir / "rewards_long.csv"), "t,particle,reward,ancestor,lineage,guided,step_mean,step_sd");
  EXPECT_EQ(first_line(dir / "ss_fractions.csv"), "design,alpha,beta,ell");
}

TEST(Report, DeterministicFunctionOfTheLog) {
  const auto run = run_steered(small_chain());
  const auto a = fs::temp_directory_path() / "fksteer_report_a";
  const auto b = fs::temp_directory_path() / "fksteer_report_b";
  write_report(a, run.log, run.terminal);
  write_report(b, run.log, run.terminal);
  for (const char* f : {"diversity.csv", "rewards_long.csv", "ss_fractions.csv"}) {
    std::ifstream x(a / f), y(b / f);
    const std::string sx((std::istreambuf_iterator<char>(x)), {}), sy((std::istreambuf_iterator<char>(y)), {});
    EXPECT_EQ(sx, sy) << f;
  }
}

TEST(Report, ReadersRejectMissingFiles) {
  EXPECT_THROW(read_trajectory_csv("/nonexistent/trajectory.csv"), ConfigError);
}

}  // namespace
